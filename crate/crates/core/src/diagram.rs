//! Layered diagram models of the follower's dynamic program.
//!
//! A diagram is a layered acyclic multigraph whose p-to-q paths encode
//! feasible follower solutions. Three kinds exist: the two-node value
//! function graph, selection diagrams (pick which item joins the solution
//! next), and decision diagrams (include or exclude one item group per
//! layer). Diagrams start small and grow in place: selection diagrams gain
//! terminal arcs, decision diagrams gain valid-transition arcs between
//! existing nodes. Every mutation keeps the soundness invariant that each
//! p-to-q path's item union is feasible for the follower.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{ItemSet, Payload, PricingInstance, Sense, TollVector};
use crate::error::{Error, Result};
use crate::problems::knapsack::{knapsack_best_value, KnapsackData};
use crate::problems::set_cover::{min_cost_cover, SetCoverData};
use crate::problems::stable_set::{stable_best_value, GraphData};

/// Largest group size for which exhaustive subset expansion is allowed.
const MAX_GROUP_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    ValueFunction,
    Selection,
    Decision,
}

/// Per-node dynamic programming state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeState {
    /// Selection diagram: items already added.
    Subset(ItemSet),
    /// Knapsack-style remaining capacity.
    Capacity(i64),
    /// Stable-set: items still selectable.
    Avail(ItemSet),
    /// Set-cover: elements still uncovered.
    Uncovered(ItemSet),
    Terminal,
}

impl NodeState {
    fn label(&self) -> String {
        match self {
            NodeState::Subset(s) | NodeState::Avail(s) | NodeState::Uncovered(s) => {
                format!("{s:?}")
            }
            NodeState::Capacity(c) => c.to_string(),
            NodeState::Terminal => "q".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagramNode {
    pub id: usize,
    pub layer: usize,
    pub state: NodeState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramArc {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub items: ItemSet,
}

/// Ordered partition of the items into decision-diagram layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<ItemSet>,
}

impl GroupPartition {
    pub fn new(groups: Vec<ItemSet>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidConfig("empty group partition".into()));
        }
        let n = groups[0].capacity();
        let mut seen = ItemSet::new(n);
        let mut total = 0;
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidConfig("empty group".into()));
            }
            if g.capacity() != n || !g.is_disjoint(&seen) {
                return Err(Error::InvalidConfig("groups overlap".into()));
            }
            seen = seen.union(g);
            total += g.count();
        }
        if total != n {
            return Err(Error::InvalidConfig(format!(
                "groups cover {total} of {n} items"
            )));
        }
        Ok(GroupPartition { groups })
    }

    /// One item per group, in natural index order (the ungrouped diagram).
    pub fn singletons(n: usize) -> Self {
        let groups = (0..n).map(|i| ItemSet::from_items(n, &[i])).collect();
        GroupPartition { groups }
    }

    pub fn groups(&self) -> &[ItemSet] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Union of the groups with indices in `lo..hi`.
    fn items_between(&self, lo: usize, hi: usize) -> ItemSet {
        let n = self.groups[0].capacity();
        let mut acc = ItemSet::new(n);
        for g in &self.groups[lo..hi] {
            acc = acc.union(g);
        }
        acc
    }
}

/// Randomly permutes the items and chops the permutation into `m`
/// contiguous groups; the first `n mod m` groups get the extra item.
/// `m` is clamped to `1..=n`.
pub fn make_grouping(n: usize, m: usize, rng: &mut dyn Rng) -> GroupPartition {
    let m = m.clamp(1, n.max(1));
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let small = n / m;
    let extra = n % m;
    let mut groups = Vec::with_capacity(m);
    let mut at = 0;
    for k in 0..m {
        let size = if k < extra { small + 1 } else { small };
        groups.push(ItemSet::from_items(n, &perm[at..at + size]));
        at += size;
    }
    GroupPartition { groups }
}

/// Layered acyclic multigraph with deduplicated nodes and arcs.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub kind: DiagramKind,
    nodes: Vec<DiagramNode>,
    layers: Vec<Vec<usize>>,
    arcs: Vec<DiagramArc>,
    out: Vec<Vec<usize>>,
    state_index: HashMap<(usize, NodeState), usize>,
    arc_index: HashMap<(usize, usize, ItemSet), usize>,
    p: usize,
    q: usize,
    grouping: Option<GroupPartition>,
}

impl Diagram {
    fn new(kind: DiagramKind, num_layers: usize, p_state: NodeState) -> Diagram {
        assert!(num_layers >= 2);
        let mut d = Diagram {
            kind,
            nodes: Vec::new(),
            layers: vec![Vec::new(); num_layers],
            arcs: Vec::new(),
            out: Vec::new(),
            state_index: HashMap::new(),
            arc_index: HashMap::new(),
            p: 0,
            q: 0,
        	grouping: None,
        };
        d.p = d.add_node(0, p_state);
        d.q = d.add_node(num_layers - 1, NodeState::Terminal);
        d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn node(&self, id: usize) -> &DiagramNode {
        &self.nodes[id]
    }

    pub fn arc(&self, id: usize) -> &DiagramArc {
        &self.arcs[id]
    }

    pub fn nodes(&self) -> &[DiagramNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[DiagramArc] {
        &self.arcs
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Node ids in layer `k`, in insertion order.
    pub fn layer(&self, k: usize) -> &[usize] {
        &self.layers[k]
    }

    /// Outgoing arc ids of a node, in insertion order.
    pub fn arcs_from(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn grouping(&self) -> Option<&GroupPartition> {
        self.grouping.as_ref()
    }

    pub fn contains_arc(&self, src: usize, dst: usize, items: &ItemSet) -> bool {
        self.arc_index.contains_key(&(src, dst, items.clone()))
    }

    /// Inserts a node, merging with an existing (layer, state) duplicate.
    fn add_node(&mut self, layer: usize, state: NodeState) -> usize {
        let key = (layer, state.clone());
        if let Some(&id) = self.state_index.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(DiagramNode { id, layer, state });
        self.layers[layer].push(id);
        self.out.push(Vec::new());
        self.state_index.insert(key, id);
        id
    }

    /// Inserts an arc unless an identical (src, dst, items) arc exists.
    /// Returns the arc id and whether it is new.
    fn add_arc(&mut self, src: usize, dst: usize, items: ItemSet) -> (usize, bool) {
        debug_assert!(self.nodes[src].layer < self.nodes[dst].layer);
        let key = (src, dst, items.clone());
        if let Some(&id) = self.arc_index.get(&key) {
            return (id, false);
        }
        let id = self.arcs.len();
        self.arcs.push(DiagramArc {
            id,
            src,
            dst,
            items,
        });
        self.out[src].push(id);
        self.arc_index.insert(key, id);
        (id, true)
    }
}

/// Net length of an arc under tolls `t`: the sum of the follower's net
/// values over the arc's items (toll-adjusted per problem sense).
pub fn arc_length(inst: &PricingInstance, arc: &DiagramArc, t: &TollVector) -> f64 {
    let net = inst.net_values(t);
    arc.items.iter().map(|i| net[i]).sum()
}

fn length_from_net(net: &[f64], items: &ItemSet) -> f64 {
    items.iter().map(|i| net[i]).sum()
}

/// The state of the initial node `p`.
fn initial_state(inst: &PricingInstance) -> NodeState {
    match &inst.payload {
        Payload::Knapsack(d) => NodeState::Capacity(d.capacity),
        Payload::Interdiction(d) => NodeState::Capacity(d.c),
        Payload::Graph(_) => NodeState::Avail(ItemSet::universe(inst.n)),
        Payload::SetCover(d) => NodeState::Uncovered(ItemSet::universe(d.n_elements)),
    }
}

/// Two-node diagram whose only possible arcs are direct p-to-q cuts.
pub fn vf_init(inst: &PricingInstance) -> Diagram {
    Diagram::new(
        DiagramKind::ValueFunction,
        2,
        NodeState::Subset(ItemSet::new(inst.n)),
    )
}

/// Builds the initial selection diagram: samples `n_pairs` solutions, takes
/// one uniformly random pair from each, and wires the empty set through
/// singletons to pairs. No arc reaches `q` yet. A sampled solution with
/// fewer than two items contributes its singleton (if any) and no pair.
pub fn sd_init(inst: &PricingInstance, n_pairs: usize, rng: &mut dyn Rng) -> Result<Diagram> {
    let mut diag = Diagram::new(
        DiagramKind::Selection,
        4,
        NodeState::Subset(ItemSet::new(inst.n)),
    );
    let follower = inst.follower();
    for _ in 0..n_pairs {
        let x = follower.sample_solution(rng)?;
        let mut items = x.0.items();
        items.shuffle(rng);
        match items.len() {
            0 => {}
            1 => {
                diag.add_node(1, NodeState::Subset(ItemSet::from_items(inst.n, &items)));
            }
            _ => {
                let pair = &items[..2];
                for &i in pair {
                    diag.add_node(1, NodeState::Subset(ItemSet::from_items(inst.n, &[i])));
                }
                diag.add_node(2, NodeState::Subset(ItemSet::from_items(inst.n, pair)));
            }
        }
    }
    for k in 1..=2 {
        let (lo, hi) = (diag.layers[k - 1].clone(), diag.layers[k].clone());
        for hid in hi {
            let NodeState::Subset(big) = diag.node(hid).state.clone() else {
                continue;
            };
            for &lid in &lo {
                let NodeState::Subset(small) = &diag.node(lid).state else {
                    continue;
                };
                if small.is_subset(&big) {
                    let items = big.minus(small);
                    diag.add_arc(lid, hid, items);
                }
            }
        }
    }
    Ok(diag)
}

/// Wires a feasible solution into a selection (or value-function) diagram
/// with one terminal arc. Scans layers from the pair layer down to the
/// empty set, nodes within a layer in random order, and connects the first
/// subset of `x` found to `q` carrying the leftover items. The boolean is
/// false when that arc was already present (re-adding is a no-op).
/// Inserts the direct p-to-q arc carrying a whole solution. Works on any
/// diagram kind; the arc id and a newness flag come back.
pub fn direct_solution_arc(diag: &mut Diagram, x: &ItemSet) -> (usize, bool) {
    let (p, q) = (diag.p(), diag.q());
    diag.add_arc(p, q, x.clone())
}

pub fn sd_add_solution(
    diag: &mut Diagram,
    x: &ItemSet,
    rng: &mut dyn Rng,
) -> (usize, bool) {
    debug_assert!(matches!(
        diag.kind,
        DiagramKind::Selection | DiagramKind::ValueFunction
    ));
    for k in (0..diag.num_layers() - 1).rev() {
        let mut ids = diag.layers[k].clone();
        ids.shuffle(rng);
        for id in ids {
            let NodeState::Subset(j) = &diag.node(id).state else {
                continue;
            };
            if j.is_subset(x) {
                return diag.add_arc(id, diag.q, x.minus(j));
            }
        }
    }
    unreachable!("layer 0 holds the empty set");
}

/// State trajectory of `x` through the (grouped) decision diagram: one
/// state per layer boundary, ending with the terminal state. Knapsack
/// capacities are capped at the total remaining weight so that trajectories
/// live in the merged diagram.
pub fn dd_path_for_solution(
    inst: &PricingInstance,
    x: &ItemSet,
    grouping: Option<&GroupPartition>,
) -> Result<Vec<NodeState>> {
    let fallback;
    let groups = match grouping {
        Some(g) => g.groups(),
        None => {
            fallback = GroupPartition::singletons(inst.n);
            fallback.groups()
        }
    };
    match &inst.payload {
        Payload::Knapsack(d) => capacity_path(d, x, groups),
        Payload::Interdiction(d) => capacity_path(&d.follower_knapsack(), x, groups),
        Payload::Graph(g) => avail_path(g, x, groups),
        Payload::SetCover(d) => uncovered_path(d, x, groups),
    }
}

/// Total weight of the groups at and after each layer index.
fn weight_suffix(d: &KnapsackData, groups: &[ItemSet]) -> Vec<i64> {
    let mut suffix = vec![0i64; groups.len() + 1];
    for k in (0..groups.len()).rev() {
        suffix[k] = suffix[k + 1] + d.weight_of(&groups[k]);
    }
    suffix
}

fn capacity_path(d: &KnapsackData, x: &ItemSet, groups: &[ItemSet]) -> Result<Vec<NodeState>> {
    let suffix = weight_suffix(d, groups);
    let mut s = d.capacity.min(suffix[0]);
    let mut states = vec![NodeState::Capacity(s)];
    for (k, g) in groups.iter().enumerate() {
        let w = d.weight_of(&x.intersect(g));
        if w > s {
            return Err(Error::FollowerInfeasible(format!(
                "group {k} overflows capacity {s}"
            )));
        }
        if k + 1 == groups.len() {
            states.push(NodeState::Terminal);
        } else {
            s = (s - w).min(suffix[k + 1]);
            states.push(NodeState::Capacity(s));
        }
    }
    Ok(states)
}

fn avail_path(g: &GraphData, x: &ItemSet, groups: &[ItemSet]) -> Result<Vec<NodeState>> {
    let mut s = ItemSet::universe(g.n);
    let mut states = vec![NodeState::Avail(s.clone())];
    for (k, grp) in groups.iter().enumerate() {
        let take = x.intersect(grp);
        if !take.is_subset(&s) || !g.is_stable(&take) {
            return Err(Error::FollowerInfeasible(format!(
                "group {k} picks adjacent or unavailable items"
            )));
        }
        if k + 1 == groups.len() {
            states.push(NodeState::Terminal);
        } else {
            s = s.minus(&g.closed_neighborhood_of_set(&take)).minus(grp);
            states.push(NodeState::Avail(s.clone()));
        }
    }
    Ok(states)
}

fn uncovered_path(d: &SetCoverData, x: &ItemSet, groups: &[ItemSet]) -> Result<Vec<NodeState>> {
    let mut s = ItemSet::universe(d.n_elements);
    let mut states = vec![NodeState::Uncovered(s.clone())];
    for (k, grp) in groups.iter().enumerate() {
        s = s.minus(&d.covered_by(&x.intersect(grp)));
        if k + 1 == groups.len() {
            if !s.is_empty() {
                return Err(Error::FollowerInfeasible(format!(
                    "{} elements left uncovered",
                    s.count()
                )));
            }
            states.push(NodeState::Terminal);
        } else {
            states.push(NodeState::Uncovered(s.clone()));
        }
    }
    Ok(states)
}

/// Builds the initial decision diagram as the union of `width` sampled
/// solution paths, merging nodes with equal (layer, state). `None` grouping
/// means the ungrouped diagram in natural item order.
pub fn dd_init(
    inst: &PricingInstance,
    width: usize,
    grouping: Option<GroupPartition>,
    rng: &mut dyn Rng,
) -> Result<Diagram> {
    let grouping = grouping.unwrap_or_else(|| GroupPartition::singletons(inst.n));
    let m = grouping.len();
    let mut diag = Diagram::new(DiagramKind::Decision, m + 1, capped_initial_state(inst, &grouping));
    let follower = inst.follower();
    for _ in 0..width {
        let x = follower.sample_solution(rng)?;
        let states = dd_path_for_solution(inst, &x.0, Some(&grouping))?;
        let mut prev = diag.p;
        for (k, st) in states.iter().enumerate().skip(1) {
            let node = if k == m {
                diag.q
            } else {
                diag.add_node(k, st.clone())
            };
            diag.add_arc(prev, node, x.0.intersect(&grouping.groups()[k - 1]));
            prev = node;
        }
    }
    diag.grouping = Some(grouping);
    Ok(diag)
}

/// `p`'s state with the knapsack merge applied (capacity capped at the
/// total item weight); other problems use the plain initial state.
fn capped_initial_state(inst: &PricingInstance, grouping: &GroupPartition) -> NodeState {
    match initial_state(inst) {
        NodeState::Capacity(c) => {
            let d = match &inst.payload {
                Payload::Knapsack(d) => d.clone(),
                Payload::Interdiction(d) => d.follower_knapsack(),
                _ => unreachable!(),
            };
            NodeState::Capacity(c.min(weight_suffix(&d, grouping.groups())[0]))
        }
        s => s,
    }
}

/// Effective state of a node for transition tests (`q` acts as capacity 0
/// or the empty set).
fn effective_state(inst: &PricingInstance, node: &DiagramNode) -> NodeState {
    match &node.state {
        NodeState::Terminal => match &inst.payload {
            Payload::Knapsack(_) | Payload::Interdiction(_) => NodeState::Capacity(0),
            Payload::Graph(_) => NodeState::Avail(ItemSet::new(inst.n)),
            Payload::SetCover(d) => NodeState::Uncovered(ItemSet::new(d.n_elements)),
        },
        s => s.clone(),
    }
}

/// Membership test in the per-problem valid transition set: can a single
/// arc carrying `items` soundly connect `src` to `dst`?
pub fn dd_valid_transition(
    inst: &PricingInstance,
    src: &DiagramNode,
    dst: &DiagramNode,
    items: &ItemSet,
) -> bool {
    if src.layer >= dst.layer || matches!(src.state, NodeState::Terminal) {
        return false;
    }
    let sj = effective_state(inst, src);
    let sk = effective_state(inst, dst);
    match (&inst.payload, &sj, &sk) {
        (Payload::Knapsack(d), NodeState::Capacity(a), NodeState::Capacity(b)) => {
            a - d.weight_of(items) >= *b
        }
        (Payload::Interdiction(d), NodeState::Capacity(a), NodeState::Capacity(b)) => {
            a - d.follower_knapsack().weight_of(items) >= *b
        }
        (Payload::Graph(g), NodeState::Avail(a), NodeState::Avail(b)) => {
            g.is_stable(items)
                && items.is_subset(a)
                && b.is_subset(&a.minus(&g.closed_neighborhood_of_set(items)))
        }
        (Payload::SetCover(d), NodeState::Uncovered(a), NodeState::Uncovered(b)) => {
            a.minus(&d.covered_by(items)).is_subset(b)
        }
        _ => false,
    }
}

/// Wires a feasible solution into a decision diagram: enumerates the valid
/// transitions between existing nodes whose items match `x` restricted to
/// the spanned groups, finds the p-to-q path with the most arcs (ties break
/// toward the lexicographically smallest node-id sequence), and inserts the
/// missing arcs. Returns the inserted arc ids; never adds nodes.
pub fn dd_add_solution(
    diag: &mut Diagram,
    inst: &PricingInstance,
    x: &ItemSet,
) -> Result<Vec<usize>> {
    debug_assert_eq!(diag.kind, DiagramKind::Decision);
    let grouping = diag
        .grouping
        .clone()
        .ok_or_else(|| Error::InvalidConfig("decision diagram without grouping".into()))?;
    let n_nodes = diag.nodes.len();
    // prefix[k] = items decided by layer k
    let prefix: Vec<ItemSet> = (0..diag.num_layers())
        .map(|k| grouping.items_between(0, k))
        .collect();
    let valid = |u: usize, v: usize| -> Option<ItemSet> {
        let (nu, nv) = (&diag.nodes[u], &diag.nodes[v]);
        let items = x.intersect(&prefix[nv.layer].minus(&prefix[nu.layer]));
        dd_valid_transition(inst, nu, nv, &items).then_some(items)
    };

    // Longest path to q by arc count, then a greedy lexicographic walk.
    let mut dist = vec![i64::MIN; n_nodes];
    dist[diag.q] = 0;
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.sort_by_key(|&id| std::cmp::Reverse(diag.nodes[id].layer));
    for &u in &order {
        if u == diag.q {
            continue;
        }
        for v in 0..n_nodes {
            if diag.nodes[v].layer > diag.nodes[u].layer
                && dist[v] > i64::MIN
                && valid(u, v).is_some()
            {
                dist[u] = dist[u].max(1 + dist[v]);
            }
        }
    }
    if dist[diag.p] < 0 {
        return Err(Error::NoTerminalPath);
    }

    let mut path = Vec::new();
    let mut cur = diag.p;
    while cur != diag.q {
        let mut step = None;
        for v in 0..n_nodes {
            if diag.nodes[v].layer > diag.nodes[cur].layer && 1 + dist[v] == dist[cur] {
                if let Some(items) = valid(cur, v) {
                    step = Some((v, items));
                    break;
                }
            }
        }
        let (v, items) = step.expect("positive dist implies a successor");
        path.push((cur, v, items));
        cur = v;
    }

    let mut added = Vec::new();
    for (u, v, items) in path {
        let (aid, new) = diag.add_arc(u, v, items);
        if new {
            added.push(aid);
        }
    }
    Ok(added)
}

/// Longest (maximize) or shortest (minimize) p-to-q path under tolls `t`.
/// Returns the path value and its arc ids. Verification helper.
pub fn diagram_longest_path(
    diag: &Diagram,
    inst: &PricingInstance,
    t: &TollVector,
) -> Result<(f64, Vec<usize>)> {
    let net = inst.net_values(t);
    let maximize = inst.sense() == Sense::Maximize;
    let mut best: Vec<Option<f64>> = vec![None; diag.nodes.len()];
    let mut parent: Vec<Option<usize>> = vec![None; diag.nodes.len()];
    best[diag.p] = Some(0.0);
    for layer in &diag.layers {
        for &u in layer {
            let Some(bu) = best[u] else { continue };
            for &aid in &diag.out[u] {
                let arc = &diag.arcs[aid];
                let val = bu + length_from_net(&net, &arc.items);
                let improves = match best[arc.dst] {
                    None => true,
                    Some(bv) => {
                        if maximize {
                            val > bv
                        } else {
                            val < bv
                        }
                    }
                };
                if improves {
                    best[arc.dst] = Some(val);
                    parent[arc.dst] = Some(aid);
                }
            }
        }
    }
    let value = best[diag.q].ok_or(Error::NoTerminalPath)?;
    let mut path = Vec::new();
    let mut cur = diag.q;
    while cur != diag.p {
        let aid = parent[cur].expect("reached node has a parent");
        path.push(aid);
        cur = diag.arcs[aid].src;
    }
    path.reverse();
    Ok((value, path))
}

/// Complete selection diagram over the follower's enumerated solutions:
/// nodes are all subsets of solutions layered by cardinality, with subset
/// arcs between consecutive sizes and a terminal arc from every exact
/// solution. Test-scale only; fails once `cap` nodes are exceeded.
pub fn sd_full(inst: &PricingInstance, cap: usize) -> Result<Diagram> {
    let follower = inst.follower();
    let sols = follower.enumerate_solutions(cap)?;
    let mut subsets = std::collections::BTreeSet::new();
    for sol in &sols {
        let items = sol.0.items();
        if items.len() > MAX_GROUP_BITS {
            return Err(Error::SizeCapExceeded(format!(
                "solution with {} items in full selection diagram",
                items.len()
            )));
        }
        for mask in 0u32..(1 << items.len()) {
            let chosen: Vec<usize> = items
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            subsets.insert(ItemSet::from_items(inst.n, &chosen));
            if subsets.len() > cap {
                return Err(Error::SizeCapExceeded(format!(
                    "full selection diagram exceeds {cap} nodes"
                )));
            }
        }
    }
    let max_size = subsets.iter().map(|s| s.count()).max().unwrap_or(0);
    let mut diag = Diagram::new(
        DiagramKind::Selection,
        max_size + 2,
        NodeState::Subset(ItemSet::new(inst.n)),
    );
    for j in &subsets {
        diag.add_node(j.count(), NodeState::Subset(j.clone()));
    }
    for k in subsets.iter().filter(|k| !k.is_empty()) {
        let kid = diag.state_index[&(k.count(), NodeState::Subset(k.clone()))];
        for i in k.iter() {
            let mut j = k.clone();
            j.remove(i);
            if let Some(&jid) = diag.state_index.get(&(j.count(), NodeState::Subset(j))) {
                diag.add_arc(jid, kid, ItemSet::from_items(inst.n, &[i]));
            }
        }
    }
    for sol in &sols {
        let sid = diag.state_index[&(sol.0.count(), NodeState::Subset(sol.0.clone()))];
        diag.add_arc(sid, diag.q, ItemSet::new(inst.n));
    }
    Ok(diag)
}

/// Complete decision diagram by exhaustive layer expansion with state
/// merging. Knapsack-style problems additionally cap capacities at the
/// remaining total weight and drop arcs whose item set is a strict subset
/// of a parallel arc's (the redundant-zero-arc elimination); set-cover
/// diagrams keep only covering last-layer arcs and prune dead states.
/// Test-scale only; fails once `cap` nodes are exceeded.
pub fn dd_full(
    inst: &PricingInstance,
    grouping: Option<GroupPartition>,
    cap: usize,
) -> Result<Diagram> {
    let grouping = grouping.unwrap_or_else(|| GroupPartition::singletons(inst.n));
    for g in grouping.groups() {
        if g.count() > MAX_GROUP_BITS {
            return Err(Error::SizeCapExceeded(format!(
                "group of {} items in full decision diagram",
                g.count()
            )));
        }
    }
    let m = grouping.len();
    let mut diag = Diagram::new(
        DiagramKind::Decision,
        m + 1,
        capped_initial_state(inst, &grouping),
    );
    let capacity_data = match &inst.payload {
        Payload::Knapsack(d) => Some(d.clone()),
        Payload::Interdiction(d) => Some(d.follower_knapsack()),
        _ => None,
    };
    let suffix = capacity_data
        .as_ref()
        .map(|d| weight_suffix(d, grouping.groups()));

    for k in 0..m {
        let group_items = grouping.groups()[k].items();
        let last = k + 1 == m;
        let mut bucket: HashMap<(usize, NodeState), Vec<ItemSet>> = HashMap::new();
        let mut bucket_order = Vec::new();
        for &uid in &diag.layers[k].clone() {
            let su = diag.node(uid).state.clone();
            for mask in 0u32..(1 << group_items.len()) {
                let take: Vec<usize> = group_items
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let take = ItemSet::from_items(inst.n, &take);
                let Some(next) = expand_state(
                    inst,
                    &su,
                    &grouping.groups()[k],
                    &take,
                    suffix.as_ref().map(|s| s[k + 1]),
                    last,
                ) else {
                    continue;
                };
                let dst_key = if last { NodeState::Terminal } else { next };
                let key = (uid, dst_key);
                if !bucket.contains_key(&key) {
                    bucket_order.push(key.clone());
                }
                bucket.entry(key).or_default().push(take);
            }
        }
        for key in bucket_order {
            let mut takes = bucket.remove(&key).unwrap();
            if capacity_data.is_some() {
                // Redundant-arc elimination: a parallel arc with strictly
                // more items dominates (tolls never exceed values here).
                let all = takes.clone();
                takes.retain(|a| !all.iter().any(|b| a != b && a.is_subset(b)));
            }
            let (uid, dst_state) = key;
            let vid = if last {
                diag.q
            } else {
                diag.add_node(k + 1, dst_state)
            };
            for take in takes {
                diag.add_arc(uid, vid, take);
            }
        }
        if diag.nodes.len() > cap {
            return Err(Error::SizeCapExceeded(format!(
                "full decision diagram exceeds {cap} nodes"
            )));
        }
    }
    diag.grouping = Some(grouping);
    prune_unreachable(inst, diag)
}

/// Next-layer state for taking `take` out of group `grp`, or None when the
/// decision is unavailable. `threshold` is the knapsack merge cap for the
/// target layer; `last` marks the transition into `q`.
fn expand_state(
    inst: &PricingInstance,
    state: &NodeState,
    grp: &ItemSet,
    take: &ItemSet,
    threshold: Option<i64>,
    last: bool,
) -> Option<NodeState> {
    match (&inst.payload, state) {
        (Payload::Knapsack(d), NodeState::Capacity(s)) => {
            capacity_step(d, *s, take, threshold.unwrap())
        }
        (Payload::Interdiction(d), NodeState::Capacity(s)) => {
            capacity_step(&d.follower_knapsack(), *s, take, threshold.unwrap())
        }
        (Payload::Graph(g), NodeState::Avail(s)) => {
            if !take.is_subset(s) || !g.is_stable(take) {
                return None;
            }
            Some(NodeState::Avail(
                s.minus(&g.closed_neighborhood_of_set(take)).minus(grp),
            ))
        }
        (Payload::SetCover(d), NodeState::Uncovered(s)) => {
            let left = s.minus(&d.covered_by(take));
            if last && !left.is_empty() {
                return None;
            }
            Some(NodeState::Uncovered(left))
        }
        _ => None,
    }
}

fn capacity_step(d: &KnapsackData, s: i64, take: &ItemSet, threshold: i64) -> Option<NodeState> {
    let w = d.weight_of(take);
    (w <= s).then(|| NodeState::Capacity((s - w).min(threshold)))
}

/// Drops nodes that cannot reach `q` (set-cover dead states) along with
/// their arcs, rebuilding the diagram with contiguous ids.
fn prune_unreachable(inst: &PricingInstance, diag: Diagram) -> Result<Diagram> {
    let mut reaches = vec![false; diag.nodes.len()];
    reaches[diag.q] = true;
    for layer in diag.layers.iter().rev() {
        for &u in layer {
            reaches[u] |= diag.out[u].iter().any(|&a| reaches[diag.arcs[a].dst]);
        }
    }
    if !reaches[diag.p] {
        return Err(Error::NoTerminalPath);
    }
    if reaches.iter().all(|&r| r) {
        return Ok(diag);
    }
    let mut pruned = Diagram::new(diag.kind, diag.num_layers(), diag.nodes[diag.p].state.clone());
    let _ = inst;
    let mut remap = vec![usize::MAX; diag.nodes.len()];
    remap[diag.p] = pruned.p;
    remap[diag.q] = pruned.q;
    for layer in &diag.layers {
        for &u in layer {
            if reaches[u] && remap[u] == usize::MAX {
                remap[u] = pruned.add_node(diag.nodes[u].layer, diag.nodes[u].state.clone());
            }
        }
    }
    for arc in &diag.arcs {
        if reaches[arc.src] && reaches[arc.dst] {
            pruned.add_arc(remap[arc.src], remap[arc.dst], arc.items.clone());
        }
    }
    pruned.grouping = diag.grouping;
    Ok(pruned)
}

/// Best completion value from every node to `q` under tolls `t`, solved
/// exactly per node state. Uncoverable set-cover states get `dead_value`.
/// Feeds warm-start solutions that must satisfy all future cut rows.
pub fn value_to_go(
    inst: &PricingInstance,
    diag: &Diagram,
    t: &TollVector,
    dead_value: f64,
) -> Result<Vec<f64>> {
    let net = inst.net_values(t);
    let remaining: Vec<ItemSet> = match (&diag.kind, diag.grouping()) {
        (DiagramKind::Decision, Some(g)) => (0..diag.num_layers())
            .map(|k| g.items_between(k, g.len()))
            .collect(),
        _ => Vec::new(),
    };
    let mut vals = Vec::with_capacity(diag.nodes.len());
    for node in &diag.nodes {
        let v = match &node.state {
            NodeState::Terminal => 0.0,
            NodeState::Subset(j) => subset_value_to_go(inst, j, &net)?,
            NodeState::Capacity(s) => {
                let d = match &inst.payload {
                    Payload::Knapsack(d) => d.clone(),
                    Payload::Interdiction(d) => d.follower_knapsack(),
                    _ => {
                        return Err(Error::InvalidConfig(
                            "capacity state on a non-knapsack instance".into(),
                        ))
                    }
                };
                let restricted = KnapsackData {
                    weights: d.weights,
                    capacity: *s,
                };
                knapsack_best_value(&restricted, &net, &remaining[node.layer])
            }
            NodeState::Avail(s) => match &inst.payload {
                Payload::Graph(g) => stable_best_value(g, &net, s),
                _ => {
                    return Err(Error::InvalidConfig(
                        "availability state on a non-graph instance".into(),
                    ))
                }
            },
            NodeState::Uncovered(s) => match &inst.payload {
                Payload::SetCover(d) => {
                    match min_cost_cover(d, &net, &remaining[node.layer], s) {
                        Ok(v) => v,
                        Err(Error::FollowerInfeasible(_)) => dead_value,
                        Err(e) => return Err(e),
                    }
                }
                _ => {
                    return Err(Error::InvalidConfig(
                        "uncovered state on a non-cover instance".into(),
                    ))
                }
            },
        };
        vals.push(v);
    }
    Ok(vals)
}

/// Best extension value of a selection-diagram node.
fn subset_value_to_go(inst: &PricingInstance, j: &ItemSet, net: &[f64]) -> Result<f64> {
    match &inst.payload {
        Payload::Knapsack(d) => {
            let rest = d.capacity - d.weight_of(j);
            if rest < 0 {
                return Err(Error::FollowerInfeasible("node exceeds capacity".into()));
            }
            let restricted = KnapsackData {
                weights: d.weights.clone(),
                capacity: rest,
            };
            Ok(knapsack_best_value(&restricted, net, &j.complement()))
        }
        Payload::Interdiction(d) => {
            let fk = d.follower_knapsack();
            let rest = fk.capacity - fk.weight_of(j);
            if rest < 0 {
                return Err(Error::FollowerInfeasible("node exceeds capacity".into()));
            }
            let restricted = KnapsackData {
                weights: fk.weights,
                capacity: rest,
            };
            Ok(knapsack_best_value(&restricted, net, &j.complement()))
        }
        Payload::Graph(g) => Ok(stable_best_value(
            g,
            net,
            &g.closed_neighborhood_of_set(j).complement(),
        )),
        Payload::SetCover(d) => {
            let universe = ItemSet::universe(d.n_elements).minus(&d.covered_by(j));
            match min_cost_cover(d, net, &j.complement(), &universe) {
                Ok(v) => Ok(v),
                Err(Error::FollowerInfeasible(_)) => Err(Error::TollFreeCoverViolated(
                    "selection node cannot be completed to a cover".into(),
                )),
                Err(e) => Err(e),
            }
        }
    }
}

/// Deterministic DOT rendering: nodes ordered by (layer, id) and labeled by
/// state, arcs ordered by (source layer, source, target, id) and labeled by
/// item set. Skip-style arcs (empty item set on decision diagrams, arcs
/// into `q` elsewhere) are dashed.
pub fn export_dot(diag: &Diagram) -> String {
    let mut s = String::from("digraph diagram {\n  rankdir=LR;\n");
    let mut ids: Vec<usize> = (0..diag.nodes.len()).collect();
    ids.sort_by_key(|&id| (diag.nodes[id].layer, id));
    for id in &ids {
        let node = &diag.nodes[*id];
        let _ = writeln!(s, "  n{} [label=\"{}\"];", node.id, node.state.label());
    }
    let mut arc_ids: Vec<usize> = (0..diag.arcs.len()).collect();
    arc_ids.sort_by_key(|&id| {
        let a = &diag.arcs[id];
        (diag.nodes[a.src].layer, a.src, a.dst, id)
    });
    for aid in arc_ids {
        let a = &diag.arcs[aid];
        let dashed = match diag.kind {
            DiagramKind::Decision => a.items.is_empty(),
            _ => a.dst == diag.q,
        };
        let style = if dashed { "dashed" } else { "solid" };
        let _ = writeln!(
            s,
            "  n{} -> n{} [label=\"{:?}\", style={}];",
            a.src, a.dst, a.items, style
        );
    }
    s.push_str("}\n");
    s
}
