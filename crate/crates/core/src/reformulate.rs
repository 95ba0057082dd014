//! Single-level MILP masters for the bilevel pricing and interdiction
//! problems.
//!
//! The bilinear revenue t_i * x_i is linearized through McCormick variables
//! s_i with problem-specific big-M bounds. Follower rationality enters as
//! longest-path potential rows over a diagram: one row per arc, plus a
//! strong-duality row tying the selected solution's net value to the
//! initial node's potential. Arc rows for diagrams grown later are produced
//! by [`cut_from_arc`] against the same variable ids.

use crate::diagram::{Diagram, DiagramArc};
use crate::domain::{ItemSet, Payload, PricingInstance, Sense};
use crate::error::{Error, Result};
use crate::model::{Constraint, CutSpec, ModelSpec, RowSense, VarKind};
use crate::problems::set_cover::{min_cost_cover, SetCoverData};

/// Follower feasibility rows over the selection variables `x`.
pub fn primal_constraints(inst: &PricingInstance, x: &[usize]) -> Vec<Constraint> {
    match &inst.payload {
        Payload::Knapsack(d) => vec![Constraint::new(
            "knap",
            d.weights.iter().enumerate().map(|(i, &w)| (x[i], w as f64)).collect(),
            RowSense::Le,
            d.capacity as f64,
        )],
        Payload::Interdiction(d) => vec![Constraint::new(
            "knap",
            d.w.iter().enumerate().map(|(i, &w)| (x[i], w as f64)).collect(),
            RowSense::Le,
            d.c as f64,
        )],
        Payload::Graph(g) => g
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| {
                Constraint::new(
                    format!("edge{k}"),
                    vec![(x[u], 1.0), (x[v], 1.0)],
                    RowSense::Le,
                    1.0,
                )
            })
            .collect(),
        Payload::SetCover(d) => (0..d.n_elements)
            .map(|e| {
                let members: Vec<(usize, f64)> = d
                    .sets
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(e))
                    .map(|(i, _)| (x[i], 1.0))
                    .collect();
                Constraint::new(format!("cov{e}"), members, RowSense::Ge, 1.0)
            })
            .collect(),
    }
}

/// Big-M bounds on the linearized revenue terms, one entry per item
/// (zero at toll-free positions).
///
/// For a maximizing follower the toll can never usefully exceed the item's
/// value, so M_i = v_i. For the covering follower M_i caps the markup at
/// the point where the follower switches to a toll-free alternative:
/// M_i = max(0, min(P_i, Q_i)) with P_i the toll-free cover cost of set i's
/// elements minus v_i, and Q_i the all-toll-free cover cost of everything
/// minus the null-toll cover cost of the elements outside set i, minus v_i.
pub fn mccormick_bounds(inst: &PricingInstance) -> Result<Vec<f64>> {
    match &inst.payload {
        Payload::Knapsack(_) | Payload::Graph(_) => Ok((0..inst.n)
            .map(|i| if inst.tolled.contains(i) { inst.v_f64(i) } else { 0.0 })
            .collect()),
        Payload::SetCover(d) => minsc_bounds(inst, d),
        Payload::Interdiction(_) => Err(Error::InvalidConfig(
            "interdiction masters are linear in the binary tolls and use no envelope".into(),
        )),
    }
}

fn minsc_bounds(inst: &PricingInstance, d: &SetCoverData) -> Result<Vec<f64>> {
    // Integer numerators under the common denominator keep every cover
    // cost exact; one division at the end.
    let num: Vec<f64> = inst.v_num.iter().map(|&v| v as f64).collect();
    let den = inst.v_den as f64;
    let toll_free = inst.toll_free();
    let all = ItemSet::universe(inst.n);
    let universe = ItemSet::universe(d.n_elements);
    let f_inf_all = min_cost_cover(d, &num, &toll_free, &universe).map_err(|_| {
        Error::TollFreeCoverViolated("toll-free sets cannot cover the universe".into())
    })?;
    let mut m = vec![0.0; inst.n];
    for i in inst.tolled.iter() {
        let elems = &d.sets[i];
        let p = min_cost_cover(d, &num, &toll_free, elems).map_err(|_| {
            Error::TollFreeCoverViolated(format!(
                "toll-free sets cannot cover the elements of set {i}"
            ))
        })? - num[i];
        let q = f_inf_all - min_cost_cover(d, &num, &all, &universe.minus(elems))? - num[i];
        m[i] = (p.min(q) / den).max(0.0);
    }
    Ok(m)
}

/// Variable-id maps the solve loop needs to read candidates and append
/// arc rows. Kept apart from the model so the loop can mutate the row set
/// while reading the maps.
#[derive(Debug, Clone)]
pub struct MasterVars {
    /// Toll variable per item (None at toll-free positions).
    pub t_var: Vec<Option<usize>>,
    /// Selection variable per item.
    pub x_var: Vec<usize>,
    /// Linearization variable per item (None at toll-free positions and
    /// everywhere on interdiction masters).
    pub s_var: Vec<Option<usize>>,
    /// Potential variable per diagram node id.
    pub y_var: Vec<usize>,
    /// Big-M revenue bounds (empty on interdiction masters).
    pub m: Vec<f64>,
    pub follower_sense: Sense,
    pub interdiction: bool,
}

impl MasterVars {
    /// Extracts tolls from a dense solution vector.
    pub fn tolls(&self, values: &[f64]) -> Vec<f64> {
        self.t_var
            .iter()
            .map(|tv| tv.map_or(0.0, |j| values[j]))
            .collect()
    }

    /// Extracts the selected item set from a dense solution vector.
    pub fn selection(&self, values: &[f64]) -> ItemSet {
        let chosen: Vec<usize> = self
            .x_var
            .iter()
            .enumerate()
            .filter(|&(_, &j)| values[j] > 0.5)
            .map(|(i, _)| i)
            .collect();
        ItemSet::from_items(self.x_var.len(), &chosen)
    }
}

/// A built master: the model plus its variable maps.
#[derive(Debug, Clone)]
pub struct MasterModel {
    pub spec: ModelSpec,
    pub vars: MasterVars,
}

/// Arc row for the master owning the given variable maps.
///
/// Maximizing follower: y_u - y_w + sum t_i >= sum v_i over the arc's
/// items. Minimizing follower: y_u - y_w - sum t_i <= sum v_i.
/// Interdiction: the toll term is v_i t_i.
pub fn cut_from_arc(vars: &MasterVars, arc: &DiagramArc, inst: &PricingInstance) -> CutSpec {
    let mut coeffs = vec![(vars.y_var[arc.src], 1.0), (vars.y_var[arc.dst], -1.0)];
    let mut rhs = 0.0;
    let toll_sign = match inst.sense() {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    for i in arc.items.iter() {
        rhs += inst.v_f64(i);
        if let Some(tj) = vars.t_var[i] {
            let coeff = if vars.interdiction { inst.v_f64(i) } else { 1.0 };
            coeffs.push((tj, toll_sign * coeff));
        }
    }
    let sense = match inst.sense() {
        Sense::Maximize => RowSense::Ge,
        Sense::Minimize => RowSense::Le,
    };
    CutSpec {
        row: Constraint::new(format!("arc{}", arc.id), coeffs, sense, rhs),
        arc_id: arc.id,
        solution_id: None,
    }
}

/// Builds the pricing master over a diagram: maximize the linearized
/// revenue subject to follower feasibility, McCormick envelopes, arc
/// potential rows, and strong duality at the initial node.
pub fn build_master(inst: &PricingInstance, diag: &Diagram) -> Result<MasterModel> {
    if matches!(inst.payload, Payload::Interdiction(_)) {
        return Err(Error::InvalidConfig(
            "interdiction instances use the interdiction master".into(),
        ));
    }
    let m = mccormick_bounds(inst)?;
    let mut spec = ModelSpec::new("pricing-master", Sense::Maximize);
    let mut t_var = vec![None; inst.n];
    let mut s_var = vec![None; inst.n];
    let mut x_var = Vec::with_capacity(inst.n);
    for i in 0..inst.n {
        if inst.tolled.contains(i) {
            t_var[i] = Some(spec.add_var(VarKind::Toll(i), format!("t{i}"), 0.0, f64::INFINITY, false));
        }
    }
    for i in 0..inst.n {
        x_var.push(spec.add_var(VarKind::Selection(i), format!("x{i}"), 0.0, 1.0, true));
    }
    for i in 0..inst.n {
        if inst.tolled.contains(i) {
            s_var[i] = Some(spec.add_var(
                VarKind::McCormick(i),
                format!("s{i}"),
                0.0,
                f64::INFINITY,
                false,
            ));
        }
    }
    let y_var = add_potentials(&mut spec, diag);

    for row in primal_constraints(inst, &x_var) {
        spec.add_constraint(row);
    }
    for i in inst.tolled.iter() {
        let (t, s, x) = (t_var[i].unwrap(), s_var[i].unwrap(), x_var[i]);
        spec.add_constraint(Constraint::new(
            format!("mc_cap{i}"),
            vec![(s, 1.0), (x, -m[i])],
            RowSense::Le,
            0.0,
        ));
        spec.add_constraint(Constraint::new(
            format!("mc_lo{i}"),
            vec![(t, 1.0), (s, -1.0)],
            RowSense::Ge,
            0.0,
        ));
        spec.add_constraint(Constraint::new(
            format!("mc_hi{i}"),
            vec![(t, 1.0), (s, -1.0), (x, m[i])],
            RowSense::Le,
            m[i],
        ));
    }
    // Strong duality: the chosen solution's net value equals y_p.
    // Maximize: sum v_i x_i - sum s_i = y_p; minimize flips the s sign.
    let s_sign = match inst.sense() {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut duality: Vec<(usize, f64)> = (0..inst.n).map(|i| (x_var[i], inst.v_f64(i))).collect();
    for i in 0..inst.n {
        if let Some(s) = s_var[i] {
            duality.push((s, s_sign));
        }
    }
    duality.push((y_var[diag.p()], -1.0));
    spec.add_constraint(Constraint::new("duality", duality, RowSense::Eq, 0.0));

    spec.set_objective(s_var.iter().flatten().map(|&s| (s, 1.0)).collect());

    let mut master = MasterModel {
        spec,
        vars: MasterVars {
            t_var,
            x_var,
            s_var,
            y_var,
            m,
            follower_sense: inst.sense(),
            interdiction: false,
        },
    };
    for arc in diag.arcs() {
        let cut = cut_from_arc(&master.vars, arc, inst);
        master.spec.add_constraint(cut.row);
    }
    master.spec.validate()?;
    Ok(master)
}

/// Builds the interdiction master: minimize the follower's guaranteed
/// value y_p subject to the leader budget, follower feasibility, and arc
/// rows linear in the binary interdiction variables.
pub fn build_kip_master(inst: &PricingInstance, diag: &Diagram) -> Result<MasterModel> {
    let Payload::Interdiction(d) = &inst.payload else {
        return Err(Error::InvalidConfig(
            "pricing instances use the pricing master".into(),
        ));
    };
    let mut spec = ModelSpec::new("interdiction-master", Sense::Minimize);
    let mut t_var = vec![None; inst.n];
    let mut x_var = Vec::with_capacity(inst.n);
    for i in 0..inst.n {
        if inst.tolled.contains(i) {
            t_var[i] = Some(spec.add_var(VarKind::Toll(i), format!("t{i}"), 0.0, 1.0, true));
        }
    }
    for i in 0..inst.n {
        x_var.push(spec.add_var(VarKind::Selection(i), format!("x{i}"), 0.0, 1.0, true));
    }
    let y_var = add_potentials(&mut spec, diag);
    // The follower can always decline every item, so its value is
    // nonnegative; without this floor the initial master is unbounded.
    spec.set_bounds(y_var[diag.p()], 0.0, f64::INFINITY);

    spec.add_constraint(Constraint::new(
        "budget",
        (0..inst.n)
            .filter_map(|i| t_var[i].map(|tj| (tj, d.leader_w[i] as f64)))
            .collect(),
        RowSense::Le,
        d.leader_c as f64,
    ));
    for row in primal_constraints(inst, &x_var) {
        spec.add_constraint(row);
    }
    spec.set_objective(vec![(y_var[diag.p()], 1.0)]);

    let mut master = MasterModel {
        spec,
        vars: MasterVars {
            t_var,
            x_var,
            s_var: vec![None; inst.n],
            y_var,
            m: Vec::new(),
            follower_sense: inst.sense(),
            interdiction: true,
        },
    };
    for arc in diag.arcs() {
        let cut = cut_from_arc(&master.vars, arc, inst);
        master.spec.add_constraint(cut.row);
    }
    master.spec.validate()?;
    Ok(master)
}

fn add_potentials(spec: &mut ModelSpec, diag: &Diagram) -> Vec<usize> {
    diag.nodes()
        .iter()
        .map(|node| {
            let (lo, hi) = if node.id == diag.q() {
                (0.0, 0.0)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            spec.add_var(VarKind::Potential(node.id), format!("y{}", node.id), lo, hi, false)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{dd_full, sd_full, vf_init, NodeState};
    use crate::domain::TollVector;
    use crate::problems::{GraphData, KipData, KnapsackData};
    use rand::SeedableRng;
    use std::collections::BTreeSet;

    fn kpp_fixture() -> PricingInstance {
        PricingInstance::new(
            vec![1, 1, 1, 1],
            1,
            ItemSet::from_items(4, &[0, 1, 2]),
            Payload::Knapsack(KnapsackData {
                weights: vec![1, 1, 1, 2],
                capacity: 3,
            }),
        )
        .unwrap()
    }

    fn cover_instance(v: Vec<i64>, tolled: &[usize]) -> PricingInstance {
        let sets = vec![
            ItemSet::from_items(4, &[0, 1]),
            ItemSet::from_items(4, &[0, 2]),
            ItemSet::from_items(4, &[0, 3]),
            ItemSet::from_items(4, &[1, 2, 3]),
            ItemSet::from_items(4, &[2]),
        ];
        PricingInstance::new(
            v,
            1,
            ItemSet::from_items(5, tolled),
            Payload::SetCover(SetCoverData {
                n_elements: 4,
                sets,
                element_weights: vec![1; 4],
            }),
        )
        .unwrap()
    }

    /// Renders an arc row structurally: (src label, dst label, toll ids, rhs).
    fn arc_row_sig(master: &MasterModel, row: &Constraint) -> (String, String, Vec<usize>, i64) {
        let mut src = String::new();
        let mut dst = String::new();
        let mut tolls = Vec::new();
        for &(j, c) in &row.coeffs {
            match master.spec.var(j).kind {
                VarKind::Potential(node) if c > 0.0 => src = format!("y{node}"),
                VarKind::Potential(node) => dst = format!("y{node}"),
                VarKind::Toll(i) => tolls.push(i),
                _ => panic!("unexpected variable in arc row"),
            }
        }
        tolls.sort_unstable();
        assert_eq!(row.rhs, row.rhs.round());
        (src, dst, tolls, row.rhs as i64)
    }

    #[test]
    fn primal_rows_match_each_follower() {
        let kpp = kpp_fixture();
        let x: Vec<usize> = (0..4).collect();
        let rows = primal_constraints(&kpp, &x);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].coeffs, vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 2.0)]);
        assert_eq!(rows[0].sense, RowSense::Le);
        assert_eq!(rows[0].rhs, 3.0);

        let edgeless = PricingInstance::new(
            vec![1, 1],
            1,
            ItemSet::from_items(2, &[0]),
            Payload::Graph(GraphData::from_edges(2, &[]).unwrap()),
        )
        .unwrap();
        assert!(primal_constraints(&edgeless, &[0, 1]).is_empty());

        let cover = cover_instance(vec![3, 3, 3, 5, 2], &[0]);
        let rows = primal_constraints(&cover, &[0, 1, 2, 3, 4]);
        assert_eq!(rows.len(), 4);
        // element 0 belongs to sets 0, 1, 2
        assert_eq!(rows[0].coeffs, vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert_eq!(rows[0].sense, RowSense::Ge);
        // element 2 belongs to sets 1, 3, 4
        assert_eq!(rows[2].coeffs, vec![(1, 1.0), (3, 1.0), (4, 1.0)]);
    }

    #[test]
    fn value_bound_is_the_item_value_for_maximizers() {
        let m = mccormick_bounds(&kpp_fixture()).unwrap();
        assert_eq!(m, vec![1.0, 1.0, 1.0, 0.0]);

        let ring = PricingInstance::new(
            vec![4, 7],
            2,
            ItemSet::from_items(2, &[1]),
            Payload::Graph(GraphData::from_edges(2, &[(0, 1)]).unwrap()),
        )
        .unwrap();
        assert_eq!(mccormick_bounds(&ring).unwrap(), vec![0.0, 3.5]);
    }

    #[test]
    fn cover_bounds_cap_the_markup_at_the_switching_point() {
        // Tolled set 0 = {a,b} at cost 3: the cheapest toll-free cover of
        // {a,b} costs 8, but covering everything without set 0 also costs
        // 8 while the unrestricted cover of {c,d} costs 5, so Q wins at 0.
        let m = mccormick_bounds(&cover_instance(vec![3, 3, 3, 5, 2], &[0])).unwrap();
        assert_eq!(m, vec![0.0; 5]);

        // Two elements, tolled {a,b} at 2 against singles at 3 and 4: the
        // follower switches once the markup exceeds 5.
        let inst = PricingInstance::new(
            vec![2, 3, 4],
            1,
            ItemSet::from_items(3, &[0]),
            Payload::SetCover(SetCoverData {
                n_elements: 2,
                sets: vec![
                    ItemSet::from_items(2, &[0, 1]),
                    ItemSet::from_items(2, &[0]),
                    ItemSet::from_items(2, &[1]),
                ],
                element_weights: vec![1, 1],
            }),
        )
        .unwrap();
        assert_eq!(mccormick_bounds(&inst).unwrap(), vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn cover_bounds_require_a_toll_free_cover() {
        // Element b is only covered by the tolled set.
        let inst = PricingInstance::new(
            vec![2, 3],
            1,
            ItemSet::from_items(2, &[0]),
            Payload::SetCover(SetCoverData {
                n_elements: 2,
                sets: vec![ItemSet::from_items(2, &[0, 1]), ItemSet::from_items(2, &[0])],
                element_weights: vec![1, 1],
            }),
        )
        .unwrap();
        assert!(matches!(
            mccormick_bounds(&inst),
            Err(Error::TollFreeCoverViolated(_))
        ));
    }

    #[test]
    fn vf_master_has_no_arc_rows() {
        let inst = kpp_fixture();
        let master = build_master(&inst, &vf_init(&inst)).unwrap();
        // 1 knapsack + 9 McCormick + duality
        assert_eq!(master.spec.num_constraints(), 11);
        // 3 t + 4 x + 3 s + 2 y
        assert_eq!(master.spec.num_vars(), 12);
        let obj = master.spec.objective();
        assert_eq!(obj.sense, Sense::Maximize);
        assert_eq!(obj.coeffs.len(), 3);
        assert!(obj
            .coeffs
            .iter()
            .all(|&(j, c)| c == 1.0 && matches!(master.spec.var(j).kind, VarKind::McCormick(_))));
        let q = master.vars.y_var[1];
        assert_eq!(master.spec.var(q).lower, 0.0);
        assert_eq!(master.spec.var(q).upper, 0.0);
    }

    #[test]
    fn full_selection_master_freezes_the_worked_rows() {
        let inst = kpp_fixture();
        let diag = sd_full(&inst, 1000).unwrap();
        let master = build_master(&inst, &diag).unwrap();
        let arc_rows: Vec<&Constraint> = master
            .spec
            .constraints()
            .iter()
            .filter(|r| r.name.starts_with("arc"))
            .collect();
        assert_eq!(arc_rows.len(), 23);
        assert_eq!(master.spec.num_constraints(), 11 + 23);

        // Every row matches its arc: y_src - y_dst + tolled items >= value.
        let mut sigs = BTreeSet::new();
        for row in &arc_rows {
            assert_eq!(row.sense, RowSense::Ge);
            sigs.insert(arc_row_sig(&master, row));
        }
        let label = |items: &[usize]| {
            let id = diag
                .nodes()
                .iter()
                .find(|n| n.state == NodeState::Subset(ItemSet::from_items(4, items)))
                .unwrap()
                .id;
            format!("y{id}")
        };
        let yq = format!("y{}", diag.q());
        // the empty set buys item 3 toll-free: y_empty - y_{3} >= 1
        assert!(sigs.contains(&(label(&[]), label(&[3]), vec![], 1)));
        // tolled step: y_{1} - y_{1,2} + t2 >= 1
        assert!(sigs.contains(&(label(&[1]), label(&[1, 2]), vec![2], 1)));
        // terminal arcs carry no items: y_{0,1,2} - y_q >= 0
        assert!(sigs.contains(&(label(&[0, 1, 2]), yq.clone(), vec![], 0)));
        assert!(sigs.contains(&(label(&[2, 3]), yq, vec![], 0)));
    }

    #[test]
    fn full_decision_master_freezes_the_worked_rows() {
        let inst = kpp_fixture();
        let diag = dd_full(&inst, None, 1000).unwrap();
        let master = build_master(&inst, &diag).unwrap();
        let arc_rows: Vec<&Constraint> = master
            .spec
            .constraints()
            .iter()
            .filter(|r| r.name.starts_with("arc"))
            .collect();
        assert_eq!(arc_rows.len(), 14);

        let mut sigs = BTreeSet::new();
        for row in &arc_rows {
            sigs.insert(arc_row_sig(&master, row));
        }
        let label = |layer: usize, cap: i64| {
            let id = diag
                .layer(layer)
                .iter()
                .copied()
                .find(|&id| diag.node(id).state == NodeState::Capacity(cap))
                .unwrap();
            format!("y{id}")
        };
        let yq = format!("y{}", diag.q());
        // take item 0: y_{0,3} - y_{1,2} + t0 >= 1
        assert!(sigs.contains(&(label(0, 3), label(1, 2), vec![0], 1)));
        // skip into layer 1: y_{0,3} - y_{1,3} >= 0
        assert!(sigs.contains(&(label(0, 3), label(1, 3), vec![], 0)));
        // last layer: capacity 2 buys toll-free item 3, others skip out
        assert!(sigs.contains(&(label(3, 2), yq.clone(), vec![], 1)));
        assert!(sigs.contains(&(label(3, 0), yq.clone(), vec![], 0)));
        assert!(sigs.contains(&(label(3, 1), yq, vec![], 0)));
    }

    #[test]
    fn duality_row_ties_net_value_to_the_source_potential() {
        let inst = kpp_fixture();
        let master = build_master(&inst, &vf_init(&inst)).unwrap();
        let row = master
            .spec
            .constraints()
            .iter()
            .find(|r| r.name == "duality")
            .unwrap();
        assert_eq!(row.sense, RowSense::Eq);
        assert_eq!(row.rhs, 0.0);
        let mut x_coeffs = 0;
        for &(j, c) in &row.coeffs {
            match master.spec.var(j).kind {
                VarKind::Selection(i) => {
                    assert_eq!(c, inst.v_f64(i));
                    x_coeffs += 1;
                }
                VarKind::McCormick(_) => assert_eq!(c, -1.0),
                VarKind::Potential(0) => assert_eq!(c, -1.0),
                k => panic!("unexpected {k:?} in duality row"),
            }
        }
        assert_eq!(x_coeffs, 4);

        // Minimizing follower: the linearized toll adds to the cost.
        let cover = cover_instance(vec![3, 3, 3, 5, 2], &[0]);
        let master = build_master(&cover, &vf_init(&cover)).unwrap();
        let row = master
            .spec
            .constraints()
            .iter()
            .find(|r| r.name == "duality")
            .unwrap();
        let s_coeff = row
            .coeffs
            .iter()
            .find(|&&(j, _)| matches!(master.spec.var(j).kind, VarKind::McCormick(_)))
            .unwrap()
            .1;
        assert_eq!(s_coeff, 1.0);
    }

    #[test]
    fn cover_master_flips_the_arc_sense() {
        let cover = cover_instance(vec![3, 3, 3, 5, 2], &[0]);
        let diag = dd_full(&cover, None, 10_000).unwrap();
        let master = build_master(&cover, &diag).unwrap();
        for row in master.spec.constraints().iter().filter(|r| r.name.starts_with("arc")) {
            assert_eq!(row.sense, RowSense::Le);
        }
        // A tolled arc row reads y_u - y_w - t0 <= v_0.
        let tolled_row = master
            .spec
            .constraints()
            .iter()
            .find(|r| {
                r.name.starts_with("arc")
                    && r.coeffs
                        .iter()
                        .any(|&(j, _)| matches!(master.spec.var(j).kind, VarKind::Toll(0)))
            })
            .unwrap();
        let t_coeff = tolled_row
            .coeffs
            .iter()
            .find(|&&(j, _)| matches!(master.spec.var(j).kind, VarKind::Toll(0)))
            .unwrap()
            .1;
        assert_eq!(t_coeff, -1.0);
    }

    #[test]
    fn interdiction_master_is_binary_and_linear() {
        let inst = PricingInstance::new(
            vec![5, 4, 3],
            1,
            ItemSet::universe(3),
            Payload::Interdiction(KipData {
                w: vec![2, 3, 1],
                c: 4,
                leader_w: vec![1, 1, 1],
                leader_c: 1,
            }),
        )
        .unwrap();
        let master = build_kip_master(&inst, &vf_init(&inst)).unwrap();
        assert_eq!(master.spec.objective().sense, Sense::Minimize);
        assert_eq!(master.spec.objective().coeffs, vec![(master.vars.y_var[0], 1.0)]);
        assert!(master.vars.s_var.iter().all(Option::is_none));
        for i in 0..3 {
            assert!(master.spec.var(master.vars.t_var[i].unwrap()).integer);
            assert!(master.spec.var(master.vars.x_var[i]).integer);
        }
        // y_p floored at zero, y_q fixed.
        assert_eq!(master.spec.var(master.vars.y_var[0]).lower, 0.0);
        assert_eq!(master.spec.var(master.vars.y_var[1]).upper, 0.0);
        let budget = master
            .spec
            .constraints()
            .iter()
            .find(|r| r.name == "budget")
            .unwrap();
        assert_eq!(budget.rhs, 1.0);
        let knap = master
            .spec
            .constraints()
            .iter()
            .find(|r| r.name == "knap")
            .unwrap();
        assert_eq!(knap.coeffs.len(), 3);
        assert!(!master.spec.constraints().iter().any(|r| r.name == "duality"));

        // One arc p -> q with all items: y_p >= sum v_i (1 - t_i).
        let mut diag = vf_init(&inst);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (aid, _) = crate::diagram::sd_add_solution(&mut diag, &ItemSet::universe(3), &mut rng);
        let cut = cut_from_arc(&master.vars, diag.arc(aid), &inst);
        assert_eq!(cut.row.sense, RowSense::Ge);
        assert_eq!(cut.row.rhs, 12.0);
        for &(j, c) in &cut.row.coeffs {
            match master.spec.var(j).kind {
                VarKind::Toll(i) => assert_eq!(c, inst.v_f64(i)),
                VarKind::Potential(0) => assert_eq!(c, 1.0),
                VarKind::Potential(1) => assert_eq!(c, -1.0),
                k => panic!("unexpected {k:?}"),
            }
        }
        assert_eq!(cut.arc_id, aid);
    }

    #[test]
    fn mccormick_rows_pin_s_at_binary_selections() {
        let inst = kpp_fixture();
        let master = build_master(&inst, &vf_init(&inst)).unwrap();
        let mut values = vec![0.0; master.spec.num_vars()];
        // x0 = 1, t0 = 0.6: the envelope admits s0 = t0 and nothing more.
        values[master.vars.x_var[0]] = 1.0;
        values[master.vars.t_var[0].unwrap()] = 0.6;
        values[master.vars.s_var[0].unwrap()] = 0.6;
        let mc: Vec<&Constraint> = master
            .spec
            .constraints()
            .iter()
            .filter(|r| r.name.starts_with("mc_") && r.name.ends_with('0'))
            .collect();
        assert_eq!(mc.len(), 3);
        assert!(mc.iter().all(|r| r.violation(&values) <= 0.0));
        values[master.vars.s_var[0].unwrap()] = 0.7;
        assert!(mc.iter().any(|r| r.violation(&values) > 0.0));
        // x0 = 0 forces s0 to zero and t0 <= M.
        values[master.vars.x_var[0]] = 0.0;
        values[master.vars.s_var[0].unwrap()] = 0.1;
        assert!(mc.iter().any(|r| r.violation(&values) > 0.0));
        values[master.vars.s_var[0].unwrap()] = 0.0;
        values[master.vars.t_var[0].unwrap()] = 1.4;
        assert!(mc.iter().any(|r| r.violation(&values) > 0.0));
    }

    #[test]
    fn candidate_extraction_reads_the_variable_maps() {
        let inst = kpp_fixture();
        let master = build_master(&inst, &vf_init(&inst)).unwrap();
        let mut values = vec![0.0; master.spec.num_vars()];
        values[master.vars.t_var[1].unwrap()] = 0.5;
        values[master.vars.x_var[1]] = 1.0;
        values[master.vars.x_var[3]] = 0.9;
        assert_eq!(master.vars.tolls(&values), vec![0.0, 0.5, 0.0, 0.0]);
        assert_eq!(master.vars.selection(&values), ItemSet::from_items(4, &[1, 3]));
        let t = TollVector::new(master.vars.tolls(&values), &inst.tolled).unwrap();
        assert_eq!(t.as_slice()[1], 0.5);
    }
}
