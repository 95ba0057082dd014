//! Maximum-weight stable set follower: branch and bound, enumeration, sampling.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::ItemSet;
use crate::error::{Error, Result};

use super::knapsack::{lex_better, VAL_TOL};

/// Undirected graph follower data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphData {
    pub n: usize,
    /// Open neighborhoods, one bitset per vertex.
    pub adj: Vec<ItemSet>,
}

impl GraphData {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![ItemSet::new(n); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidInstance(format!("bad edge ({u},{v})")));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        Ok(GraphData { n, adj })
    }

    pub fn validate(&self) -> Result<()> {
        if self.adj.len() != self.n {
            return Err(Error::InvalidInstance("adjacency length mismatch".into()));
        }
        for (u, nbrs) in self.adj.iter().enumerate() {
            if nbrs.capacity() != self.n || nbrs.contains(u) {
                return Err(Error::InvalidInstance(format!("bad adjacency row {u}")));
            }
            for v in nbrs.iter() {
                if !self.adj[v].contains(u) {
                    return Err(Error::InvalidInstance(format!("asymmetric edge ({u},{v})")));
                }
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.adj[u].iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    /// Closed neighborhood N[v].
    pub fn closed_neighborhood(&self, v: usize) -> ItemSet {
        let mut s = self.adj[v].clone();
        s.insert(v);
        s
    }

    /// Union of closed neighborhoods over a set of vertices.
    pub fn closed_neighborhood_of_set(&self, s: &ItemSet) -> ItemSet {
        let mut out = s.clone();
        for v in s.iter() {
            out = out.union(&self.adj[v]);
        }
        out
    }

    pub fn is_stable(&self, x: &ItemSet) -> bool {
        x.iter().all(|u| self.adj[u].is_disjoint(x))
    }
}

struct SsSearch<'a> {
    data: &'a GraphData,
    profit: &'a [f64],
    tiebreak: &'a [f64],
    best: (f64, f64, ItemSet),
}

impl SsSearch<'_> {
    fn run(&mut self, current: &mut ItemSet, cur_v: f64, cur_t: f64, avail: ItemSet) {
        // Optimistic bounds ignore adjacency among the available vertices.
        let mut ub_v = cur_v;
        let mut ub_t = cur_t;
        for i in avail.iter() {
            if self.profit[i] > 0.0 {
                ub_v += self.profit[i];
            }
            if self.tiebreak[i] > 0.0 {
                ub_t += self.tiebreak[i];
            }
        }
        if !lex_better(ub_v, ub_t, self.best.0, self.best.1) {
            return;
        }
        // Branch on the available vertex of highest degree, index as tie-break.
        let pick = avail
            .iter()
            .max_by_key(|&v| (self.data.degree(v), std::cmp::Reverse(v)));
        let Some(v) = pick else {
            if lex_better(cur_v, cur_t, self.best.0, self.best.1) {
                self.best = (cur_v, cur_t, current.clone());
            }
            return;
        };
        // Include v.
        let mut next = avail.minus(&self.data.closed_neighborhood(v));
        current.insert(v);
        self.run(current, cur_v + self.profit[v], cur_t + self.tiebreak[v], next);
        current.remove(v);
        // Exclude v.
        next = avail.clone();
        next.remove(v);
        self.run(current, cur_v, cur_t, next);
    }
}

/// Exact best response for a stable-set follower.
///
/// Maximizes `profit . x` over stable sets, ties broken by `tiebreak . x`,
/// then extends the winner to an inclusion-maximal stable set when harmless.
pub fn maxss_best_response(
    data: &GraphData,
    profit: &[f64],
    tiebreak: &[f64],
) -> Result<(ItemSet, f64)> {
    let n = data.n;
    assert_eq!(profit.len(), n);
    assert_eq!(tiebreak.len(), n);
    // Vertices with clearly negative profit never help either objective stage.
    let mut avail = ItemSet::new(n);
    for i in 0..n {
        if profit[i] >= -VAL_TOL {
            avail.insert(i);
        }
    }
    let mut search = SsSearch {
        data,
        profit,
        tiebreak,
        best: (0.0, 0.0, ItemSet::new(n)),
    };
    let mut current = ItemSet::new(n);
    search.run(&mut current, 0.0, 0.0, avail);
    let mut x = search.best.2;

    let blocked = data.closed_neighborhood_of_set(&x);
    for i in 0..n {
        if !blocked.contains(i) && profit[i] >= -VAL_TOL && tiebreak[i] >= 0.0 {
            if data.adj[i].is_disjoint(&x) {
                x.insert(i);
            }
        }
    }
    let value = x.iter().map(|i| profit[i]).sum();
    Ok((x, value))
}

/// Profit-only optimum restricted to an allowed vertex set.
pub fn stable_best_value(data: &GraphData, profit: &[f64], allowed: &ItemSet) -> f64 {
    let zeros = vec![0.0; data.n];
    let mut avail = ItemSet::new(data.n);
    for i in allowed.iter() {
        if profit[i] > 0.0 {
            avail.insert(i);
        }
    }
    let mut search = SsSearch {
        data,
        profit,
        tiebreak: &zeros,
        best: (0.0, 0.0, ItemSet::new(data.n)),
    };
    let mut current = ItemSet::new(data.n);
    search.run(&mut current, 0.0, 0.0, avail);
    search.best.0
}

/// Enumerates all inclusion-maximal stable sets.
pub fn enumerate_maximal(data: &GraphData, cap: usize) -> Result<Vec<ItemSet>> {
    let n = data.n;
    if n > 24 {
        return Err(Error::InstanceTooLarge(format!(
            "stable-set enumeration over {n} vertices"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let mut s = ItemSet::new(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                s.insert(i);
            }
        }
        if !data.is_stable(&s) {
            continue;
        }
        let maximal = (0..n).all(|v| s.contains(v) || !data.adj[v].is_disjoint(&s));
        if maximal {
            out.push(s);
            if out.len() > cap {
                return Err(Error::InstanceTooLarge(format!(
                    "more than {cap} maximal stable sets"
                )));
            }
        }
    }
    Ok(out)
}

/// Samples one maximal stable set: greedy along a random vertex order.
pub fn sample_maximal(data: &GraphData, rng: &mut dyn Rng) -> ItemSet {
    let mut order: Vec<usize> = (0..data.n).collect();
    order.shuffle(rng);
    let mut x = ItemSet::new(data.n);
    for v in order {
        if data.adj[v].is_disjoint(&x) {
            x.insert(v);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Five-cycle with one chord (2-4 in 1-based labels).
    fn ring() -> GraphData {
        GraphData::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap()
    }

    #[test]
    fn unit_profit_optimum_has_size_two() {
        let (x, v) = maxss_best_response(&ring(), &[1.0; 5], &[0.0; 5]).unwrap();
        assert_eq!(x.count(), 2);
        assert!((v - 2.0).abs() < 1e-9);
        assert!(ring().is_stable(&x));
    }

    #[test]
    fn complete_graph_picks_best_vertex() {
        let g = GraphData::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let (x, v) = maxss_best_response(&g, &[3.0, 1.0, 2.0], &[0.0; 3]).unwrap();
        assert_eq!(x.items(), vec![0]);
        assert!((v - 3.0).abs() < 1e-9);
    }

    #[test]
    fn maximal_enumeration_on_ring() {
        let sols = enumerate_maximal(&ring(), 100).unwrap();
        for s in &sols {
            assert!(ring().is_stable(s));
        }
        let got: Vec<Vec<usize>> = sols.iter().map(|s| s.items()).collect();
        // Size-2 maximal stable sets of the chorded 5-cycle.
        assert!(got.contains(&vec![0, 2]));
        assert!(got.contains(&vec![0, 3]));
        assert!(got.contains(&vec![1, 4]));
        assert!(got.contains(&vec![2, 4]));
    }

    #[test]
    fn bnb_matches_enumeration_on_random_graphs() {
        use rand::RngExt;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.random_range(3..=9);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random_range(0.0..1.0) < 0.4 {
                        edges.push((u, v));
                    }
                }
            }
            let data = GraphData::from_edges(n, &edges).unwrap();
            let profit: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            let (_, v) = maxss_best_response(&data, &profit, &vec![0.0; n]).unwrap();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let mut s = ItemSet::new(n);
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        s.insert(i);
                    }
                }
                if data.is_stable(&s) {
                    let val = s.iter().map(|i| profit[i]).sum();
                    if val > best {
                        best = val;
                    }
                }
            }
            assert!((v - best).abs() < 1e-6);
        }
    }
}
