//! Minimum-cost set cover follower: branch and bound, enumeration, sampling.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::ItemSet;
use crate::error::{Error, Result};

use super::knapsack::VAL_TOL;

/// Set-cover follower data. `sets[i]` is the element subset covered by item i;
/// `element_weights` are the generator's per-element weights, kept for
/// round-tripping instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverData {
    pub n_elements: usize,
    pub sets: Vec<ItemSet>,
    pub element_weights: Vec<i64>,
}

impl SetCoverData {
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.sets.iter().enumerate() {
            if s.capacity() != self.n_elements {
                return Err(Error::InvalidInstance(format!("set {i} capacity mismatch")));
            }
        }
        if self.element_weights.len() != self.n_elements {
            return Err(Error::InvalidInstance("element weight length mismatch".into()));
        }
        if self.element_weights.iter().any(|&w| w < 0) {
            return Err(Error::InvalidInstance("element weights must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn universe(&self) -> ItemSet {
        ItemSet::universe(self.n_elements)
    }

    pub fn covered_by(&self, x: &ItemSet) -> ItemSet {
        let mut cov = ItemSet::new(self.n_elements);
        for i in x.iter() {
            cov = cov.union(&self.sets[i]);
        }
        cov
    }

    pub fn is_cover(&self, x: &ItemSet) -> bool {
        self.universe().is_subset(&self.covered_by(x))
    }
}

/// Is (a_cost, a_tie) strictly better than (b_cost, b_tie) for a minimizer
/// that breaks cost ties by larger tie value?
fn lex_better_min(a_cost: f64, a_tie: f64, b_cost: f64, b_tie: f64) -> bool {
    a_cost < b_cost - VAL_TOL || (a_cost <= b_cost + VAL_TOL && a_tie > b_tie + VAL_TOL)
}

struct ScSearch<'a> {
    data: &'a SetCoverData,
    cost: &'a [f64],
    tiebreak: &'a [f64],
    allowed: &'a ItemSet,
    /// (cost, tie, cover); cost is +inf until the first cover is found.
    best: (f64, f64, ItemSet),
}

impl ScSearch<'_> {
    /// Distributes each uncovered element's cheapest per-element coverage rate;
    /// a valid lower bound on the remaining cost.
    fn remaining_lb(&self, uncovered: &ItemSet) -> Option<f64> {
        let mut lb = 0.0;
        for e in uncovered.iter() {
            let mut best = f64::INFINITY;
            for i in self.allowed.iter() {
                if self.data.sets[i].contains(e) {
                    let overlap = self.data.sets[i].intersect(uncovered).count();
                    let rate = self.cost[i] / overlap as f64;
                    if rate < best {
                        best = rate;
                    }
                }
            }
            if best.is_infinite() {
                return None;
            }
            lb += best;
        }
        Some(lb)
    }

    fn run(&mut self, chosen: &mut ItemSet, cur_cost: f64, cur_tie: f64, uncovered: ItemSet) {
        if uncovered.is_empty() {
            if lex_better_min(cur_cost, cur_tie, self.best.0, self.best.1) {
                self.best = (cur_cost, cur_tie, chosen.clone());
            }
            return;
        }
        let Some(lb) = self.remaining_lb(&uncovered) else {
            return;
        };
        let mut ub_tie = cur_tie;
        for i in self.allowed.iter() {
            if !chosen.contains(i) && self.tiebreak[i] > 0.0 {
                ub_tie += self.tiebreak[i];
            }
        }
        let can_improve_cost = cur_cost + lb < self.best.0 - VAL_TOL;
        let can_improve_tie =
            cur_cost + lb <= self.best.0 + VAL_TOL && ub_tie > self.best.1 + VAL_TOL;
        if !can_improve_cost && !can_improve_tie {
            return;
        }
        // Branch on the uncovered element with fewest covering sets.
        let mut pick = usize::MAX;
        let mut pick_count = usize::MAX;
        for e in uncovered.iter() {
            let count = self
                .allowed
                .iter()
                .filter(|&i| self.data.sets[i].contains(e))
                .count();
            if count < pick_count {
                pick = e;
                pick_count = count;
            }
        }
        for i in self.allowed.iter() {
            if chosen.contains(i) || !self.data.sets[i].contains(pick) {
                continue;
            }
            chosen.insert(i);
            let next = uncovered.minus(&self.data.sets[i]);
            self.run(
                chosen,
                cur_cost + self.cost[i],
                cur_tie + self.tiebreak[i],
                next,
            );
            chosen.remove(i);
        }
    }
}

/// Exact best response for a set-cover follower.
///
/// Minimizes `cost . x` over covers; cost ties (within tolerance) are broken
/// by maximizing `tiebreak . x`. The output is pruned to a minimal cover by
/// dropping redundant zero-cost sets.
pub fn minsc_best_response(
    data: &SetCoverData,
    cost: &[f64],
    tiebreak: &[f64],
) -> Result<(ItemSet, f64)> {
    let n = data.sets.len();
    assert_eq!(cost.len(), n);
    assert_eq!(tiebreak.len(), n);
    let allowed = ItemSet::universe(n);
    let x = min_cover_search(data, cost, tiebreak, &allowed, &data.universe())?;
    let x = prune_to_minimal(data, cost, x);
    let value = x.iter().map(|i| cost[i]).sum();
    Ok((x, value))
}

fn min_cover_search(
    data: &SetCoverData,
    cost: &[f64],
    tiebreak: &[f64],
    allowed: &ItemSet,
    universe: &ItemSet,
) -> Result<ItemSet> {
    let n = data.sets.len();
    let mut reachable = ItemSet::new(data.n_elements);
    for i in allowed.iter() {
        reachable = reachable.union(&data.sets[i]);
    }
    if !universe.is_subset(&reachable) {
        return Err(Error::FollowerInfeasible(
            "available sets cannot cover the required elements".into(),
        ));
    }
    let mut search = ScSearch {
        data,
        cost,
        tiebreak,
        allowed,
        best: (f64::INFINITY, 0.0, ItemSet::new(n)),
    };
    let mut chosen = ItemSet::new(n);
    search.run(&mut chosen, 0.0, 0.0, universe.clone());
    Ok(search.best.2)
}

fn prune_to_minimal(data: &SetCoverData, cost: &[f64], mut x: ItemSet) -> ItemSet {
    loop {
        let mut removed = false;
        for i in x.items() {
            if cost[i] > 10.0 * VAL_TOL {
                continue;
            }
            let mut without = x.clone();
            without.remove(i);
            if data.is_cover(&without) {
                x = without;
                removed = true;
                break;
            }
        }
        if !removed {
            return x;
        }
    }
}

/// Minimum cost to cover `universe` using only `allowed` sets.
pub fn min_cost_cover(
    data: &SetCoverData,
    cost: &[f64],
    allowed: &ItemSet,
    universe: &ItemSet,
) -> Result<f64> {
    let zeros = vec![0.0; data.sets.len()];
    let x = min_cover_search(data, cost, &zeros, allowed, universe)?;
    Ok(x.iter().map(|i| cost[i]).sum())
}

/// Enumerates all inclusion-minimal covers.
pub fn enumerate_minimal(data: &SetCoverData, cap: usize) -> Result<Vec<ItemSet>> {
    let n = data.sets.len();
    if n > 24 {
        return Err(Error::InstanceTooLarge(format!(
            "cover enumeration over {n} sets"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let mut x = ItemSet::new(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                x.insert(i);
            }
        }
        if !data.is_cover(&x) {
            continue;
        }
        let minimal = x.items().iter().all(|&i| {
            let mut without = x.clone();
            without.remove(i);
            !data.is_cover(&without)
        });
        if minimal {
            out.push(x);
            if out.len() > cap {
                return Err(Error::InstanceTooLarge(format!(
                    "more than {cap} minimal covers"
                )));
            }
        }
    }
    Ok(out)
}

/// Samples one minimal cover: random greedy sweep plus a prune pass.
pub fn sample_minimal(data: &SetCoverData, rng: &mut dyn Rng) -> Result<ItemSet> {
    let n = data.sets.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut x = ItemSet::new(n);
    let mut covered = ItemSet::new(data.n_elements);
    for &i in &order {
        if !data.sets[i].is_subset(&covered) {
            x.insert(i);
            covered = covered.union(&data.sets[i]);
        }
        if covered.count() == data.n_elements {
            break;
        }
    }
    if covered.count() != data.n_elements {
        return Err(Error::FollowerInfeasible("sets do not cover the universe".into()));
    }
    for &i in &order {
        if x.contains(i) {
            let mut without = x.clone();
            without.remove(i);
            if data.is_cover(&without) {
                x = without;
            }
        }
    }
    Ok(x)
}
