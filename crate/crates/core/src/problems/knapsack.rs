//! Binary knapsack follower: DP solver, enumeration, sampling.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::ItemSet;
use crate::error::{Error, Result};

/// Tolerance for internal value comparisons.
pub(crate) const VAL_TOL: f64 = 1e-9;

/// Largest capacity the DP will allocate tables for.
const MAX_DP_CAPACITY: i64 = 20_000_000;

/// Knapsack follower data: positive integer weights, nonnegative capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackData {
    pub weights: Vec<i64>,
    pub capacity: i64,
}

impl KnapsackData {
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|&w| w <= 0) {
            return Err(Error::InvalidInstance("knapsack weights must be positive".into()));
        }
        if self.capacity < 0 {
            return Err(Error::InvalidInstance("knapsack capacity must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn weight_of(&self, x: &ItemSet) -> i64 {
        x.iter().map(|i| self.weights[i]).sum()
    }

    pub fn fits(&self, x: &ItemSet) -> bool {
        self.weight_of(x) <= self.capacity
    }
}

/// Lexicographic comparison: is (av, at) strictly better than (bv, bt)?
pub(crate) fn lex_better(av: f64, at: f64, bv: f64, bt: f64) -> bool {
    av > bv + VAL_TOL || (av >= bv - VAL_TOL && at > bt + VAL_TOL)
}

/// Exact best response for a knapsack follower.
///
/// Maximizes `profit . x` over all packings; ties in value (within tolerance)
/// are broken by maximizing `tiebreak . x`. The result is extended to an
/// inclusion-maximal packing whenever doing so cannot hurt either objective.
pub fn kpp_best_response(
    data: &KnapsackData,
    profit: &[f64],
    tiebreak: &[f64],
) -> Result<(ItemSet, f64)> {
    let n = data.weights.len();
    assert_eq!(profit.len(), n);
    assert_eq!(tiebreak.len(), n);
    if data.capacity > MAX_DP_CAPACITY {
        return Err(Error::InstanceTooLarge(format!(
            "knapsack capacity {} exceeds DP limit",
            data.capacity
        )));
    }
    let cap = data.capacity as usize;

    // dp holds the lexicographic optimum over items 0..k for each capacity.
    let mut val = vec![0.0f64; cap + 1];
    let mut tie = vec![0.0f64; cap + 1];
    let mut take = vec![vec![false; cap + 1]; n];
    for k in 0..n {
        let w = data.weights[k] as usize;
        if w > cap {
            continue;
        }
        // Descending capacity keeps the 0/1 semantics in-place.
        for c in (w..=cap).rev() {
            let cand_v = val[c - w] + profit[k];
            let cand_t = tie[c - w] + tiebreak[k];
            if lex_better(cand_v, cand_t, val[c], tie[c]) {
                val[c] = cand_v;
                tie[c] = cand_t;
                take[k][c] = true;
            }
        }
    }

    let mut x = ItemSet::new(n);
    let mut c = cap;
    for k in (0..n).rev() {
        if take[k][c] {
            x.insert(k);
            c -= data.weights[k] as usize;
        }
    }

    // Maximal extension: include any remaining item that fits and cannot
    // worsen the value or the tie objective.
    let mut slack = data.capacity - data.weight_of(&x);
    for i in 0..n {
        if !x.contains(i) && data.weights[i] <= slack && profit[i] >= -VAL_TOL && tiebreak[i] >= 0.0
        {
            x.insert(i);
            slack -= data.weights[i];
        }
    }

    let value = x.iter().map(|i| profit[i]).sum();
    Ok((x, value))
}

/// Plain profit-only DP value over a subset of items, used for bounds.
pub fn knapsack_best_value(data: &KnapsackData, profit: &[f64], allowed: &ItemSet) -> f64 {
    let cap = data.capacity as usize;
    let mut val = vec![0.0f64; cap + 1];
    for k in allowed.iter() {
        if profit[k] <= 0.0 {
            continue;
        }
        let w = data.weights[k] as usize;
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            let cand = val[c - w] + profit[k];
            if cand > val[c] {
                val[c] = cand;
            }
        }
    }
    val[cap]
}

/// Enumerates all inclusion-maximal packings.
pub fn enumerate_maximal(data: &KnapsackData, cap: usize) -> Result<Vec<ItemSet>> {
    let n = data.weights.len();
    if n > 24 {
        return Err(Error::InstanceTooLarge(format!(
            "knapsack enumeration over {n} items"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let mut weight = 0i64;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                weight += data.weights[i];
            }
        }
        if weight > data.capacity {
            continue;
        }
        let slack = data.capacity - weight;
        let maximal = (0..n).all(|i| mask >> i & 1 == 1 || data.weights[i] > slack);
        if maximal {
            let mut s = ItemSet::new(n);
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    s.insert(i);
                }
            }
            out.push(s);
            if out.len() > cap {
                return Err(Error::InstanceTooLarge(format!(
                    "more than {cap} maximal packings"
                )));
            }
        }
    }
    Ok(out)
}

/// Samples one maximal packing: greedy fill along a random item order.
pub fn sample_maximal(data: &KnapsackData, rng: &mut dyn Rng) -> ItemSet {
    let n = data.weights.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut x = ItemSet::new(n);
    let mut slack = data.capacity;
    for i in order {
        if data.weights[i] <= slack {
            x.insert(i);
            slack -= data.weights[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> KnapsackData {
        // Four items, one toll-free heavy item; capacity three.
        KnapsackData {
            weights: vec![1, 1, 1, 2],
            capacity: 3,
        }
    }

    #[test]
    fn best_response_zero_toll() {
        let (x, v) = kpp_best_response(&small(), &[1.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(x.items(), vec![0, 1, 2]);
        assert!((v - 3.0).abs() < 1e-9);
    }

    #[test]
    fn best_response_full_deterrence_prefers_tolled_ties() {
        // Profits all zero on tolled items; optimistic tiebreak keeps one.
        let profit = [0.0, 0.0, 0.0, 1.0];
        let tiebreak = [1.0, 1.0, 1.0, 0.0];
        let (x, v) = kpp_best_response(&small(), &profit, &tiebreak).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(x.contains(3));
        assert_eq!(x.count(), 2, "one zero-profit item joins the heavy item");
    }

    #[test]
    fn best_response_is_maximal_under_nonnegative_profits() {
        let data = KnapsackData {
            weights: vec![2, 3, 4, 5, 1],
            capacity: 7,
        };
        let profit = [0.0, 0.0, 4.0, 5.0, 0.0];
        let (x, _) = kpp_best_response(&data, &profit, &[0.0; 5]).unwrap();
        let slack = data.capacity - data.weight_of(&x);
        for i in 0..5 {
            assert!(x.contains(i) || data.weights[i] > slack);
        }
    }

    #[test]
    fn enumerate_maximal_small() {
        let sols = enumerate_maximal(&small(), 100).unwrap();
        let got: Vec<Vec<usize>> = sols.iter().map(|s| s.items()).collect();
        assert_eq!(got.len(), 4);
        assert!(got.contains(&vec![0, 1, 2]));
        assert!(got.contains(&vec![0, 3]));
        assert!(got.contains(&vec![1, 3]));
        assert!(got.contains(&vec![2, 3]));
    }

    #[test]
    fn dp_matches_enumeration_on_random_profits() {
        use rand::RngExt;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(3..=10);
            let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
            let capacity = rng.random_range(1..=weights.iter().sum::<i64>());
            let data = KnapsackData { weights, capacity };
            let profit: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            let tie: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let (_, v) = kpp_best_response(&data, &profit, &tie).unwrap();
            // Exhaustive reference over all packings.
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let mut w = 0i64;
                let mut val = 0.0;
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        w += data.weights[i];
                        val += profit[i];
                    }
                }
                if w <= data.capacity && val > best {
                    best = val;
                }
            }
            assert!((v - best).abs() < 1e-6, "dp {v} vs enum {best}");
        }
    }
}
