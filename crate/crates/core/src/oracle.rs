//! Brute-force bilevel oracles used as ground truth.
//!
//! Everything here works by enumeration plus exact rational arithmetic, so it
//! is slow but trustworthy: candidate responses are enumerated outright and
//! the best tolls for each candidate come from a tiny exact-arithmetic LP.
//! Nothing in this module touches the diagram or MILP machinery it is used to
//! check.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::domain::{
    FollowerSolution, ItemSet, Payload, PricingInstance, Sense, SolveResult, SolveStats,
    SolveStatus, TollVector,
};
use crate::error::{Error, Result};

/// Items beyond this are too many for subset enumeration.
const MAX_ENUM_ITEMS: usize = 20;

fn rat_i64(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn rat_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite toll")
}

fn value_rat(inst: &PricingInstance, x: &ItemSet) -> BigRational {
    x.iter().map(|i| inst.v_rat(i)).sum()
}

/// Exact net follower values v_i - sign * coeff_i * t_i.
fn net_rat(inst: &PricingInstance, t: &TollVector) -> Vec<BigRational> {
    let sign = match inst.sense() {
        Sense::Maximize => BigRational::one(),
        Sense::Minimize => -BigRational::one(),
    };
    (0..inst.n)
        .map(|i| {
            let coeff = match &inst.payload {
                Payload::Interdiction(_) => inst.v_rat(i),
                _ => BigRational::one(),
            };
            inst.v_rat(i) - &sign * coeff * rat_f64(t.get(i))
        })
        .collect()
}

/// Exact optimistic follower response by full enumeration.
///
/// Scans every feasible solution, maximizes (or minimizes) the exact net
/// value, and breaks exact value ties by maximizing toll revenue.
/// Returns (response, follower value, leader revenue).
pub fn optimistic_best_response(
    inst: &PricingInstance,
    t: &TollVector,
) -> Result<(FollowerSolution, BigRational, BigRational)> {
    if inst.n > MAX_ENUM_ITEMS {
        return Err(Error::InstanceTooLarge(format!(
            "{} items is too many for subset enumeration",
            inst.n
        )));
    }
    let follower = inst.follower();
    let sense = inst.sense();
    let net = net_rat(inst, t);
    let t_rat: Vec<BigRational> = (0..inst.n).map(|i| rat_f64(t.get(i))).collect();

    let mut best: Option<(ItemSet, BigRational, BigRational)> = None;
    for mask in 0u32..(1u32 << inst.n) {
        let mut x = ItemSet::new(inst.n);
        for i in 0..inst.n {
            if mask >> i & 1 == 1 {
                x.insert(i);
            }
        }
        if !follower.is_feasible(&x) {
            continue;
        }
        let value: BigRational = x.iter().map(|i| net[i].clone()).sum();
        let revenue: BigRational = x.iter().map(|i| t_rat[i].clone()).sum();
        let better = match &best {
            None => true,
            Some((_, bv, br)) => match sense {
                Sense::Maximize => value > *bv || (value == *bv && revenue > *br),
                Sense::Minimize => value < *bv || (value == *bv && revenue > *br),
            },
        };
        if better {
            best = Some((x, value, revenue));
        }
    }
    match best {
        Some((x, value, revenue)) => Ok((FollowerSolution(x), value, revenue)),
        None => Err(Error::FollowerInfeasible(
            "no feasible follower solution".into(),
        )),
    }
}

/// Maximizes sum(t) subject to unit-coefficient rows sum_{i in S} t_i <= b
/// and box bounds 0 <= t_i <= ub_i, exactly.
///
/// Dense rational simplex with Bland's rule; every rhs must be nonnegative so
/// the slack basis starts feasible.
fn solve_unit_lp(
    num_vars: usize,
    rows: &[(Vec<usize>, BigRational)],
    ub: &[BigRational],
) -> (BigRational, Vec<BigRational>) {
    if num_vars == 0 {
        return (BigRational::zero(), Vec::new());
    }
    let zero = BigRational::zero();
    let num_rows = rows.len() + num_vars;
    let num_cols = num_vars + num_rows + 1;
    let rhs_col = num_cols - 1;

    let mut tab = vec![vec![zero.clone(); num_cols]; num_rows];
    for (r, (support, b)) in rows.iter().enumerate() {
        for &j in support {
            tab[r][j] = BigRational::one();
        }
        tab[r][num_vars + r] = BigRational::one();
        tab[r][rhs_col] = b.clone();
        debug_assert!(!b.is_negative());
    }
    for (k, bound) in ub.iter().enumerate() {
        let r = rows.len() + k;
        tab[r][k] = BigRational::one();
        tab[r][num_vars + r] = BigRational::one();
        tab[r][rhs_col] = if bound.is_negative() { zero.clone() } else { bound.clone() };
    }
    let mut basis: Vec<usize> = (0..num_rows).map(|r| num_vars + r).collect();
    // Reduced-cost row; rhs cell holds minus the objective value.
    let mut cost = vec![zero.clone(); num_cols];
    for c in cost.iter_mut().take(num_vars) {
        *c = BigRational::one();
    }

    loop {
        let Some(enter) = (0..num_cols - 1).find(|&j| cost[j].is_positive()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = zero.clone();
        for r in 0..num_rows {
            if !tab[r][enter].is_positive() {
                continue;
            }
            let ratio = &tab[r][rhs_col] / &tab[r][enter];
            let replace = match leave {
                None => true,
                Some(lr) => ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[lr]),
            };
            if replace {
                leave = Some(r);
                best_ratio = ratio;
            }
        }
        let leave = leave.expect("box-bounded LP cannot be unbounded");
        let pivot = tab[leave][enter].clone();
        for c in 0..num_cols {
            tab[leave][c] = &tab[leave][c] / &pivot;
        }
        for r in 0..num_rows {
            if r != leave && !tab[r][enter].is_zero() {
                let factor = tab[r][enter].clone();
                for c in 0..num_cols {
                    let delta = &factor * &tab[leave][c];
                    tab[r][c] = &tab[r][c] - delta;
                }
            }
        }
        if !cost[enter].is_zero() {
            let factor = cost[enter].clone();
            for c in 0..num_cols {
                let delta = &factor * &tab[leave][c];
                cost[c] = &cost[c] - delta;
            }
        }
        basis[leave] = enter;
    }

    let mut t = vec![zero.clone(); num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < num_vars {
            t[b] = tab[r][rhs_col].clone();
        }
    }
    (-cost[rhs_col].clone(), t)
}

/// Per-candidate toll rows: best (support, rhs) pairs keyed by support.
struct RowPool {
    rows: HashMap<Vec<usize>, BigRational>,
    dominated: bool,
}

impl RowPool {
    fn new() -> Self {
        RowPool {
            rows: HashMap::new(),
            dominated: false,
        }
    }

    fn add(&mut self, support: Vec<usize>, rhs: BigRational) {
        if rhs.is_negative() {
            // t >= 0 can never satisfy the row, so the candidate is dominated
            // outright (an empty support just states rhs >= 0).
            self.dominated = true;
            return;
        }
        if support.is_empty() {
            return;
        }
        match self.rows.get_mut(&support) {
            Some(b) => {
                if rhs < *b {
                    *b = rhs;
                }
            }
            None => {
                self.rows.insert(support, rhs);
            }
        }
    }

    fn into_rows(self) -> Vec<(Vec<usize>, BigRational)> {
        let mut rows: Vec<_> = self.rows.into_iter().collect();
        rows.sort();
        rows
    }
}

/// Exact bilevel optimum of a pricing instance by candidate enumeration.
///
/// Enumerates the follower's inclusion-maximal (or minimal, for a minimizing
/// follower) solutions, and for each candidate solves an exact LP for the
/// richest tolls keeping that candidate follower-optimal. Tolled items outside
/// the winning candidate are priced at their deterrence level: the base value
/// for a maximizing follower, and just above the toll-free cover cost for a
/// minimizing one.
///
/// `m_bounds` are per-item upper bounds on optimal tolls, as produced by the
/// master reformulation; `None` uses the base values. A minimizing follower
/// derives its own safe bound and ignores `m_bounds`.
pub fn brute_force_cpp(
    inst: &PricingInstance,
    m_bounds: Option<&[f64]>,
    cap: usize,
) -> Result<SolveResult> {
    if matches!(inst.payload, Payload::Interdiction(_)) {
        return Err(Error::InvalidConfig(
            "interdiction instances use the interdiction oracle".into(),
        ));
    }
    let follower = inst.follower();
    let candidates: Vec<ItemSet> = follower
        .enumerate_solutions(cap)?
        .into_iter()
        .map(|s| s.0)
        .collect();
    let values: Vec<BigRational> = candidates.iter().map(|x| value_rat(inst, x)).collect();

    match inst.sense() {
        Sense::Maximize => {
            let bounds: Vec<BigRational> = match m_bounds {
                Some(m) => {
                    assert_eq!(m.len(), inst.n);
                    m.iter().map(|&b| rat_f64(b)).collect()
                }
                None => (0..inst.n).map(|i| inst.v_rat(i)).collect(),
            };
            let mut best: Option<(BigRational, Vec<BigRational>, ItemSet, Vec<usize>)> = None;
            for (k, x) in candidates.iter().enumerate() {
                let tolled: Vec<usize> = x.intersect(&inst.tolled).items();
                let index_of: HashMap<usize, usize> =
                    tolled.iter().enumerate().map(|(j, &i)| (i, j)).collect();
                let mut pool = RowPool::new();
                for (k2, other) in candidates.iter().enumerate() {
                    if k2 == k {
                        continue;
                    }
                    // Row: sum_{i in x cap I1, i not in other} t_i <=
                    //      v(x) - v(other minus deterred items).
                    let support: Vec<usize> = tolled
                        .iter()
                        .filter(|&&i| !other.contains(i))
                        .map(|&i| index_of[&i])
                        .collect();
                    let kept = other.minus(&inst.tolled.minus(x));
                    let rhs = &values[k] - value_rat(inst, &kept);
                    pool.add(support, rhs);
                    if pool.dominated {
                        break;
                    }
                }
                if pool.dominated {
                    continue;
                }
                let ub: Vec<BigRational> = tolled.iter().map(|&i| bounds[i].clone()).collect();
                let (obj, tvals) = solve_unit_lp(tolled.len(), &pool.into_rows(), &ub);
                if best.as_ref().map_or(true, |(b, ..)| obj > *b) {
                    best = Some((obj, tvals, x.clone(), tolled));
                }
            }
            let (obj, tvals, x, tolled_in_x) =
                best.ok_or_else(|| Error::InvalidInstance("no follower candidates".into()))?;
            let mut t = vec![0.0; inst.n];
            for (j, &i) in tolled_in_x.iter().enumerate() {
                t[i] = tvals[j].to_f64().unwrap();
            }
            for i in inst.tolled.iter() {
                if !x.contains(i) {
                    t[i] = inst.v_f64(i);
                }
            }
            finish(inst, t, x, obj)
        }
        Sense::Minimize => {
            // Safe toll cap: anything above the toll-free optimum plus one can
            // never appear in an optimal cover.
            let toll_free_best = candidates
                .iter()
                .zip(&values)
                .filter(|(x, _)| x.is_subset(&inst.toll_free()))
                .map(|(_, v)| v.clone())
                .min()
                .ok_or_else(|| {
                    Error::TollFreeCoverViolated(
                        "toll-free sets cannot cover the universe".into(),
                    )
                })?;
            let big = &toll_free_best + rat_i64(1);
            let mut best: Option<(BigRational, Vec<BigRational>, ItemSet, Vec<usize>)> = None;
            for (k, x) in candidates.iter().enumerate() {
                let tolled: Vec<usize> = x.intersect(&inst.tolled).items();
                let index_of: HashMap<usize, usize> =
                    tolled.iter().enumerate().map(|(j, &i)| (i, j)).collect();
                let mut pool = RowPool::new();
                for (k2, other) in candidates.iter().enumerate() {
                    if k2 == k {
                        continue;
                    }
                    // Deterrence prices push any cover using a tolled item
                    // outside x beyond the toll-free optimum; drop those.
                    if !other.intersect(&inst.tolled).is_subset(x) {
                        continue;
                    }
                    let support: Vec<usize> = tolled
                        .iter()
                        .filter(|&&i| !other.contains(i))
                        .map(|&i| index_of[&i])
                        .collect();
                    let rhs = &values[k2] - &values[k];
                    pool.add(support, rhs);
                    if pool.dominated {
                        break;
                    }
                }
                if pool.dominated {
                    continue;
                }
                let ub: Vec<BigRational> = tolled.iter().map(|_| big.clone()).collect();
                let (obj, tvals) = solve_unit_lp(tolled.len(), &pool.into_rows(), &ub);
                if best.as_ref().map_or(true, |(b, ..)| obj > *b) {
                    best = Some((obj, tvals, x.clone(), tolled));
                }
            }
            let (obj, tvals, x, tolled_in_x) =
                best.ok_or_else(|| Error::InvalidInstance("no follower candidates".into()))?;
            let mut t = vec![0.0; inst.n];
            for (j, &i) in tolled_in_x.iter().enumerate() {
                t[i] = tvals[j].to_f64().unwrap();
            }
            for i in inst.tolled.iter() {
                if !x.contains(i) {
                    t[i] = big.to_f64().unwrap();
                }
            }
            finish(inst, t, x, obj)
        }
    }
}

fn finish(
    inst: &PricingInstance,
    t: Vec<f64>,
    x: ItemSet,
    obj: BigRational,
) -> Result<SolveResult> {
    let revenue = obj.to_f64().unwrap();
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        tolls: TollVector::new(t, &inst.tolled)?,
        response: FollowerSolution(x),
        revenue,
        bound: revenue,
        gap: 0.0,
        stats: SolveStats::default(),
    })
}

/// Exact interdiction optimum: enumerate every leader vector within budget,
/// solve the inner knapsack by integer DP, keep the minimum.
pub fn brute_force_kip(inst: &PricingInstance) -> Result<SolveResult> {
    let Payload::Interdiction(data) = &inst.payload else {
        return Err(Error::InvalidConfig(
            "interdiction oracle needs interdiction data".into(),
        ));
    };
    let tolled: Vec<usize> = inst.tolled.items();
    if tolled.len() > 15 {
        return Err(Error::InstanceTooLarge(format!(
            "{} interdictable items is too many for leader enumeration",
            tolled.len()
        )));
    }
    let mut best: Option<(i64, u32, ItemSet)> = None;
    for mask in 0u32..(1u32 << tolled.len()) {
        let budget: i64 = tolled
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, &i)| data.leader_w[i])
            .sum();
        if budget > data.leader_c {
            continue;
        }
        let mut blocked = ItemSet::new(inst.n);
        for (j, &i) in tolled.iter().enumerate() {
            if mask >> j & 1 == 1 {
                blocked.insert(i);
            }
        }
        let (value, x) = inner_knapsack(&inst.v_num, &data.w, data.c, &blocked);
        if best.as_ref().map_or(true, |(b, ..)| value < *b) {
            best = Some((value, mask, x));
        }
    }
    let (value, mask, x) = best.expect("mask 0 always fits the leader budget");
    let mut t = vec![0.0; inst.n];
    for (j, &i) in tolled.iter().enumerate() {
        if mask >> j & 1 == 1 {
            t[i] = 1.0;
        }
    }
    let objective = value as f64 / inst.v_den as f64;
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        tolls: TollVector::new(t, &inst.tolled)?,
        response: FollowerSolution(x),
        revenue: objective,
        bound: objective,
        gap: 0.0,
        stats: SolveStats::default(),
    })
}

/// Integer knapsack DP over the non-blocked items, with backtracking.
/// Values are numerators over the instance denominator; the DP works in
/// numerator units.
fn inner_knapsack(v_num: &[i64], w: &[i64], c: i64, blocked: &ItemSet) -> (i64, ItemSet) {
    let n = v_num.len();
    let cap = c as usize;
    let mut dp = vec![vec![0i64; cap + 1]; n + 1];
    for k in (0..n).rev() {
        for cc in 0..=cap {
            let mut bestv = dp[k + 1][cc];
            if !blocked.contains(k) && (w[k] as usize) <= cc {
                let take = v_num[k] + dp[k + 1][cc - w[k] as usize];
                if take > bestv {
                    bestv = take;
                }
            }
            dp[k][cc] = bestv;
        }
    }
    let mut x = ItemSet::new(n);
    let mut cc = cap;
    for k in 0..n {
        if !blocked.contains(k)
            && (w[k] as usize) <= cc
            && dp[k][cc] == v_num[k] + dp[k + 1][cc - w[k] as usize]
            && dp[k][cc] > dp[k + 1][cc]
        {
            x.insert(k);
            cc -= w[k] as usize;
        }
    }
    (dp[0][cap], x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{KipData, KnapsackData, SetCoverData};

    fn four_item_kpp() -> PricingInstance {
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

    fn cover_fixture(v: Vec<i64>) -> PricingInstance {
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
            ItemSet::from_items(5, &[0]),
            Payload::SetCover(SetCoverData {
                n_elements: 4,
                sets,
                element_weights: vec![1, 1, 1, 1],
            }),
        )
        .unwrap()
    }

    #[test]
    fn unit_lp_three_pair_rows() {
        let one = BigRational::one;
        let rows = vec![
            (vec![1, 2], one()),
            (vec![0, 2], one()),
            (vec![0, 1], one()),
        ];
        let ub = vec![one(), one(), one()];
        let (obj, t) = solve_unit_lp(3, &rows, &ub);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(obj, BigRational::new(BigInt::from(3), BigInt::from(2)));
        assert_eq!(t, vec![half.clone(), half.clone(), half]);
    }

    #[test]
    fn optimistic_zero_tolls() {
        let inst = four_item_kpp();
        let t = TollVector::zeros(4);
        let (x, value, revenue) = optimistic_best_response(&inst, &t).unwrap();
        assert_eq!(x.set().items(), vec![0, 1, 2]);
        assert_eq!(value, rat_i64(3));
        assert_eq!(revenue, rat_i64(0));
    }

    #[test]
    fn optimistic_full_tolls_pick_revenue_among_ties() {
        let inst = four_item_kpp();
        let t = TollVector::new(vec![1.0, 1.0, 1.0, 0.0], &inst.tolled).unwrap();
        let (x, value, revenue) = optimistic_best_response(&inst, &t).unwrap();
        assert_eq!(value, rat_i64(1));
        assert_eq!(revenue, rat_i64(1));
        // Every follower optimum pays at most that revenue.
        assert!(x.set().count() == 2 && x.set().contains(3));
    }

    #[test]
    fn four_item_kpp_optimum() {
        let inst = four_item_kpp();
        let res = brute_force_cpp(&inst, None, 10_000).unwrap();
        assert_eq!(res.revenue, 1.5);
        assert_eq!(res.bound, 1.5);
        assert_eq!(res.tolls.as_slice(), &[0.5, 0.5, 0.5, 0.0]);
        assert_eq!(res.response.items(), vec![0, 1, 2]);
    }

    #[test]
    fn no_tolled_items_means_zero_revenue() {
        let inst = PricingInstance::new(
            vec![1, 2, 3],
            1,
            ItemSet::new(3),
            Payload::Knapsack(KnapsackData {
                weights: vec![1, 1, 1],
                capacity: 2,
            }),
        )
        .unwrap();
        let res = brute_force_cpp(&inst, None, 10_000).unwrap();
        assert_eq!(res.revenue, 0.0);
    }

    #[test]
    fn unusable_tolled_item_means_zero_revenue() {
        let inst = PricingInstance::new(
            vec![1, 1],
            1,
            ItemSet::from_items(2, &[0]),
            Payload::Knapsack(KnapsackData {
                weights: vec![5, 1],
                capacity: 1,
            }),
        )
        .unwrap();
        let res = brute_force_cpp(&inst, None, 10_000).unwrap();
        assert_eq!(res.revenue, 0.0);
    }

    #[test]
    fn relabeling_items_keeps_the_optimum() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.random_range(4..=7);
            let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=6)).collect();
            let v: Vec<i64> = (0..n).map(|_| rng.random_range(0..=5)).collect();
            let capacity = rng.random_range(2..=weights.iter().sum::<i64>());
            let tolled: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            let inst = PricingInstance::new(
                v.clone(),
                1,
                ItemSet::from_items(n, &tolled),
                Payload::Knapsack(KnapsackData {
                    weights: weights.clone(),
                    capacity,
                }),
            )
            .unwrap();
            // Rotate labels by one.
            let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let mut v2 = vec![0i64; n];
            let mut w2 = vec![0i64; n];
            let mut t2 = Vec::new();
            for i in 0..n {
                v2[perm[i]] = v[i];
                w2[perm[i]] = weights[i];
            }
            for &i in &tolled {
                t2.push(perm[i]);
            }
            let inst2 = PricingInstance::new(
                v2,
                1,
                ItemSet::from_items(n, &t2),
                Payload::Knapsack(KnapsackData {
                    weights: w2,
                    capacity,
                }),
            )
            .unwrap();
            let r1 = brute_force_cpp(&inst, None, 100_000).unwrap();
            let r2 = brute_force_cpp(&inst2, None, 100_000).unwrap();
            assert_eq!(r1.revenue, r2.revenue);
        }
    }

    #[test]
    fn scaling_values_scales_revenue() {
        let inst = four_item_kpp();
        let scaled = PricingInstance::new(
            vec![3, 3, 3, 3],
            1,
            inst.tolled.clone(),
            inst.payload.clone(),
        )
        .unwrap();
        let r1 = brute_force_cpp(&inst, None, 10_000).unwrap();
        let r2 = brute_force_cpp(&scaled, None, 10_000).unwrap();
        assert_eq!(r2.revenue, 3.0 * r1.revenue);
        assert_eq!(r1.response.items(), r2.response.items());
    }

    #[test]
    fn cover_oracle_earns_nothing_when_rivals_match() {
        let inst = cover_fixture(vec![3, 3, 3, 5, 2]);
        let res = brute_force_cpp(&inst, None, 10_000).unwrap();
        assert_eq!(res.revenue, 0.0);
    }

    #[test]
    fn cover_oracle_prices_up_to_the_rival_gap() {
        let inst = cover_fixture(vec![3, 6, 6, 5, 2]);
        let res = brute_force_cpp(&inst, None, 10_000).unwrap();
        assert_eq!(res.revenue, 3.0);
        assert_eq!(res.tolls.get(0), 3.0);
        assert_eq!(res.response.items(), vec![0, 3]);
    }

    #[test]
    fn interdiction_budget_zero_and_one() {
        let mk = |leader_c: i64| {
            PricingInstance::new(
                vec![5],
                1,
                ItemSet::universe(1),
                Payload::Interdiction(KipData {
                    w: vec![1],
                    c: 1,
                    leader_w: vec![1],
                    leader_c,
                }),
            )
            .unwrap()
        };
        let r0 = brute_force_kip(&mk(0)).unwrap();
        assert_eq!(r0.revenue, 5.0);
        assert_eq!(r0.tolls.as_slice(), &[0.0]);
        let r1 = brute_force_kip(&mk(1)).unwrap();
        assert_eq!(r1.revenue, 0.0);
        assert_eq!(r1.tolls.as_slice(), &[1.0]);
    }

    #[test]
    fn interdiction_two_items() {
        let inst = PricingInstance::new(
            vec![5, 7],
            1,
            ItemSet::universe(2),
            Payload::Interdiction(KipData {
                w: vec![2, 3],
                c: 5,
                leader_w: vec![1, 1],
                leader_c: 1,
            }),
        )
        .unwrap();
        let res = brute_force_kip(&inst).unwrap();
        assert_eq!(res.revenue, 5.0);
        assert_eq!(res.tolls.as_slice(), &[0.0, 1.0]);
        assert_eq!(res.response.items(), vec![0]);
    }

    #[test]
    fn inner_dp_matches_follower_solver() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.random_range(3..=9);
            let v: Vec<i64> = (0..n).map(|_| rng.random_range(0..=8)).collect();
            let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=7)).collect();
            let c = rng.random_range(1..=w.iter().sum::<i64>());
            let mut blocked = ItemSet::new(n);
            for i in 0..n {
                if rng.random_bool(0.3) {
                    blocked.insert(i);
                }
            }
            let (value, x) = inner_knapsack(&v, &w, c, &blocked);
            // Exhaustive check over all subsets.
            let mut exhaustive = 0i64;
            for mask in 0u32..(1u32 << n) {
                let mut vv = 0i64;
                let mut ww = 0i64;
                let mut ok = true;
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        if blocked.contains(i) {
                            ok = false;
                            break;
                        }
                        vv += v[i];
                        ww += w[i];
                    }
                }
                if ok && ww <= c && vv > exhaustive {
                    exhaustive = vv;
                }
            }
            assert_eq!(value, exhaustive);
            assert!(x.is_disjoint(&blocked));
            let xw: i64 = x.iter().map(|i| w[i]).sum();
            assert!(xw <= c);
            let xv: i64 = x.iter().map(|i| v[i]).sum();
            assert_eq!(xv, value);
        }
    }
}
