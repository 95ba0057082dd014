//! Instance difficulty score: how much of the follower's utility is exposed
//! to pricing, relative to what the leader actually extracts.

use crate::domain::{Payload, PricingInstance, Sense, TollVector};
use crate::error::{Error, Result};
use crate::oracle;
use crate::problems::{knapsack, set_cover, stable_set};

/// The difficulty score with the three quantities it is built from.
#[derive(Debug, Clone, Copy)]
pub struct DifficultyReport {
    /// Follower optimum under zero tolls.
    pub untolled_value: f64,
    /// Follower optimum restricted to the toll-free items, the limit of
    /// arbitrarily punitive tolls.
    pub toll_free_value: f64,
    /// Exact bilevel optimum from the oracle.
    pub leader_optimum: f64,
    pub score: f64,
}

/// Score: the utility spread the leader prices into, relative to what it
/// extracts. `(untolled - toll_free) / optimum` for a maximizing follower
/// and the mirrored ratio for a minimizing one. No tolled items scores 0;
/// a zero optimum scores +infinity.
///
/// `cap` bounds the oracle's candidate enumeration.
pub fn estimate_difficulty(inst: &PricingInstance, cap: usize) -> Result<f64> {
    difficulty_report(inst, cap).map(|r| r.score)
}

/// [`estimate_difficulty`] plus the intermediate quantities.
pub fn difficulty_report(inst: &PricingInstance, cap: usize) -> Result<DifficultyReport> {
    let values = inst.values_f64();
    let toll_free = inst.toll_free();
    let zeros = TollVector::zeros(inst.n);
    let tie = vec![0.0; inst.n];
    let f_zero = inst.follower().best_response(&zeros, &tie)?.1;
    let f_inf = match &inst.payload {
        Payload::Knapsack(d) => knapsack::knapsack_best_value(d, &values, &toll_free),
        Payload::Graph(d) => stable_set::stable_best_value(d, &values, &toll_free),
        Payload::SetCover(d) => {
            set_cover::min_cost_cover(d, &values, &toll_free, &d.universe()).map_err(|_| {
                Error::TollFreeCoverViolated(
                    "toll-free sets cannot cover the universe".into(),
                )
            })?
        }
        Payload::Interdiction(d) => {
            knapsack::knapsack_best_value(&d.follower_knapsack(), &values, &toll_free)
        }
    };
    let g = match &inst.payload {
        Payload::Interdiction(_) => oracle::brute_force_kip(inst)?.revenue,
        _ => oracle::brute_force_cpp(inst, None, cap)?.revenue,
    };
    let numerator = match inst.sense() {
        Sense::Maximize => f_zero - f_inf,
        Sense::Minimize => f_inf - f_zero,
    };
    let score = if inst.tolled.is_empty() {
        0.0
    } else if g.abs() < 1e-12 {
        f64::INFINITY
    } else {
        numerator / g
    };
    Ok(DifficultyReport {
        untolled_value: f_zero,
        toll_free_value: f_inf,
        leader_optimum: g,
        score,
    })
}
