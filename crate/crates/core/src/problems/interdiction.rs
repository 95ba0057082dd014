//! Knapsack interdiction data: a binary leader blocks items, the follower
//! packs the rest.

use crate::error::{Error, Result};

use super::knapsack::KnapsackData;

/// Interdiction follower data. The follower solves a 0/1 knapsack over the
/// non-blocked items; the leader's own budget row is `leader_w . t <= leader_c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KipData {
    pub w: Vec<i64>,
    pub c: i64,
    pub leader_w: Vec<i64>,
    pub leader_c: i64,
}

impl KipData {
    pub fn validate(&self) -> Result<()> {
        if self.leader_w.len() != self.w.len() {
            return Err(Error::InvalidInstance("leader weight length mismatch".into()));
        }
        if self.w.iter().any(|&w| w <= 0) || self.leader_w.iter().any(|&w| w <= 0) {
            return Err(Error::InvalidInstance("weights must be positive".into()));
        }
        if self.c < 0 || self.leader_c < 0 {
            return Err(Error::InvalidInstance("capacities must be nonnegative".into()));
        }
        Ok(())
    }

    /// The follower side viewed as plain knapsack data.
    pub fn follower_knapsack(&self) -> KnapsackData {
        KnapsackData {
            weights: self.w.clone(),
            capacity: self.c,
        }
    }

    /// Does the binary interdiction vector fit the leader budget?
    pub fn leader_feasible(&self, t: &[f64]) -> bool {
        let used: f64 = t
            .iter()
            .zip(&self.leader_w)
            .map(|(&ti, &wi)| ti * wi as f64)
            .sum();
        used <= self.leader_c as f64 + 1e-9
    }
}
