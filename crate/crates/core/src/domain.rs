//! Shared domain types: instances, item sets, tolls, follower contract, results.
//!
//! A pricing instance couples per-item base values with a follower problem
//! (knapsack, stable set, set cover, or knapsack interdiction). The leader
//! prices the tolled items; the follower optimizes its own net objective and
//! breaks ties in the leader's favor.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::{GraphData, KipData, KnapsackData, SetCoverData};

/// Tolerance used when comparing follower objective values.
pub const FOLLOWER_EPS: f64 = 1e-6;

/// Optimization direction of the follower problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Returns true when `a` is strictly better than `b` by more than `eps`.
    pub fn strictly_better(self, a: f64, b: f64, eps: f64) -> bool {
        match self {
            Sense::Maximize => a > b + eps,
            Sense::Minimize => a < b - eps,
        }
    }

    /// Sign applied to tolls in the follower's net objective: value - sign*toll.
    pub fn toll_sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

/// Fixed-capacity set of item indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet(FixedBitSet);

impl ItemSet {
    pub fn new(n: usize) -> Self {
        ItemSet(FixedBitSet::with_capacity(n))
    }

    pub fn from_items(n: usize, items: &[usize]) -> Self {
        let mut s = Self::new(n);
        for &i in items {
            s.insert(i);
        }
        s
    }

    pub fn universe(n: usize) -> Self {
        let mut s = Self::new(n);
        s.0.insert_range(..);
        s
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.0.set(i, false);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        let mut s = self.clone();
        s.0.union_with(&other.0);
        s
    }

    pub fn intersect(&self, other: &ItemSet) -> ItemSet {
        let mut s = self.clone();
        s.0.intersect_with(&other.0);
        s
    }

    pub fn minus(&self, other: &ItemSet) -> ItemSet {
        let mut s = self.clone();
        s.0.difference_with(&other.0);
        s
    }

    pub fn complement(&self) -> ItemSet {
        let mut s = Self::universe(self.capacity());
        s.0.difference_with(&self.0);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn items(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl PartialOrd for ItemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ItemSet {
    // Order by cardinality, then by ascending item sequence; total and
    // deterministic, which is all the tie-breaking code needs.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count()
            .cmp(&other.count())
            .then_with(|| self.items().cmp(&other.items()))
    }
}

/// Problem-specific follower data.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Knapsack(KnapsackData),
    Graph(GraphData),
    SetCover(SetCoverData),
    Interdiction(KipData),
}

impl Payload {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Payload::Knapsack(_) => "knapsack",
            Payload::Graph(_) => "stable-set",
            Payload::SetCover(_) => "set-cover",
            Payload::Interdiction(_) => "interdiction",
        }
    }
}

/// A pricing (or interdiction) instance.
///
/// Base values are stored as scaled integers `v_num[i] / v_den` so that exact
/// arithmetic stays available to the enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingInstance {
    pub n: usize,
    pub v_num: Vec<i64>,
    pub v_den: i64,
    pub tolled: ItemSet,
    pub payload: Payload,
}

impl PricingInstance {
    pub fn new(v_num: Vec<i64>, v_den: i64, tolled: ItemSet, payload: Payload) -> Result<Self> {
        let inst = PricingInstance {
            n: v_num.len(),
            v_num,
            v_den,
            tolled,
            payload,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_den <= 0 {
            return Err(Error::InvalidInstance("value denominator must be positive".into()));
        }
        if self.v_num.len() != self.n {
            return Err(Error::InvalidInstance("value vector length mismatch".into()));
        }
        if self.v_num.iter().any(|&v| v < 0) {
            return Err(Error::InvalidInstance("base values must be nonnegative".into()));
        }
        if self.tolled.capacity() != self.n {
            return Err(Error::InvalidInstance("tolled set capacity mismatch".into()));
        }
        let payload_n = match &self.payload {
            Payload::Knapsack(d) => d.weights.len(),
            Payload::Graph(d) => d.n,
            Payload::SetCover(d) => d.sets.len(),
            Payload::Interdiction(d) => d.w.len(),
        };
        if payload_n != self.n {
            return Err(Error::InvalidInstance("payload item count mismatch".into()));
        }
        match &self.payload {
            Payload::Knapsack(d) => d.validate()?,
            Payload::Graph(d) => d.validate()?,
            Payload::SetCover(d) => d.validate()?,
            Payload::Interdiction(d) => d.validate()?,
        }
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        match self.payload {
            Payload::SetCover(_) => Sense::Minimize,
            _ => Sense::Maximize,
        }
    }

    /// Whether the follower's feasible family is closed downward (maximize)
    /// or upward (minimize).
    pub fn is_monotone(&self) -> bool {
        true
    }

    pub fn v_f64(&self, i: usize) -> f64 {
        self.v_num[i] as f64 / self.v_den as f64
    }

    pub fn v_rat(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.v_num[i]), BigInt::from(self.v_den))
    }

    pub fn values_f64(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.v_f64(i)).collect()
    }

    pub fn toll_free(&self) -> ItemSet {
        self.tolled.complement()
    }

    /// Per-unit coefficient of the toll in the follower's net objective.
    /// Interdiction scales a binary toll by the item value; pricing uses the
    /// toll itself.
    pub fn toll_coeff(&self, i: usize) -> f64 {
        match &self.payload {
            Payload::Interdiction(_) => self.v_f64(i),
            _ => 1.0,
        }
    }

    /// Follower net values under tolls `t`: value - toll (maximize) or
    /// value + toll (minimize), with the interdiction scaling applied.
    pub fn net_values(&self, t: &TollVector) -> Vec<f64> {
        let sign = self.sense().toll_sign();
        (0..self.n)
            .map(|i| self.v_f64(i) - sign * self.toll_coeff(i) * t.get(i))
            .collect()
    }

    /// Constructs the follower solver for this instance.
    pub fn follower(&self) -> Box<dyn FollowerProblem + '_> {
        crate::problems::follower(self)
    }
}

/// Leader decision: one toll per item, zero on toll-free items.
#[derive(Debug, Clone, PartialEq)]
pub struct TollVector(Vec<f64>);

impl TollVector {
    pub fn zeros(n: usize) -> Self {
        TollVector(vec![0.0; n])
    }

    /// Builds a toll vector, verifying nonnegativity and zeros off the tolled set.
    pub fn new(values: Vec<f64>, tolled: &ItemSet) -> Result<Self> {
        if values.len() != tolled.capacity() {
            return Err(Error::InvalidInstance("toll vector length mismatch".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::InvalidInstance(format!("negative toll on item {i}")));
            }
            if v != 0.0 && !tolled.contains(i) {
                return Err(Error::InvalidInstance(format!(
                    "nonzero toll on toll-free item {i}"
                )));
            }
        }
        Ok(TollVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.0[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Leader revenue of a response under these tolls.
    pub fn revenue(&self, x: &ItemSet) -> f64 {
        x.iter().map(|i| self.0[i]).sum()
    }
}

/// Follower response.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FollowerSolution(pub ItemSet);

impl FollowerSolution {
    pub fn items(&self) -> Vec<usize> {
        self.0.items()
    }

    pub fn set(&self) -> &ItemSet {
        &self.0
    }
}

/// Contract every follower problem implements.
///
/// `best_response` optimizes the toll-adjusted objective and breaks value ties
/// (within [`FOLLOWER_EPS`]) by maximizing `tiebreak` over the solution.
pub trait FollowerProblem {
    fn sense(&self) -> Sense;
    fn is_monotone(&self) -> bool;
    fn num_items(&self) -> usize;
    fn is_feasible(&self, x: &ItemSet) -> bool;

    /// Follower net objective of `x` under tolls `t`.
    fn objective(&self, x: &ItemSet, t: &TollVector) -> f64;

    fn best_response(&self, t: &TollVector, tiebreak: &[f64]) -> Result<(FollowerSolution, f64)>;

    /// Samples one inclusion-maximal (maximize) or inclusion-minimal
    /// (minimize) feasible solution.
    fn sample_solution(&self, rng: &mut dyn Rng) -> Result<FollowerSolution>;

    /// Enumerates every inclusion-maximal (maximize) or inclusion-minimal
    /// (minimize) feasible solution, failing above `cap`.
    fn enumerate_solutions(&self, cap: usize) -> Result<Vec<FollowerSolution>>;
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Limit,
}

/// Counters and timings reported with every solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub total_time: f64,
    pub callback_time: f64,
    pub callback_calls: u64,
    pub bb_nodes: u64,
    pub cuts_added: u64,
    /// Cutting-plane rounds: callback calls that rejected the candidate.
    pub rejections: u64,
}

/// Outcome of a bilevel solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub tolls: TollVector,
    pub response: FollowerSolution,
    /// Leader objective: toll revenue for pricing, inner optimum for interdiction.
    pub revenue: f64,
    /// Best proven bound on the leader objective.
    pub bound: f64,
    /// Relative gap between bound and revenue.
    pub gap: f64,
    pub stats: SolveStats,
}

impl SolveResult {
    /// Relative gap convention: (bound - revenue) / max(|bound|, eps) for a
    /// maximizing leader, mirrored for interdiction where the leader minimizes.
    pub fn compute_gap(revenue: f64, bound: f64, leader_maximizes: bool) -> f64 {
        let diff = if leader_maximizes {
            bound - revenue
        } else {
            revenue - bound
        };
        diff.max(0.0) / f64::max(bound.abs(), 1e-9)
    }
}
