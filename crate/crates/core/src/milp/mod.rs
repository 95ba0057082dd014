//! Mixed-integer solving for [`ModelSpec`](crate::model::ModelSpec) models.
//!
//! The built-in engine is a branch-and-bound search over the dense simplex
//! in [`simplex`], with lazy-constraint callbacks: whenever the search
//! finds an integer-feasible point, the callback inspects it and either
//! accepts it as an incumbent or returns violated rows to append. Two
//! backends wrap the engine. `"builtin"` consults the callback inside the
//! tree search; `"iterative"` re-solves the whole model from scratch after
//! each batch of cuts, which mimics solvers without callback support.
//! Additional backends can be registered by name at runtime.

pub mod bnb;
pub mod simplex;

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::model::{CutSpec, ModelSpec};

/// Integrality tolerance for branching and acceptance.
pub const INT_TOL: f64 = 1e-6;
/// Relative bound gap at which the search stops.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Proven optimal within tolerances.
    Optimal,
    /// Stopped at a node or time limit with the best incumbent so far.
    Limit,
    Infeasible,
}

/// Outcome of a mixed-integer solve.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent point, one value per model variable (empty if none found).
    pub values: Vec<f64>,
    /// Incumbent objective (NAN if none found).
    pub objective: f64,
    /// Best proven bound on the optimum.
    pub bound: f64,
    pub nodes: u64,
    pub callback_calls: u64,
    /// Seconds spent inside the callback.
    pub callback_time: f64,
    pub cuts_added: u64,
}

/// Search limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    /// Wall-clock limit in seconds.
    pub time: Option<f64>,
    /// Branch-and-bound node limit.
    pub nodes: Option<u64>,
}

/// What a callback wants done with an integer-feasible point.
pub enum CallbackAction {
    /// The point is acceptable as an incumbent.
    Accept,
    /// Reject the point: append `cuts` and optionally hand the search a
    /// known-feasible incumbent to keep the primal side moving.
    AddCuts {
        cuts: Vec<CutSpec>,
        incumbent: Option<Vec<f64>>,
    },
}

/// Inspects an integer-feasible point and decides whether to cut it off.
pub type Callback<'a> = &'a mut dyn FnMut(&[f64]) -> Result<CallbackAction>;

/// A solving strategy for models with lazy rows.
pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Solves `spec` to optimality under `limits`, consulting `callback`
    /// at integer-feasible points. `incumbents` are known feasible points
    /// that warm-start the primal bound. The model may be mutated by
    /// appending the callback's cuts.
    fn solve(
        &self,
        spec: &mut ModelSpec,
        limits: Limits,
        incumbents: &[Vec<f64>],
        callback: Callback<'_>,
    ) -> Result<MilpSolution>;
}

struct BuiltinBackend;

impl MilpBackend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve(
        &self,
        spec: &mut ModelSpec,
        limits: Limits,
        incumbents: &[Vec<f64>],
        callback: Callback<'_>,
    ) -> Result<MilpSolution> {
        bnb::branch_and_bound(spec, limits, incumbents, callback)
    }
}

/// Re-solves from scratch after every cut round instead of cutting inside
/// the tree. Each inner solve accepts all integer points; the real
/// callback only sees the inner optimum.
struct IterativeBackend;

impl MilpBackend for IterativeBackend {
    fn name(&self) -> &str {
        "iterative"
    }

    fn solve(
        &self,
        spec: &mut ModelSpec,
        limits: Limits,
        incumbents: &[Vec<f64>],
        callback: Callback<'_>,
    ) -> Result<MilpSolution> {
        let start = Instant::now();
        let mut totals = MilpSolution {
            status: MilpStatus::Limit,
            values: Vec::new(),
            objective: f64::NAN,
            bound: f64::NAN,
            nodes: 0,
            callback_calls: 0,
            callback_time: 0.0,
            cuts_added: 0,
        };
        let mut known_points: Vec<Vec<f64>> = incumbents.to_vec();
        loop {
            let remaining = limits.time.map(|t| (t - start.elapsed().as_secs_f64()).max(0.0));
            if remaining == Some(0.0) {
                totals.status = MilpStatus::Limit;
                return Ok(totals);
            }
            let inner_limits = Limits {
                time: remaining,
                nodes: limits.nodes,
            };
            let mut accept_all = |_point: &[f64]| Ok(CallbackAction::Accept);
            let inner = bnb::branch_and_bound(spec, inner_limits, &known_points, &mut accept_all)?;
            totals.nodes += inner.nodes;
            totals.bound = inner.bound;
            match inner.status {
                MilpStatus::Infeasible => {
                    totals.status = MilpStatus::Infeasible;
                    return Ok(totals);
                }
                MilpStatus::Limit => {
                    totals.status = MilpStatus::Limit;
                    if !inner.values.is_empty() {
                        totals.values = inner.values;
                        totals.objective = inner.objective;
                    }
                    return Ok(totals);
                }
                MilpStatus::Optimal => {}
            }
            let cb_start = Instant::now();
            let action = callback(&inner.values)?;
            totals.callback_time += cb_start.elapsed().as_secs_f64();
            totals.callback_calls += 1;
            match action {
                CallbackAction::Accept => {
                    totals.status = MilpStatus::Optimal;
                    totals.values = inner.values;
                    totals.objective = inner.objective;
                    return Ok(totals);
                }
                CallbackAction::AddCuts { cuts, incumbent } => {
                    if cuts.is_empty() {
                        return Err(Error::InvalidConfig(
                            "callback rejected a point without supplying cuts".into(),
                        ));
                    }
                    for cut in cuts {
                        spec.add_constraint(cut.row);
                        totals.cuts_added += 1;
                    }
                    if let Some(point) = incumbent {
                        bnb::validate_incumbent(spec, &point)?;
                        known_points.push(point);
                    }
                    // Known feasible points survive cut rounds only if they
                    // still satisfy the grown model; keep the best as a
                    // fallback answer under a limit stop.
                    known_points.retain(|p| spec.max_violation(p) <= INT_TOL);
                    if let Some(best) = known_points
                        .iter()
                        .map(|p| (spec.objective_value(p), p))
                        .max_by(|a, b| {
                            let (ka, kb) = match spec.objective().sense {
                                crate::domain::Sense::Maximize => (a.0, b.0),
                                crate::domain::Sense::Minimize => (-a.0, -b.0),
                            };
                            ka.total_cmp(&kb)
                        })
                    {
                        totals.objective = best.0;
                        totals.values = best.1.clone();
                    }
                }
            }
        }
    }
}

static REGISTRY: Lazy<Mutex<HashMap<String, &'static dyn MilpBackend>>> = Lazy::new(|| {
    let mut map: HashMap<String, &'static dyn MilpBackend> = HashMap::new();
    map.insert("builtin".into(), &BuiltinBackend);
    map.insert("iterative".into(), &IterativeBackend);
    Mutex::new(map)
});

/// Registers a backend under its own name, replacing any previous entry.
pub fn register_backend(backend: &'static dyn MilpBackend) {
    REGISTRY
        .lock()
        .unwrap()
        .insert(backend.name().to_string(), backend);
}

/// Looks up a backend by name.
pub fn backend(name: &str) -> Result<&'static dyn MilpBackend> {
    REGISTRY
        .lock()
        .unwrap()
        .get(name)
        .copied()
        .ok_or_else(|| Error::InvalidConfig(format!("unknown solver backend {name:?}")))
}
