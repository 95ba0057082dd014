//! Best-bound branch and bound with lazy-constraint callbacks.
//!
//! Open nodes live in a max-heap keyed by their parent relaxation bound,
//! so the node with the most optimistic bound is explored next. Branching
//! picks the integer variable whose relaxation value sits closest to one
//! half. Cuts returned by the callback are appended to the shared model,
//! so they prune every open node, and the rejected node's relaxation is
//! solved again before the search moves on.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::domain::Sense;
use crate::error::{Error, Result};
use crate::model::ModelSpec;

use super::simplex::{solve_lp, LpStatus};
use super::{Callback, CallbackAction, Limits, MilpSolution, MilpStatus, GAP_TOL, INT_TOL};

/// Cut rounds allowed on a single node before the search is declared
/// stuck (a healthy callback changes the relaxation every round).
const MAX_NODE_ROUNDS: usize = 100_000;

struct Node {
    /// Bound inherited from the parent relaxation, in key space.
    key: f64,
    id: u64,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key.total_cmp(&other.key) == Ordering::Equal && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on the bound, oldest node first among ties
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Maps an objective into "larger is better" key space.
fn key_of(sense: Sense, obj: f64) -> f64 {
    match sense {
        Sense::Maximize => obj,
        Sense::Minimize => -obj,
    }
}

/// Checks a point handed in from outside against the model: right length,
/// finite, integral where required, and within the row tolerances.
pub(crate) fn validate_incumbent(spec: &ModelSpec, point: &[f64]) -> Result<()> {
    if point.len() != spec.num_vars() {
        return Err(Error::InvalidConfig(format!(
            "injected incumbent has {} values for {} variables",
            point.len(),
            spec.num_vars()
        )));
    }
    if point.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "injected incumbent contains non-finite values".into(),
        ));
    }
    for var in spec.variables() {
        if var.integer && (point[var.id] - point[var.id].round()).abs() > INT_TOL {
            return Err(Error::InvalidConfig(format!(
                "injected incumbent is fractional in integer variable {}",
                var.name
            )));
        }
    }
    let viol = spec.max_violation(point);
    if viol > INT_TOL {
        return Err(Error::InvalidConfig(format!(
            "injected incumbent violates the model by {viol:.3e}"
        )));
    }
    Ok(())
}

pub fn branch_and_bound(
    spec: &mut ModelSpec,
    limits: Limits,
    incumbents: &[Vec<f64>],
    callback: Callback<'_>,
) -> Result<MilpSolution> {
    let start = Instant::now();
    let sense = spec.objective().sense;
    let int_vars: Vec<usize> = spec
        .variables()
        .iter()
        .filter(|v| v.integer)
        .map(|v| v.id)
        .collect();

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        key: f64::INFINITY,
        id: next_id,
        bounds: spec.variables().iter().map(|v| (v.lower, v.upper)).collect(),
    });
    next_id += 1;

    let mut incumbent: Option<(f64, Vec<f64>)> = None; // (key, point)
    for point in incumbents {
        validate_incumbent(spec, point)?;
        let k = key_of(sense, spec.objective_value(point));
        if incumbent.as_ref().is_none_or(|(ik, _)| k > *ik) {
            incumbent = Some((k, point.clone()));
        }
    }
    let mut nodes = 0u64;
    let mut callback_calls = 0u64;
    let mut callback_time = 0.0f64;
    let mut cuts_added = 0u64;
    // bound of a node that was being processed when a limit fired
    let mut interrupted_key: Option<f64> = None;
    let mut hit_limit = false;

    let gap_met = |inc_key: f64, node_key: f64| {
        node_key - inc_key <= GAP_TOL * inc_key.abs().max(1.0)
    };
    let out_of_time = |start: &Instant| {
        limits.time.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
    };

    'search: while let Some(node) = heap.pop() {
        if let Some((inc_key, _)) = incumbent {
            if gap_met(inc_key, node.key) {
                continue;
            }
        }
        if limits.nodes.is_some_and(|cap| nodes >= cap) || out_of_time(&start) {
            hit_limit = true;
            interrupted_key = Some(node.key);
            break;
        }
        nodes += 1;

        let node_bounds = node.bounds;
        let mut rounds = 0usize;
        loop {
            rounds += 1;
            if rounds > MAX_NODE_ROUNDS {
                return Err(Error::LpStalled(rounds));
            }
            let lp = solve_lp(spec, &node_bounds)?;
            match lp.status {
                LpStatus::Infeasible => continue 'search,
                LpStatus::Unbounded => return Err(Error::Unbounded),
                LpStatus::Optimal => {}
            }
            let node_key = key_of(sense, lp.objective);
            if let Some((inc_key, _)) = incumbent {
                if gap_met(inc_key, node_key) {
                    continue 'search;
                }
            }

            // most fractional first, smallest id on ties
            let branch_var = int_vars
                .iter()
                .copied()
                .filter(|&j| (lp.values[j] - lp.values[j].round()).abs() > INT_TOL)
                .min_by(|&a, &b| {
                    let da = (lp.values[a] - lp.values[a].floor() - 0.5).abs();
                    let db = (lp.values[b] - lp.values[b].floor() - 0.5).abs();
                    da.total_cmp(&db).then(a.cmp(&b))
                });

            match branch_var {
                None => {
                    // integer feasible: snap and consult the callback
                    let mut point = lp.values;
                    for &j in &int_vars {
                        point[j] = point[j].round();
                    }
                    let cb_start = Instant::now();
                    let action = callback(&point)?;
                    callback_time += cb_start.elapsed().as_secs_f64();
                    callback_calls += 1;
                    match action {
                        CallbackAction::Accept => {
                            let obj = spec.objective_value(&point);
                            let k = key_of(sense, obj);
                            if incumbent.as_ref().is_none_or(|(ik, _)| k > *ik) {
                                incumbent = Some((k, point));
                            }
                            continue 'search;
                        }
                        CallbackAction::AddCuts { cuts, incumbent: injected } => {
                            if cuts.is_empty() {
                                return Err(Error::InvalidConfig(
                                    "callback rejected a point without supplying cuts".into(),
                                ));
                            }
                            for cut in cuts {
                                spec.add_constraint(cut.row);
                                cuts_added += 1;
                            }
                            if let Some(p) = injected {
                                validate_incumbent(spec, &p)?;
                                let k = key_of(sense, spec.objective_value(&p));
                                if incumbent.as_ref().is_none_or(|(ik, _)| k > *ik) {
                                    incumbent = Some((k, p));
                                }
                            }
                            if out_of_time(&start) {
                                hit_limit = true;
                                interrupted_key = Some(node_key);
                                break 'search;
                            }
                            // same node, grown model
                        }
                    }
                }
                Some(j) => {
                    let x = lp.values[j];
                    let (l, u) = node_bounds[j];
                    let mut down = node_bounds.clone();
                    down[j] = (l, x.floor());
                    let mut up = node_bounds;
                    up[j] = (x.floor() + 1.0, u);
                    heap.push(Node {
                        key: node_key,
                        id: next_id,
                        bounds: down,
                    });
                    heap.push(Node {
                        key: node_key,
                        id: next_id + 1,
                        bounds: up,
                    });
                    next_id += 2;
                    continue 'search;
                }
            }
        }
    }

    // best still-open bound, folded with the incumbent
    let open_key = heap
        .peek()
        .map(|n| n.key)
        .into_iter()
        .chain(interrupted_key)
        .fold(f64::NEG_INFINITY, f64::max);
    match incumbent {
        Some((inc_key, point)) => {
            let objective = spec.objective_value(&point);
            let bound_key = if hit_limit { open_key.max(inc_key) } else { inc_key };
            Ok(MilpSolution {
                status: if hit_limit { MilpStatus::Limit } else { MilpStatus::Optimal },
                values: point,
                objective,
                bound: key_of(sense, bound_key),
                nodes,
                callback_calls,
                callback_time,
                cuts_added,
            })
        }
        None => Ok(MilpSolution {
            status: if hit_limit { MilpStatus::Limit } else { MilpStatus::Infeasible },
            values: Vec::new(),
            objective: f64::NAN,
            bound: if hit_limit && open_key.is_finite() {
                key_of(sense, open_key)
            } else {
                f64::NAN
            },
            nodes,
            callback_calls,
            callback_time,
            cuts_added,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, CutSpec, RowSense, VarKind};

    fn accept() -> impl FnMut(&[f64]) -> Result<CallbackAction> {
        |_: &[f64]| Ok(CallbackAction::Accept)
    }

    fn small_knapsack() -> ModelSpec {
        let mut m = ModelSpec::new("knap", Sense::Maximize);
        for (i, _) in [2.0, 3.0, 1.0].iter().enumerate() {
            m.add_var(VarKind::Selection(i), format!("x{i}"), 0.0, 1.0, true);
        }
        m.add_constraint(Constraint::new(
            "w",
            vec![(0, 2.0), (1, 3.0), (2, 1.0)],
            RowSense::Le,
            5.0,
        ));
        m.set_objective(vec![(0, 5.0), (1, 4.0), (2, 3.0)]);
        m
    }

    #[test]
    fn solves_a_binary_knapsack() {
        let mut spec = small_knapsack();
        let mut cb = accept();
        let out = branch_and_bound(&mut spec, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective - 9.0).abs() < 1e-6);
        assert!((out.bound - 9.0).abs() < 1e-6);
        assert_eq!(out.values, vec![1.0, 1.0, 0.0]);
        assert!(out.nodes >= 1);
        // both branches of the fractional root are integral
        assert_eq!(out.callback_calls, 2);
    }

    #[test]
    fn minimization_flips_the_bounding() {
        let mut m = ModelSpec::new("cover", Sense::Minimize);
        for i in 0..3 {
            m.add_var(VarKind::Selection(i), format!("x{i}"), 0.0, 1.0, true);
        }
        // every pair covers, cheapest pair is {0, 2}
        m.add_constraint(Constraint::new("c", vec![(0, 1.0), (1, 1.0), (2, 1.0)], RowSense::Ge, 2.0));
        m.set_objective(vec![(0, 2.0), (1, 5.0), (2, 3.0)]);
        let mut cb = accept();
        let out = branch_and_bound(&mut m, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective - 5.0).abs() < 1e-6);
        assert_eq!(out.values, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn infeasible_integer_models_are_reported() {
        let mut m = ModelSpec::new("inf", Sense::Maximize);
        m.add_var(VarKind::Aux, "x", 0.0, 1.0, true);
        m.add_constraint(Constraint::new("a", vec![(0, 2.0)], RowSense::Eq, 1.0));
        m.set_objective(vec![(0, 1.0)]);
        let mut cb = accept();
        let out = branch_and_bound(&mut m, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Infeasible);
        assert!(out.values.is_empty());
    }

    #[test]
    fn unbounded_relaxations_error_out() {
        let mut m = ModelSpec::new("unb", Sense::Maximize);
        m.add_var(VarKind::Aux, "x", 0.0, f64::INFINITY, true);
        m.set_objective(vec![(0, 1.0)]);
        let mut cb = accept();
        match branch_and_bound(&mut m, Limits::default(), &[], &mut cb) {
            Err(Error::Unbounded) => {}
            other => panic!("expected Unbounded, got {other:?}"),
        }
    }

    #[test]
    fn cut_rounds_rerun_the_node_before_branching() {
        let mut m = ModelSpec::new("trace", Sense::Maximize);
        m.add_var(VarKind::Aux, "x", 0.0, 1.0, true);
        m.set_objective(vec![(0, 1.0)]);
        let mut seen = Vec::new();
        let mut cb = |point: &[f64]| {
            seen.push(point[0]);
            if point[0] > 0.5 {
                Ok(CallbackAction::AddCuts {
                    cuts: vec![CutSpec {
                        row: Constraint::new("cap", vec![(0, 1.0)], RowSense::Le, 0.5),
                        arc_id: 0,
                        solution_id: None,
                    }],
                    incumbent: None,
                })
            } else {
                Ok(CallbackAction::Accept)
            }
        };
        let out = branch_and_bound(&mut m, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert_eq!(seen, vec![1.0, 0.0]);
        assert_eq!(out.callback_calls, 2);
        assert_eq!(out.cuts_added, 1);
        assert!((out.objective - 0.0).abs() < 1e-9);
    }

    #[test]
    fn injected_incumbents_steer_the_search() {
        let mut spec = small_knapsack();
        let mut first = true;
        let mut cb = |point: &[f64]| {
            if first && point[0] > 0.5 {
                first = false;
                Ok(CallbackAction::AddCuts {
                    cuts: vec![CutSpec {
                        row: Constraint::new("ban0", vec![(0, 1.0)], RowSense::Le, 0.0),
                        arc_id: 0,
                        solution_id: None,
                    }],
                    incumbent: Some(vec![0.0, 1.0, 1.0]),
                })
            } else {
                Ok(CallbackAction::Accept)
            }
        };
        let out = branch_and_bound(&mut spec, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        // item 0 banned by the cut, the injected point is the optimum
        assert!((out.objective - 7.0).abs() < 1e-6);
        assert_eq!(out.values, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn bogus_injected_incumbents_are_rejected() {
        let mut spec = small_knapsack();
        let mut cb = |_: &[f64]| {
            Ok(CallbackAction::AddCuts {
                cuts: vec![CutSpec {
                    row: Constraint::new("noop", vec![(0, 1.0)], RowSense::Le, 1.0),
                    arc_id: 0,
                    solution_id: None,
                }],
                incumbent: Some(vec![1.0, 1.0, 1.0]), // weight 6 > 5
            })
        };
        match branch_and_bound(&mut spec, Limits::default(), &[], &mut cb) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("violates")),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }

        let mut spec = small_knapsack();
        let mut cb = |_: &[f64]| {
            Ok(CallbackAction::AddCuts {
                cuts: vec![],
                incumbent: None,
            })
        };
        match branch_and_bound(&mut spec, Limits::default(), &[], &mut cb) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("without supplying cuts")),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn node_limits_stop_early_with_a_bound() {
        let mut m = ModelSpec::new("big", Sense::Maximize);
        let n = 12;
        let mut w = Vec::new();
        let mut obj = Vec::new();
        for i in 0..n {
            m.add_var(VarKind::Selection(i), format!("x{i}"), 0.0, 1.0, true);
            w.push((i, (3 + (i * 7) % 11) as f64));
            obj.push((i, (5 + (i * 13) % 17) as f64));
        }
        m.add_constraint(Constraint::new("w", w, RowSense::Le, 20.0));
        m.set_objective(obj);
        let mut cb = accept();
        let out = branch_and_bound(
            &mut m,
            Limits {
                time: None,
                nodes: Some(1),
            },
            &[],
            &mut cb,
        )
        .unwrap();
        assert_eq!(out.status, MilpStatus::Limit);
        assert_eq!(out.nodes, 1);
        assert!(out.bound.is_finite());
        if !out.values.is_empty() {
            assert!(out.objective <= out.bound + 1e-9);
        }
    }

    #[test]
    fn warm_incumbents_bound_the_search() {
        let mut spec = small_knapsack();
        let mut cb = accept();
        let warm = vec![vec![1.0, 1.0, 0.0]]; // already optimal
        let out = branch_and_bound(&mut spec, Limits::default(), &warm, &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective - 9.0).abs() < 1e-9);

        let mut spec = small_knapsack();
        let mut cb = accept();
        let bad = vec![vec![1.0, 1.0, 1.0]]; // over capacity
        match branch_and_bound(&mut spec, Limits::default(), &bad, &mut cb) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("violates")),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn reruns_are_bitwise_deterministic() {
        let run = || {
            let mut spec = small_knapsack();
            let mut calls = 0u64;
            let mut cb = |point: &[f64]| {
                calls += 1;
                if point[2] > 0.5 && calls == 1 {
                    Ok(CallbackAction::AddCuts {
                        cuts: vec![CutSpec {
                            row: Constraint::new("ban2", vec![(2, 1.0)], RowSense::Le, 0.0),
                            arc_id: 0,
                            solution_id: None,
                        }],
                        incumbent: None,
                    })
                } else {
                    Ok(CallbackAction::Accept)
                }
            };
            let out = branch_and_bound(&mut spec, Limits::default(), &[], &mut cb).unwrap();
            (out.objective, out.values, out.nodes, out.callback_calls)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn continuous_models_need_no_branching() {
        let mut m = ModelSpec::new("lp", Sense::Maximize);
        m.add_var(VarKind::Aux, "x", 0.0, 2.5, false);
        m.set_objective(vec![(0, 2.0)]);
        let mut cb = accept();
        let out = branch_and_bound(&mut m, Limits::default(), &[], &mut cb).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective - 5.0).abs() < 1e-9);
        assert_eq!(out.nodes, 1);
    }

    #[test]
    fn mixed_integer_models_keep_continuous_freedom() {
        // max 3 x + y, x binary, y in [0, 1.5], x + y <= 2
        let mut m = ModelSpec::new("mix", Sense::Maximize);
        m.add_var(VarKind::Aux, "x", 0.0, 1.0, true);
        m.add_var(VarKind::Aux, "y", 0.0, 1.5, false);
        m.add_constraint(Constraint::new("c", vec![(0, 1.0), (1, 1.0)], RowSense::Le, 2.0));
        m.set_objective(vec![(0, 3.0), (1, 1.0)]);
        let mut cb = accept();
        let out = branch_and_bound(&mut m, Limits::default(), &[], &mut cb).unwrap();
        assert!((out.objective - 4.0).abs() < 1e-9);
        assert!((out.values[0] - 1.0).abs() < 1e-9);
        assert!((out.values[1] - 1.0).abs() < 1e-9);
    }
}
