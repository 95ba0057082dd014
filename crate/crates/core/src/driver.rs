//! Outer cutting-plane loops for pricing and interdiction.
//!
//! A solve builds an initial diagram, reformulates it into a master
//! program, and hands the master to the engine with a callback. Every
//! integer-feasible candidate is checked against the follower's true best
//! response: a candidate whose response is not follower-optimal is cut off
//! by inserting the best response into the diagram (new arcs become new
//! master rows), and the bilevel-feasible pair made of the candidate's
//! tolls and the true response enters the search as an incumbent, so the
//! primal side never starves while cuts accumulate.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{
    self, dd_add_solution, direct_solution_arc, sd_add_solution, Diagram, DiagramKind,
};
use crate::domain::{
    FollowerSolution, ItemSet, Payload, PricingInstance, Sense, SolveResult, SolveStats,
    SolveStatus, TollVector,
};
use crate::error::{Error, Result};
use crate::milp::{self, CallbackAction, Limits, MilpSolution, MilpStatus};
use crate::reformulate::{build_kip_master, build_master, cut_from_arc, MasterModel, MasterVars};

/// Initial-diagram recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Two-node diagram; every cut is a direct solution arc.
    ValueFunction,
    /// Selection diagram seeded with one random pair from each of
    /// `samples` sampled solutions.
    Selection { samples: usize },
    /// Decision diagram seeded with `samples` sampled trajectories over
    /// `groups` item groups (None decides one item per layer).
    Decision { samples: usize, groups: Option<usize> },
}

/// How cuts reach the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Cuts are added lazily inside a single branch-and-bound run.
    #[default]
    NativeCallback,
    /// The master is re-solved from scratch after every cut round.
    IterativeResolve,
}

impl SolveMode {
    fn backend_name(self) -> &'static str {
        match self {
            SolveMode::NativeCallback => "builtin",
            SolveMode::IterativeResolve => "iterative",
        }
    }
}

/// Full solve configuration.
#[derive(Debug, Clone, Copy)]
pub struct MethodConfig {
    pub method: Method,
    pub mode: SolveMode,
    /// Absolute tolerance on follower-value comparisons.
    pub eps: f64,
    pub limits: Limits,
    /// Seed shared by every sampling step of the solve.
    pub seed: u64,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            mode: SolveMode::default(),
            eps: 1e-6,
            limits: Limits::default(),
            seed: 0,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Method::Decision {
            groups: Some(m), ..
        } = self.method
        {
            if m == 0 || m > n {
                return Err(Error::InvalidConfig(format!(
                    "grouping into {m} groups needs 1 <= groups <= {n}"
                )));
            }
        }
        if !self.eps.is_finite() || self.eps < 0.0 {
            return Err(Error::InvalidConfig("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Solves a pricing instance, discarding the refined diagram.
pub fn solve_cpp(inst: &PricingInstance, config: &MethodConfig) -> Result<SolveResult> {
    solve_cpp_with_diagram(inst, config).map(|(res, _)| res)
}

/// Solves a pricing instance and returns the diagram as refined by the
/// cut loop (its arcs are exactly the master's follower-rationality rows).
pub fn solve_cpp_with_diagram(
    inst: &PricingInstance,
    config: &MethodConfig,
) -> Result<(SolveResult, Diagram)> {
    if matches!(inst.payload, Payload::Interdiction(_)) {
        return Err(Error::InvalidConfig(
            "interdiction instances use solve_kip".into(),
        ));
    }
    config.validate(inst.n)?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut diag = grow_initial(inst, config, &mut rng)?;
    let MasterModel { mut spec, vars } = build_master(inst, &diag)?;
    let n_vars = spec.num_vars();
    let follower = inst.follower();
    let sense = inst.sense();
    let eps = config.eps;
    let dead = dead_potential(inst, &vars);
    let mut rejections = 0u64;

    let mut callback = |point: &[f64]| -> Result<CallbackAction> {
        let t_vals = clamp_tolls(vars.tolls(point));
        let tolls = TollVector::new(t_vals.clone(), &inst.tolled)?;
        let x_tilde = vars.selection(point);
        let (x_hat, best_value) = follower.best_response(&tolls, tolls.as_slice())?;
        let cand_value = follower.objective(&x_tilde, &tolls);
        if !sense.strictly_better(best_value, cand_value, eps) {
            return Ok(CallbackAction::Accept);
        }
        rejections += 1;
        let arcs = insert_solution(&mut diag, inst, x_hat.set(), &mut rng)?;
        let cuts = arcs
            .iter()
            .map(|&aid| cut_from_arc(&vars, diag.arc(aid), inst))
            .collect();
        let incumbent = cpp_master_point(inst, &diag, &vars, n_vars, &tolls, x_hat.set(), dead)?;
        Ok(CallbackAction::AddCuts {
            cuts,
            incumbent: Some(incumbent),
        })
    };
    let backend = milp::backend(config.mode.backend_name())?;
    let sol = backend.solve(&mut spec, config.limits, &[], &mut callback)?;

    let result = finish(inst, &vars, &*follower, sol, started, true, rejections)?;
    Ok((result, diag))
}

/// Solves an interdiction instance, discarding the refined diagram.
pub fn solve_kip(inst: &PricingInstance, config: &MethodConfig) -> Result<SolveResult> {
    solve_kip_with_diagram(inst, config).map(|(res, _)| res)
}

/// Interdiction variant of the cut loop: the candidate is accepted once
/// its guaranteed follower value reaches the true optimum under the
/// candidate interdiction, and rejected candidates insert the follower's
/// maximizer into the diagram.
pub fn solve_kip_with_diagram(
    inst: &PricingInstance,
    config: &MethodConfig,
) -> Result<(SolveResult, Diagram)> {
    if !matches!(inst.payload, Payload::Interdiction(_)) {
        return Err(Error::InvalidConfig(
            "pricing instances use solve_cpp".into(),
        ));
    }
    config.validate(inst.n)?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut diag = grow_initial(inst, config, &mut rng)?;
    let MasterModel { mut spec, vars } = build_kip_master(inst, &diag)?;
    let n_vars = spec.num_vars();
    let follower = inst.follower();
    let eps = config.eps;
    let y_p = vars.y_var[diag.p()];
    let dead = dead_potential(inst, &vars);
    let zeros = vec![0.0; inst.n];
    let mut rejections = 0u64;

    let mut callback = |point: &[f64]| -> Result<CallbackAction> {
        let tolls = TollVector::new(clamp_tolls(vars.tolls(point)), &inst.tolled)?;
        let (x_hat, best_value) = follower.best_response(&tolls, &zeros)?;
        if point[y_p] >= best_value - eps {
            return Ok(CallbackAction::Accept);
        }
        rejections += 1;
        let arcs = insert_solution(&mut diag, inst, x_hat.set(), &mut rng)?;
        let cuts = arcs
            .iter()
            .map(|&aid| cut_from_arc(&vars, diag.arc(aid), inst))
            .collect();
        let incumbent = kip_master_point(inst, &diag, &vars, n_vars, &tolls, x_hat.set(), dead)?;
        Ok(CallbackAction::AddCuts {
            cuts,
            incumbent: Some(incumbent),
        })
    };
    let backend = milp::backend(config.mode.backend_name())?;
    let sol = backend.solve(&mut spec, config.limits, &[], &mut callback)?;

    let result = finish(inst, &vars, &*follower, sol, started, false, rejections)?;
    Ok((result, diag))
}

/// Post-hoc check of a reported result: the response must be feasible and
/// follower-optimal at the reported tolls, and the reported objective must
/// match a recomputation from scratch.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Follower value of the reported response at the reported tolls.
    pub response_value: f64,
    /// Optimistic best-response value at the reported tolls.
    pub best_value: f64,
    /// Leader objective recomputed from tolls and response.
    pub recomputed_objective: f64,
    pub issues: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn verify(inst: &PricingInstance, result: &SolveResult, eps: f64) -> Result<VerifyReport> {
    let follower = inst.follower();
    let tolls = &result.tolls;
    let mut issues = Vec::new();
    if !follower.is_feasible(result.response.set()) {
        issues.push("response is not follower-feasible".to_string());
    }
    let response_value = follower.objective(result.response.set(), tolls);
    let interdiction = matches!(inst.payload, Payload::Interdiction(_));
    let tiebreak = if interdiction {
        vec![0.0; inst.n]
    } else {
        tolls.as_slice().to_vec()
    };
    let (_, best_value) = follower.best_response(tolls, &tiebreak)?;
    if inst.sense().strictly_better(best_value, response_value, eps) {
        issues.push(format!(
            "response value {response_value} is beaten by {best_value} at these tolls"
        ));
    }
    let recomputed_objective = if interdiction {
        best_value
    } else {
        tolls.revenue(result.response.set())
    };
    if (recomputed_objective - result.revenue).abs() > eps {
        issues.push(format!(
            "reported objective {} disagrees with recomputed {recomputed_objective}",
            result.revenue
        ));
    }
    Ok(VerifyReport {
        response_value,
        best_value,
        recomputed_objective,
        issues,
    })
}

/// The diagram a solve with this configuration starts from, before any
/// cuts; seeded exactly like the solve itself.
pub fn initial_diagram(inst: &PricingInstance, config: &MethodConfig) -> Result<Diagram> {
    config.validate(inst.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    grow_initial(inst, config, &mut rng)
}

fn grow_initial(
    inst: &PricingInstance,
    config: &MethodConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Diagram> {
    match config.method {
        Method::ValueFunction => Ok(diagram::vf_init(inst)),
        Method::Selection { samples } => diagram::sd_init(inst, samples, rng),
        Method::Decision { samples, groups } => {
            let grouping = groups.map(|m| diagram::make_grouping(inst.n, m, rng));
            diagram::dd_init(inst, samples, grouping, rng)
        }
    }
}

/// Adds a follower solution to the diagram, returning the new arc ids.
/// A solution whose path is already fully present falls back to the
/// direct p-to-q arc; if even that arc exists the loop has stopped
/// making progress, which the candidate check rules out.
fn insert_solution(
    diag: &mut Diagram,
    inst: &PricingInstance,
    x: &ItemSet,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let arcs = match diag.kind {
        DiagramKind::ValueFunction | DiagramKind::Selection => {
            let (aid, new) = sd_add_solution(diag, x, rng);
            if new {
                vec![aid]
            } else {
                Vec::new()
            }
        }
        DiagramKind::Decision => dd_add_solution(diag, inst, x)?,
    };
    if !arcs.is_empty() {
        return Ok(arcs);
    }
    let (aid, new) = direct_solution_arc(diag, x);
    if new {
        Ok(vec![aid])
    } else {
        Err(Error::InvalidConfig(
            "cut loop made no progress on an already-represented solution".into(),
        ))
    }
}

fn clamp_tolls(mut t: Vec<f64>) -> Vec<f64> {
    for v in &mut t {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    t
}

/// Potential value assigned to nodes that cannot be completed; large
/// enough to keep every arc row slack in the relevant direction.
fn dead_potential(inst: &PricingInstance, vars: &MasterVars) -> f64 {
    let scale: f64 =
        inst.values_f64().iter().map(|v| v.abs()).sum::<f64>() + vars.m.iter().sum::<f64>() + 10.0;
    match inst.sense() {
        Sense::Maximize => -scale,
        Sense::Minimize => scale,
    }
}

/// Master-feasible point for the bilevel-feasible pair (tolls, x): the
/// linearization takes its products and the potentials take the exact
/// completion optima, which satisfy every arc row.
fn cpp_master_point(
    inst: &PricingInstance,
    diag: &Diagram,
    vars: &MasterVars,
    n_vars: usize,
    tolls: &TollVector,
    x: &ItemSet,
    dead: f64,
) -> Result<Vec<f64>> {
    let y = diagram::value_to_go(inst, diag, tolls, dead)?;
    let mut point = vec![0.0; n_vars];
    for i in 0..inst.n {
        if let Some(tj) = vars.t_var[i] {
            point[tj] = tolls.get(i);
        }
        if x.contains(i) {
            point[vars.x_var[i]] = 1.0;
            if let Some(sj) = vars.s_var[i] {
                point[sj] = tolls.get(i);
            }
        }
    }
    for (node, &val) in y.iter().enumerate() {
        point[vars.y_var[node]] = val;
    }
    Ok(point)
}

fn kip_master_point(
    inst: &PricingInstance,
    diag: &Diagram,
    vars: &MasterVars,
    n_vars: usize,
    tolls: &TollVector,
    x: &ItemSet,
    dead: f64,
) -> Result<Vec<f64>> {
    let y = diagram::value_to_go(inst, diag, tolls, dead)?;
    let mut point = vec![0.0; n_vars];
    for i in 0..inst.n {
        if let Some(tj) = vars.t_var[i] {
            point[tj] = tolls.get(i);
        }
        if x.contains(i) {
            point[vars.x_var[i]] = 1.0;
        }
    }
    for (node, &val) in y.iter().enumerate() {
        point[vars.y_var[node]] = val;
    }
    Ok(point)
}

/// Maps an engine outcome onto the driver's result type. With no
/// incumbent at a limit stop, the zero-toll response stands in as the
/// always-feasible answer.
fn finish(
    inst: &PricingInstance,
    vars: &MasterVars,
    follower: &dyn crate::domain::FollowerProblem,
    sol: MilpSolution,
    started: Instant,
    leader_maximizes: bool,
    rejections: u64,
) -> Result<SolveResult> {
    let status = match sol.status {
        MilpStatus::Optimal => SolveStatus::Optimal,
        MilpStatus::Limit => SolveStatus::Limit,
        MilpStatus::Infeasible => {
            return Err(Error::InvalidInstance("master model is infeasible".into()))
        }
    };
    let (tolls, response, revenue) = if sol.values.is_empty() {
        let t = TollVector::zeros(inst.n);
        let (x, value) = follower.best_response(&t, &vec![0.0; inst.n])?;
        let objective = if leader_maximizes { 0.0 } else { value };
        (t, x, objective)
    } else {
        let t = TollVector::new(clamp_tolls(vars.tolls(&sol.values)), &inst.tolled)?;
        if leader_maximizes {
            let x = FollowerSolution(vars.selection(&sol.values));
            (t, x, sol.objective)
        } else {
            // the interdiction master's selection block is a free witness,
            // so recompute the actual follower maximizer and its value
            let (x, value) = follower.best_response(&t, &vec![0.0; inst.n])?;
            (t, x, value)
        }
    };
    let bound = if sol.bound.is_finite() {
        sol.bound
    } else if leader_maximizes {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    let gap = SolveResult::compute_gap(revenue, bound, leader_maximizes);
    Ok(SolveResult {
        status,
        tolls,
        response,
        revenue,
        bound,
        gap,
        stats: SolveStats {
            total_time: started.elapsed().as_secs_f64(),
            callback_time: sol.callback_time,
            callback_calls: sol.callback_calls,
            bb_nodes: sol.nodes,
            cuts_added: sol.cuts_added,
            rejections,
        },
    })
}
