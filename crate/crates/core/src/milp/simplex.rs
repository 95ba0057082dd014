//! Dense two-phase primal simplex.
//!
//! Models arrive as [`ModelSpec`] rows plus per-variable bounds and are
//! rewritten to computational standard form (minimize, equality rows,
//! nonnegative variables): finite lower bounds shift, free variables split
//! into differences, upper bounds become explicit rows, and fixed
//! variables fold into the right-hand sides. Phase 1 drives artificials
//! out; phase 2 runs Dantzig pricing with a Bland fallback after a
//! degenerate streak.

use crate::domain::Sense;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, RowSense};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-7;
/// Smallest acceptable pivot magnitude.
const PIVOT_TOL: f64 = 1e-9;
/// Degenerate pivots in a row before switching to Bland's rule.
const BLAND_TRIGGER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Values in the model's own variable space (meaningful at Optimal).
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpOutcome {
    fn no_point(status: LpStatus, n: usize) -> Self {
        LpOutcome {
            status,
            values: vec![0.0; n],
            objective: f64::NAN,
        }
    }
}

/// How an original variable maps into standard-form columns.
#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// value = lower + z[col]
    Shifted { col: usize, lower: f64 },
    /// value = z[plus] - z[minus]
    Split { plus: usize, minus: usize },
    /// value = upper - z[col]
    Mirrored { col: usize, upper: f64 },
    /// value = the fixed bound
    Fixed(f64),
}

/// Solves the LP relaxation of `spec` under `bounds` (one (lower, upper)
/// pair per variable, replacing the declared bounds).
pub fn solve_lp(spec: &ModelSpec, bounds: &[(f64, f64)]) -> Result<LpOutcome> {
    let n_orig = spec.num_vars();
    debug_assert_eq!(bounds.len(), n_orig);
    for &(l, u) in bounds {
        if l > u {
            return Ok(LpOutcome::no_point(LpStatus::Infeasible, n_orig));
        }
    }

    // Column mapping and the constant contribution each variable makes to
    // a row with coefficient 1.
    let mut maps = Vec::with_capacity(n_orig);
    let mut n_cols = 0;
    for &(l, u) in bounds {
        let map = if l == u {
            ColMap::Fixed(l)
        } else if l.is_finite() {
            let col = n_cols;
            n_cols += 1;
            ColMap::Shifted { col, lower: l }
        } else if u.is_finite() {
            let col = n_cols;
            n_cols += 1;
            ColMap::Mirrored { col, upper: u }
        } else {
            let plus = n_cols;
            n_cols += 2;
            ColMap::Split {
                plus,
                minus: plus + 1,
            }
        };
        maps.push(map);
    }

    // Standard-form rows: body coefficients over structural columns, a
    // sense, and a folded rhs. Upper-bound rows come last.
    struct StdRow {
        body: Vec<f64>,
        sense: RowSense,
        rhs: f64,
    }
    let mut rows: Vec<StdRow> = Vec::with_capacity(spec.num_constraints());
    for con in spec.constraints() {
        let mut body = vec![0.0; n_cols];
        let mut rhs = con.rhs;
        for &(j, c) in &con.coeffs {
            match maps[j] {
                ColMap::Fixed(v) => rhs -= c * v,
                ColMap::Shifted { col, lower } => {
                    body[col] += c;
                    rhs -= c * lower;
                }
                ColMap::Mirrored { col, upper } => {
                    body[col] -= c;
                    rhs -= c * upper;
                }
                ColMap::Split { plus, minus } => {
                    body[plus] += c;
                    body[minus] -= c;
                }
            }
        }
        rows.push(StdRow {
            body,
            sense: con.sense,
            rhs,
        });
    }
    for (j, &(l, u)) in bounds.iter().enumerate() {
        if l.is_finite() && u.is_finite() && l < u {
            let mut body = vec![0.0; n_cols];
            match maps[j] {
                ColMap::Shifted { col, .. } => body[col] = 1.0,
                _ => unreachable!("finite two-sided bounds imply a shifted column"),
            }
            rows.push(StdRow {
                body,
                sense: RowSense::Le,
                rhs: u - l,
            });
        }
    }

    // Standard-form objective (minimize).
    let obj_sign = match spec.objective().sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut cost = vec![0.0; n_cols];
    for &(j, c) in &spec.objective().coeffs {
        let c = obj_sign * c;
        match maps[j] {
            ColMap::Fixed(_) => {}
            ColMap::Shifted { col, .. } => cost[col] += c,
            ColMap::Mirrored { col, .. } => cost[col] -= c,
            ColMap::Split { plus, minus } => {
                cost[plus] += c;
                cost[minus] -= c;
            }
        }
    }

    // Tableau: one slack/artificial block after the structural columns,
    // then the rhs column. Rows are normalized to nonnegative rhs first.
    let m = rows.len();
    let n_slack: usize = rows
        .iter()
        .filter(|r| {
            let flipped = r.rhs < 0.0;
            let sense = flip_sense(r.sense, flipped);
            sense != RowSense::Eq
        })
        .count();
    let mut n_art = 0;
    let total = n_cols + n_slack + m;
    let rhs_col = total;
    let mut tab = vec![vec![0.0; total + 1]; m + 1];
    let mut basis = vec![usize::MAX; m];
    let mut is_artificial = vec![false; total];
    let mut slack_at = n_cols;
    for (i, row) in rows.iter().enumerate() {
        let flipped = row.rhs < 0.0;
        let s = if flipped { -1.0 } else { 1.0 };
        for (j, &c) in row.body.iter().enumerate() {
            tab[i][j] = s * c;
        }
        tab[i][rhs_col] = s * row.rhs;
        match flip_sense(row.sense, flipped) {
            RowSense::Le => {
                tab[i][slack_at] = 1.0;
                basis[i] = slack_at;
                slack_at += 1;
            }
            RowSense::Ge => {
                tab[i][slack_at] = -1.0;
                slack_at += 1;
            }
            RowSense::Eq => {}
        }
        if basis[i] == usize::MAX {
            let art = n_cols + n_slack + n_art;
            n_art += 1;
            tab[i][art] = 1.0;
            is_artificial[art] = true;
            basis[i] = art;
        }
    }
    let total = n_cols + n_slack + n_art;
    for row in &mut tab {
        row[total] = row[rhs_col];
        row.truncate(total + 1);
    }
    let rhs_col = total;
    let is_artificial = &is_artificial[..total];

    let iter_cap = 2_000 * (m + total + 10);
    let mut iters = 0;

    // Phase 1: minimize the artificial sum.
    if n_art > 0 {
        for j in 0..=rhs_col {
            let mut rc = 0.0;
            for i in 0..m {
                if is_artificial[basis[i]] {
                    rc -= tab[i][j];
                }
            }
            tab[m][j] = rc;
        }
        for (j, &art) in is_artificial.iter().enumerate() {
            if art {
                tab[m][j] += 1.0;
            }
        }
        pivot_loop(&mut tab, &mut basis, m, rhs_col, Some(is_artificial), iter_cap, &mut iters)?;
        let infeas = -tab[m][rhs_col];
        if infeas > LP_TOL {
            return Ok(LpOutcome::no_point(LpStatus::Infeasible, n_orig));
        }
        // Pivot lingering artificials out, or drop their redundant rows.
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if !is_artificial[basis[i]] {
                continue;
            }
            let col = (0..n_cols + n_slack).find(|&j| tab[i][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => pivot(&mut tab, &mut basis, i, j),
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            tab.remove(i);
            basis.remove(i);
        }
    }
    let m = basis.len();

    // Phase 2: minimize the real cost over the feasible tableau.
    for j in 0..=rhs_col {
        let mut rc = if j < n_cols { cost[j] } else { 0.0 };
        for i in 0..m {
            let cb = if basis[i] < n_cols { cost[basis[i]] } else { 0.0 };
            rc -= cb * tab[i][j];
        }
        tab[m][j] = rc;
    }
    tab[m][rhs_col] = -(0..m)
        .map(|i| {
            let cb = if basis[i] < n_cols { cost[basis[i]] } else { 0.0 };
            cb * tab[i][rhs_col]
        })
        .sum::<f64>();
    let unbounded = !pivot_loop(
        &mut tab,
        &mut basis,
        m,
        rhs_col,
        Some(is_artificial),
        iter_cap,
        &mut iters,
    )?;
    if unbounded {
        return Ok(LpOutcome::no_point(LpStatus::Unbounded, n_orig));
    }

    // Extract the point in model space.
    let mut z = vec![0.0; total];
    for i in 0..m {
        z[basis[i]] = tab[i][rhs_col];
    }
    let mut values = vec![0.0; n_orig];
    for (j, map) in maps.iter().enumerate() {
        values[j] = match *map {
            ColMap::Fixed(v) => v,
            ColMap::Shifted { col, lower } => lower + z[col],
            ColMap::Mirrored { col, upper } => upper - z[col],
            ColMap::Split { plus, minus } => z[plus] - z[minus],
        };
    }
    let objective = spec.objective_value(&values);
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        values,
        objective,
    })
}

fn flip_sense(sense: RowSense, flipped: bool) -> RowSense {
    match (sense, flipped) {
        (RowSense::Le, true) => RowSense::Ge,
        (RowSense::Ge, true) => RowSense::Le,
        (s, _) => s,
    }
}

/// Runs simplex pivots until optimality (returns true), unboundedness
/// (returns false), or the iteration cap (error). `banned` columns never
/// enter the basis.
fn pivot_loop(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    m: usize,
    rhs_col: usize,
    banned: Option<&[bool]>,
    iter_cap: usize,
    iters: &mut usize,
) -> Result<bool> {
    let mut degenerate_streak = 0;
    loop {
        *iters += 1;
        if *iters > iter_cap {
            return Err(Error::LpStalled(*iters));
        }
        let use_bland = degenerate_streak >= BLAND_TRIGGER;
        let mut entering = None;
        let mut best = -LP_TOL;
        for j in 0..rhs_col {
            if banned.is_some_and(|b| b[j]) {
                continue;
            }
            let rc = tab[m][j];
            if rc < best {
                entering = Some(j);
                if use_bland {
                    break;
                }
                best = rc;
            }
        }
        let Some(e) = entering else {
            return Ok(true);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i][e];
            if a > PIVOT_TOL {
                let ratio = tab[i][rhs_col] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leave else {
            return Ok(false);
        };
        if ratio.abs() <= 1e-12 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        pivot(tab, basis, r, e);
    }
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], r: usize, e: usize) {
    let p = tab[r][e];
    for x in tab[r].iter_mut() {
        *x /= p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[e];
        if f != 0.0 {
            for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            row[e] = 0.0;
        }
    }
    basis[r] = e;
}
