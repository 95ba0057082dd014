//! Solver-agnostic MILP descriptions.
//!
//! A [`ModelSpec`] lists variables with bounds and integrality, sparse
//! linear constraints, and one linear objective. Rows added after
//! construction (cuts) reference the same variable ids, so a model only
//! ever grows. [`to_lp_format`](ModelSpec::to_lp_format) dumps the model
//! in LP-file syntax for external-solver debugging:
//!
//! ```text
//! \ <name>
//! Maximize            (or Minimize)
//!  obj: + 1 s0 + 1 s1
//! Subject To
//!  knap: + 1 x0 + 2 x3 <= 3
//! Bounds
//!  t0 >= 0            (one line per non-default bound; "free", "= c",
//!  y1 = 0              or "a <= v <= b")
//! Binaries
//!  x0 x1
//! End
//! ```

use std::fmt::Write as _;

use crate::domain::Sense;
use crate::error::{Error, Result};

/// What a variable stands for in the reformulated bilevel program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Toll or interdiction decision on an item.
    Toll(usize),
    /// Follower's selection of an item.
    Selection(usize),
    /// Linearized revenue term s_i = t_i * x_i.
    McCormick(usize),
    /// Longest-path potential of a diagram node.
    Potential(usize),
    Aux,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub id: usize,
    pub kind: VarKind,
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

/// Sparse linear row `coeffs . vars  sense  rhs`. Coefficients are kept
/// sorted by variable id with duplicates merged and zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Constraint {
            name: name.into(),
            coeffs: normalize(coeffs),
            sense,
            rhs,
        }
    }

    /// Left-hand-side activity at a point given by dense variable values.
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Signed violation at a point: positive means the row is broken.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        match self.sense {
            RowSense::Le => a - self.rhs,
            RowSense::Ge => self.rhs - a,
            RowSense::Eq => (a - self.rhs).abs(),
        }
    }
}

fn normalize(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (j, c) in coeffs {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += c,
            _ => out.push((j, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

#[derive(Debug, Clone)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<(usize, f64)>,
}

/// One cutting plane derived from a diagram arc, with provenance.
#[derive(Debug, Clone)]
pub struct CutSpec {
    pub row: Constraint,
    pub arc_id: usize,
    /// Index of the separating follower solution, set by the solve loop.
    pub solution_id: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        ModelSpec {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense,
                coeffs: Vec::new(),
            },
        }
    }

    pub fn add_var(
        &mut self,
        kind: VarKind,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> usize {
        let id = self.variables.len();
        self.variables.push(Variable {
            id,
            kind,
            name: name.into(),
            lower,
            upper,
            integer,
        });
        id
    }

    pub fn set_bounds(&mut self, id: usize, lower: f64, upper: f64) {
        self.variables[id].lower = lower;
        self.variables[id].upper = upper;
    }

    pub fn add_constraint(&mut self, row: Constraint) -> usize {
        debug_assert!(row.coeffs.iter().all(|&(j, _)| j < self.variables.len()));
        self.constraints.push(row);
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) {
        self.objective.coeffs = normalize(coeffs);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Objective value at a dense point.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .coeffs
            .iter()
            .map(|&(j, c)| c * values[j])
            .sum()
    }

    /// Largest constraint violation at a dense point (bounds included).
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|r| r.violation(values))
            .fold(0.0f64, f64::max);
        let bounds = self
            .variables
            .iter()
            .map(|v| (v.lower - values[v.id]).max(values[v.id] - v.upper))
            .fold(0.0f64, f64::max);
        rows.max(bounds)
    }

    /// Structural checks: bounds ordered, coefficients finite and declared,
    /// integer variables bounded (the brancher needs finite ranges).
    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            if v.lower > v.upper {
                return Err(Error::InvalidConfig(format!(
                    "variable {} has crossed bounds",
                    v.name
                )));
            }
            if v.integer && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "integer variable {} is unbounded",
                    v.name
                )));
            }
        }
        for row in &self.constraints {
            for &(j, c) in &row.coeffs {
                if j >= self.variables.len() {
                    return Err(Error::InvalidConfig(format!(
                        "row {} references undeclared variable {j}",
                        row.name
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "row {} has a non-finite coefficient",
                        row.name
                    )));
                }
            }
            if !row.rhs.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "row {} has a non-finite rhs",
                    row.name
                )));
            }
        }
        for &(j, _) in &self.objective.coeffs {
            if j >= self.variables.len() {
                return Err(Error::InvalidConfig(
                    "objective references an undeclared variable".into(),
                ));
            }
        }
        Ok(())
    }

    /// LP-file dump (see the module doc for the grammar).
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ {}", self.name);
        s.push_str(match self.objective.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        s.push_str(" obj:");
        write_terms(&mut s, &self.objective.coeffs, &self.variables);
        s.push_str("\nSubject To\n");
        for row in &self.constraints {
            let _ = write!(s, " {}:", row.name);
            write_terms(&mut s, &row.coeffs, &self.variables);
            let _ = writeln!(s, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
        }
        s.push_str("Bounds\n");
        for v in &self.variables {
            if v.integer && v.lower == 0.0 && v.upper == 1.0 {
                continue;
            }
            if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                let _ = writeln!(s, " {} free", v.name);
            } else if v.lower == v.upper {
                let _ = writeln!(s, " {} = {}", v.name, fmt_num(v.lower));
            } else if v.upper == f64::INFINITY {
                let _ = writeln!(s, " {} >= {}", v.name, fmt_num(v.lower));
            } else {
                let _ = writeln!(s, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
            }
        }
        let binaries: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.integer && v.lower == 0.0 && v.upper == 1.0)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            let _ = writeln!(s, "Binaries\n {}", binaries.join(" "));
        }
        let generals: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.integer && !(v.lower == 0.0 && v.upper == 1.0))
            .map(|v| v.name.as_str())
            .collect();
        if !generals.is_empty() {
            let _ = writeln!(s, "Generals\n {}", generals.join(" "));
        }
        s.push_str("End\n");
        s
    }
}

fn write_terms(s: &mut String, coeffs: &[(usize, f64)], vars: &[Variable]) {
    if coeffs.is_empty() {
        s.push_str(" 0");
        return;
    }
    for &(j, c) in coeffs {
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(s, " {} {} {}", sign, fmt_num(c.abs()), vars[j].name);
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ModelSpec {
        let mut m = ModelSpec::new("toy", Sense::Maximize);
        let x = m.add_var(VarKind::Selection(0), "x0", 0.0, 1.0, true);
        let t = m.add_var(VarKind::Toll(0), "t0", 0.0, f64::INFINITY, false);
        let y = m.add_var(VarKind::Potential(0), "y0", f64::NEG_INFINITY, f64::INFINITY, false);
        let q = m.add_var(VarKind::Potential(1), "y1", 0.0, 0.0, false);
        m.add_constraint(Constraint::new(
            "c0",
            vec![(x, 1.0), (t, 2.0), (y, -1.0), (q, 1.0)],
            RowSense::Le,
            3.0,
        ));
        m.set_objective(vec![(t, 1.0)]);
        m
    }

    #[test]
    fn rows_are_normalized() {
        let row = Constraint::new(
            "r",
            vec![(3, 1.0), (1, 2.0), (3, -1.0), (2, 0.0), (0, 0.5)],
            RowSense::Ge,
            1.0,
        );
        assert_eq!(row.coeffs, vec![(0, 0.5), (1, 2.0)]);
        assert_eq!(row.violation(&[1.0, 1.0, 0.0, 0.0]), -1.5);
        assert_eq!(row.violation(&[0.0, 0.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn validation_rejects_malformed_models() {
        let mut m = toy();
        assert!(m.validate().is_ok());
        m.constraints.push(Constraint::new("bad", vec![(99, 1.0)], RowSense::Le, 0.0));
        assert!(m.validate().is_err());

        let mut m = toy();
        m.add_var(VarKind::Aux, "z", 0.0, f64::INFINITY, true);
        assert!(m.validate().is_err());

        let mut m = toy();
        m.variables[1].upper = -1.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn violation_measures_bounds_and_rows() {
        let m = toy();
        // x=1, t=2, y=1, q=0: c0 activity = 1+4-1 = 4 > 3
        assert!((m.max_violation(&[1.0, 2.0, 1.0, 0.0]) - 1.0).abs() < 1e-12);
        // q off its fixed bound
        assert!((m.max_violation(&[0.0, 0.0, 0.0, 0.4]) - 0.4).abs() < 1e-12);
        assert_eq!(m.max_violation(&[1.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn lp_dump_is_complete_and_stable() {
        let m = toy();
        let dump = m.to_lp_format();
        assert_eq!(dump, m.to_lp_format());
        assert!(dump.starts_with("\\ toy\nMaximize\n obj: + 1 t0\nSubject To\n"));
        assert!(dump.contains(" c0: + 1 x0 + 2 t0 - 1 y0 + 1 y1 <= 3\n"));
        assert!(dump.contains(" t0 >= 0\n"));
        assert!(dump.contains(" y0 free\n"));
        assert!(dump.contains(" y1 = 0\n"));
        assert!(dump.contains("Binaries\n x0\n"));
        assert!(dump.ends_with("End\n"));
        assert!(!dump.contains("Generals"));
    }

    #[test]
    fn empty_objective_dumps_a_zero() {
        let m = ModelSpec::new("empty", Sense::Minimize);
        let dump = m.to_lp_format();
        assert!(dump.contains("Minimize\n obj: 0\n"));
    }
}
