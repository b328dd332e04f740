//! Mixed-integer models for the Steiner formulation, its strengthenings and
//! the complete-graph baseline, with exact feasibility checking and LP-file
//! export. No solver is embedded; see [`backend`] for plugging one in.

pub mod backend;
mod lp;
mod projection;
mod scf;
mod scfs;
mod solution;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use lp::{emit_lp, parse_lp, LpParseError};
pub use projection::{closure_objective, project_solution, project_solution_by_paths, Projection};
pub use scf::{build_scf, closure_matrices, scf_tour_assignment};
pub use scfs::{
    add_cut_inequalities, add_forced_arc_constraints, add_intersection_connexity,
    add_pattern_constraints, build_formulation, build_scfs, cut_sets, n_required_before,
    strengthen_flow_bounds, CutFamily, CutSet, CutStats, Formulation,
};
pub use solution::{assignment_from_tour, complete_auxiliaries, flows_along_walk};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MilpError {
    #[error("arc ({0}, {1}) does not exist in the graph")]
    UnknownArc(usize, usize),
    #[error("unknown formulation `{0}` (expected scfs, scfs+ or scf)")]
    UnknownFormulation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: i64,
    pub upper: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// `Σ coef · var  sense  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// A minimisation model with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, i64)>,
    /// Pattern gadgets `(z, q, r)` with `z = q ∧ r`.
    gadgets: Vec<(usize, usize, usize)>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable, or returns the existing one of that name.
    pub fn add_variable(&mut self, name: &str, kind: VarKind, lower: i64, upper: Option<i64>) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.variables.len();
        self.variables.push(Variable { name: name.to_string(), kind, lower, upper });
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, i64)] {
        &self.objective
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, i64)>) {
        self.objective = terms;
    }

    /// Appends a row; zero coefficients are dropped.
    pub fn add_constraint(&mut self, name: impl Into<String>, mut terms: Vec<(usize, i64)>, sense: Sense, rhs: i64) {
        terms.retain(|t| t.1 != 0);
        self.constraints.push(Constraint { name: name.into(), terms, sense, rhs });
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub(crate) fn add_gadget(&mut self, z: usize, q: usize, r: usize) {
        self.gadgets.push((z, q, r));
    }

    pub fn gadgets(&self) -> &[(usize, usize, usize)] {
        &self.gadgets
    }

    /// Constraints whose name starts with `prefix`.
    pub fn count_with_prefix(&self, prefix: &str) -> usize {
        self.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }
}

/// Variable values by name; absent variables are zero.
pub type Assignment = HashMap<String, Rational>;

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-2`, `0.25`, `1/3` or `1.5e2` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n.trim().parse().ok()?, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Reads `name value` lines; blank lines and lines starting with `#` are
/// skipped.
pub fn parse_assignment(text: &str) -> Result<Assignment, String> {
    let mut out = Assignment::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected `name value`", no + 1));
        };
        let value = parse_rational(value).ok_or_else(|| format!("line {}: bad value `{value}`", no + 1))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// `name value` lines sorted by name, values printed exactly.
pub fn format_assignment(assignment: &Assignment) -> String {
    let mut names: Vec<&String> = assignment.keys().collect();
    names.sort();
    names.iter().map(|n| format!("{} {}\n", n, assignment[*n])).collect()
}

/// Outcome of [`feasibility_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub objective: Rational,
    /// Names of violated constraints, then `bound:<var>` and
    /// `integrality:<var>` entries.
    pub violations: Vec<String>,
    /// Assignment entries naming no model variable.
    pub unknown: Vec<String>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every constraint and bound exactly. With `relaxed`,
/// integrality is not required.
pub fn feasibility_check(model: &MilpModel, assignment: &Assignment, relaxed: bool) -> Feasibility {
    let zero = Rational::zero();
    let values: Vec<&Rational> =
        model.variables.iter().map(|v| assignment.get(&v.name).unwrap_or(&zero)).collect();
    let eval = |terms: &[(usize, i64)]| -> Rational {
        terms.iter().fold(Rational::zero(), |acc, &(var, coef)| acc + values[var] * rational(coef))
    };
    let mut violations = Vec::new();
    for c in &model.constraints {
        let lhs = eval(&c.terms);
        let rhs = rational(c.rhs);
        let ok = match c.sense {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        };
        if !ok {
            violations.push(c.name.clone());
        }
    }
    for (v, value) in model.variables.iter().zip(&values) {
        if **value < rational(v.lower) || v.upper.is_some_and(|u| **value > rational(u)) {
            violations.push(format!("bound:{}", v.name));
        }
        if !relaxed && v.kind == VarKind::Integer && !value.is_integer() {
            violations.push(format!("integrality:{}", v.name));
        }
    }
    let mut unknown: Vec<String> =
        assignment.keys().filter(|k| !model.index.contains_key(*k)).cloned().collect();
    unknown.sort();
    Feasibility { objective: eval(&model.objective), violations, unknown }
}

pub(crate) fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3"), Some(rational(3)));
        assert_eq!(parse_rational("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational("1/3"), Some(ratio(1, 3)));
        assert_eq!(parse_rational("1.5e2"), Some(rational(150)));
        assert_eq!(parse_rational("2.5E-1"), Some(ratio(1, 4)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn assignment_round_trip() {
        let text = "# comment\nx_0_1 1\ny_0_1 1/2\n\n";
        let a = parse_assignment(text).unwrap();
        assert_eq!(a["y_0_1"], ratio(1, 2));
        assert_eq!(parse_assignment(&format_assignment(&a)).unwrap(), a);
        assert!(parse_assignment("x 1 2").is_err());
    }

    #[test]
    fn feasibility_is_exact() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", VarKind::Integer, 0, None);
        let y = m.add_variable("y", VarKind::Continuous, 0, Some(1));
        m.set_objective(vec![(x, 3), (y, 1)]);
        m.add_constraint("sum", vec![(x, 1), (y, 1)], Sense::Ge, 1);
        m.add_constraint("link", vec![(y, 3), (x, -1)], Sense::Eq, 0);
        let mut a = Assignment::new();
        a.insert("x".into(), ratio(3, 4));
        a.insert("y".into(), ratio(1, 4));
        let relaxed = feasibility_check(&m, &a, true);
        assert!(relaxed.is_feasible(), "{:?}", relaxed.violations);
        assert_eq!(relaxed.objective, rational(5) / rational(2));
        let strict = feasibility_check(&m, &a, false);
        assert_eq!(strict.violations, vec!["integrality:x".to_string()]);
        a.insert("w".into(), rational(1));
        assert_eq!(feasibility_check(&m, &a, true).unknown, vec!["w".to_string()]);
        let empty = feasibility_check(&m, &Assignment::new(), true);
        assert_eq!(empty.violations, vec!["sum".to_string()]);
    }
}
