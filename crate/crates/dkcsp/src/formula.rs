//! Data model for (d,k)-CSP formulas.
//!
//! A formula over `n` variables with domain `[d] = {1, ..., d}` is a
//! conjunction of constraints, each a disjunction of disequality literals
//! `(x != c)`. Variables are indexed `0..n` internally; the instance file
//! format uses 1-based indices. Values are always `1..=d`.
//!
//! All types here are immutable after construction and cheap to share
//! between threads; every operation is pure.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on `d^n` for the brute-force enumeration oracles.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// A disequality literal `(x != c)`: satisfied by any assignment giving
/// `var` a value other than `forbidden`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    /// Variable index, `0..n` of the owning formula.
    pub var: usize,
    /// The single excluded value, `1..=d`.
    pub forbidden: u32,
}

impl Literal {
    pub fn new(var: usize, forbidden: u32) -> Self {
        Literal { var, forbidden }
    }

    /// True iff `a` gives `var` a value other than `forbidden`.
    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        a.value(self.var) != self.forbidden
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!={}", self.var + 1, self.forbidden)
    }
}

/// A disjunction of literals. The empty constraint is unsatisfiable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    literals: Vec<Literal>,
}

impl Constraint {
    pub fn new(literals: Vec<Literal>) -> Self {
        Constraint { literals }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|lit| lit.is_satisfied_by(a))
    }

    /// Number of distinct literals; duplicates do not count towards the
    /// width of a constraint.
    pub fn normalized_len(&self) -> usize {
        let mut distinct: Vec<Literal> = Vec::with_capacity(self.literals.len());
        for &lit in &self.literals {
            if !distinct.contains(&lit) {
                distinct.push(lit);
            }
        }
        distinct.len()
    }

    /// Copy with duplicate literals collapsed, keeping first occurrences.
    pub fn normalized(&self) -> Constraint {
        let mut literals: Vec<Literal> = Vec::with_capacity(self.literals.len());
        for &lit in &self.literals {
            if !literals.contains(&lit) {
                literals.push(lit);
            }
        }
        Constraint { literals }
    }
}

/// A total assignment: one value in `1..=d` per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    values: Vec<u32>,
}

impl Assignment {
    pub fn new(values: Vec<u32>) -> Self {
        Assignment { values }
    }

    /// The all-ones assignment (the planted normalization used throughout).
    pub fn all_ones(n: usize) -> Self {
        Assignment { values: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, var: usize) -> u32 {
        self.values[var]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Copy with `var` switched to `c` (the paper's `alpha[x -> c]`).
    pub fn with_value(&self, var: usize, c: u32) -> Assignment {
        let mut values = self.values.clone();
        values[var] = c;
        Assignment { values }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// An assignment to a subset of the variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    values: Vec<Option<u32>>,
}

impl PartialAssignment {
    pub fn new(n: usize) -> Self {
        PartialAssignment {
            values: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: usize) -> Option<u32> {
        self.values[var]
    }

    pub fn set(&mut self, var: usize, c: u32) {
        self.values[var] = Some(c);
    }

    pub fn assigned_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Total assignment, if every variable is set.
    pub fn into_assignment(self) -> Option<Assignment> {
        let values: Option<Vec<u32>> = self.values.into_iter().collect();
        values.map(Assignment::new)
    }
}

/// An immutable (d,k)-CSP formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    d: u32,
    n: usize,
    constraints: Vec<Constraint>,
}

impl Formula {
    /// Builds a formula, validating every literal against `d` and `n`.
    pub fn new(d: u32, n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if d < 1 {
            return Err(Error::arg("domain size d must be >= 1"));
        }
        for constraint in &constraints {
            for lit in constraint.literals() {
                if lit.var >= n {
                    return Err(Error::arg(format!(
                        "literal variable {} out of range for n={}",
                        lit.var + 1,
                        n
                    )));
                }
                if lit.forbidden < 1 || lit.forbidden > d {
                    return Err(Error::arg(format!(
                        "literal value {} out of range for d={}",
                        lit.forbidden, d
                    )));
                }
            }
        }
        Ok(Formula { d, n, constraints })
    }

    /// Formula with no constraints; every assignment satisfies it.
    pub fn empty(d: u32, n: usize) -> Self {
        Formula::new(d, n, Vec::new()).expect("empty formula is always valid")
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Maximum constraint width, measured after normalization
    /// (duplicate literals collapsed). 0 for a formula with no constraints.
    pub fn width(&self) -> usize {
        self.constraints
            .iter()
            .map(Constraint::normalized_len)
            .max()
            .unwrap_or(0)
    }

    /// Copy with duplicate literals collapsed within each constraint.
    pub fn normalize(&self) -> Formula {
        Formula {
            d: self.d,
            n: self.n,
            constraints: self.constraints.iter().map(Constraint::normalized).collect(),
        }
    }

    /// Size of the assignment space `d^n`, or `None` on overflow.
    pub fn assignment_space(&self) -> Option<u128> {
        let mut total: u128 = 1;
        for _ in 0..self.n {
            total = total.checked_mul(u128::from(self.d))?;
            if total > u128::MAX / 2 {
                return None;
            }
        }
        Some(total)
    }

    fn check_var(&self, x: usize) -> Result<()> {
        if x >= self.n {
            return Err(Error::arg(format!(
                "variable {} out of range for n={}",
                x + 1,
                self.n
            )));
        }
        Ok(())
    }

    fn check_value(&self, c: u32) -> Result<()> {
        if c < 1 || c > self.d {
            return Err(Error::arg(format!(
                "value {} out of range for d={}",
                c, self.d
            )));
        }
        Ok(())
    }

    /// The paper's `F^[x -> c]`: constraints satisfied by the substitution
    /// are dropped, the literal `(x != c)` is removed where it occurs, and
    /// `n` and `d` are unchanged (the variable simply no longer occurs).
    pub fn substitute(&self, x: usize, c: u32) -> Result<Formula> {
        self.check_var(x)?;
        self.check_value(c)?;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        'outer: for constraint in &self.constraints {
            for lit in constraint.literals() {
                if lit.var == x && lit.forbidden != c {
                    // Satisfied: x takes a value other than the forbidden one.
                    continue 'outer;
                }
            }
            let remaining: Vec<Literal> = constraint
                .literals()
                .iter()
                .copied()
                .filter(|lit| lit.var != x)
                .collect();
            constraints.push(Constraint::new(remaining));
        }
        Ok(Formula {
            d: self.d,
            n: self.n,
            constraints,
        })
    }

    /// True iff every constraint has a literal `(x != c)` with `a(x) != c`.
    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        assert_eq!(a.len(), self.n, "assignment must be total");
        self.constraints.iter().all(|ct| ct.is_satisfied_by(a))
    }

    /// All satisfying assignments in lexicographic order. Brute-force oracle;
    /// refuses when `d^n` exceeds [`BRUTE_FORCE_CAP`].
    pub fn sat_set(&self) -> Result<Vec<Assignment>> {
        let space = self.assignment_space().unwrap_or(u128::MAX);
        if space > BRUTE_FORCE_CAP {
            return Err(Error::too_large(format!(
                "d^n = {}^{} exceeds the {} assignment cap",
                self.d, self.n, BRUTE_FORCE_CAP
            )));
        }
        let mut out = Vec::new();
        self.for_each_assignment(|a| {
            if self.is_satisfied(a) {
                out.push(a.clone());
            }
            true
        });
        Ok(out)
    }

    /// Visits every assignment in lexicographic order until `visit` returns
    /// false. Callers are responsible for the size guard.
    pub(crate) fn for_each_assignment(&self, mut visit: impl FnMut(&Assignment) -> bool) {
        let mut current = Assignment::all_ones(self.n);
        loop {
            if !visit(&current) {
                return;
            }
            // Odometer increment, last variable fastest.
            let mut pos = self.n;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                if current.values[pos] < self.d {
                    current.values[pos] += 1;
                    break;
                }
                current.values[pos] = 1;
            }
        }
    }

    /// Values `c` such that the formula contains the unit constraint
    /// `(x != c)`. The ppz allowed set is the complement in `1..=d`.
    pub fn unit_forbidden(&self, x: usize) -> BTreeSet<u32> {
        let mut forbidden = BTreeSet::new();
        for constraint in &self.constraints {
            if let [lit] = constraint.literals() {
                if lit.var == x {
                    forbidden.insert(lit.forbidden);
                }
            }
        }
        forbidden
    }

    /// Complement of [`Formula::unit_forbidden`]: the allowed values for `x`
    /// in ascending order.
    pub fn allowed_values(&self, x: usize) -> Vec<u32> {
        let forbidden = self.unit_forbidden(x);
        (1..=self.d).filter(|c| !forbidden.contains(c)).collect()
    }

    /// Looseness of `a` at `x`: the number of values `c` for which
    /// `a[x -> c]` still satisfies the formula. Always in `1..=d` since
    /// `c = a(x)` counts.
    pub fn looseness(&self, a: &Assignment, x: usize) -> Result<u32> {
        self.check_var(x)?;
        if !self.is_satisfied(a) {
            return Err(Error::arg("assignment does not satisfy the formula"));
        }
        let mut count = 0;
        for c in 1..=self.d {
            if self.is_satisfied(&a.with_value(x, c)) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// A constraint satisfied by `a` but not by `a[x -> c]`, or `None` when
    /// the switched assignment still satisfies the formula. Such a constraint
    /// necessarily contains the literal `(x != c)`, with every other literal
    /// falsified by the switched assignment.
    ///
    /// Callers must pass a satisfying `a`.
    pub fn critical_constraint(&self, a: &Assignment, x: usize, c: u32) -> Option<&Constraint> {
        let switched = a.with_value(x, c);
        self.constraints
            .iter()
            .find(|ct| !ct.is_satisfied_by(&switched) && ct.is_satisfied_by(a))
    }

    /// Parses the line-oriented instance format. See the crate docs for the
    /// grammar; errors name the offending 1-based line.
    pub fn parse(text: &str) -> Result<Formula> {
        let mut header: Option<(u32, usize, usize)> = None;
        let mut constraints: Vec<Constraint> = Vec::new();
        let mut header_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line == "c" || line.starts_with("c ") {
                continue;
            }
            match header {
                None => {
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.len() != 5 || tokens[0] != "p" || tokens[1] != "csp" {
                        return Err(Error::parse(
                            line_no,
                            "expected header \"p csp <d> <n> <m>\"",
                        ));
                    }
                    let d: u32 = tokens[2]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "domain size is not an integer"))?;
                    let n: usize = tokens[3]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "variable count is not an integer"))?;
                    let m: usize = tokens[4]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "constraint count is not an integer"))?;
                    if d < 1 {
                        return Err(Error::parse(line_no, "domain size must be >= 1"));
                    }
                    header = Some((d, n, m));
                    header_line = line_no;
                }
                Some((d, n, m)) => {
                    if constraints.len() == m {
                        return Err(Error::parse(
                            line_no,
                            format!("unexpected content after {m} constraints"),
                        ));
                    }
                    constraints.push(parse_constraint_line(line, line_no, d, n)?);
                }
            }
        }

        let (d, n, m) = header.ok_or_else(|| Error::parse(1, "missing \"p csp\" header"))?;
        if constraints.len() != m {
            return Err(Error::parse(
                header_line,
                format!("header declares {m} constraints, found {}", constraints.len()),
            ));
        }
        Formula::new(d, n, constraints)
    }

    /// Serializes to the instance format, one constraint per line.
    /// `parse` of the output reproduces the formula exactly.
    pub fn to_instance_string(&self) -> String {
        let mut out = format!("p csp {} {} {}\n", self.d, self.n, self.constraints.len());
        for constraint in &self.constraints {
            let mut line = String::new();
            for lit in constraint.literals() {
                line.push_str(&format!("{lit} "));
            }
            line.push('0');
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_instance_string())
    }
}

fn parse_constraint_line(line: &str, line_no: usize, d: u32, n: usize) -> Result<Constraint> {
    let mut literals = Vec::new();
    let mut terminated = false;
    for token in line.split_whitespace() {
        if terminated {
            return Err(Error::parse(line_no, "token after terminating 0"));
        }
        if token == "0" {
            terminated = true;
            continue;
        }
        let (var_str, val_str) = token.split_once("!=").ok_or_else(|| {
            Error::parse(line_no, format!("malformed literal token \"{token}\""))
        })?;
        let var: usize = var_str.parse().map_err(|_| {
            Error::parse(line_no, format!("variable \"{var_str}\" is not an integer"))
        })?;
        let val: u32 = val_str.parse().map_err(|_| {
            Error::parse(line_no, format!("value \"{val_str}\" is not an integer"))
        })?;
        if var < 1 || var > n {
            return Err(Error::parse(
                line_no,
                format!("variable {var} out of range 1..={n}"),
            ));
        }
        if val < 1 || val > d {
            return Err(Error::parse(
                line_no,
                format!("value {val} out of range for d={d}"),
            ));
        }
        literals.push(Literal::new(var - 1, val));
    }
    if !terminated {
        return Err(Error::parse(line_no, "constraint line missing terminating 0"));
    }
    Ok(Constraint::new(literals))
}
