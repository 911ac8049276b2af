//! Solver and analysis toolkit for (d,k)-CSP formulas.
//!
//! A (d,k)-CSP formula is a conjunction of constraints over variables with
//! domain `{1, ..., d}`, each constraint a disjunction of at most `k`
//! disequality literals `(x != c)`. This crate provides:
//!
//! - [`formula`]: the immutable data model, instance-file parser,
//!   satisfaction tests, and brute-force oracles;
//! - [`solver`]: the ppz algorithm (random variable order, unit-constraint
//!   pruning, uniform guessing), a repeated-trial driver, a random-walk
//!   baseline, and a brute-force fallback;
//! - [`analysis`]: exact success/return probabilities by permutation
//!   enumeration, allowed-set distributions, and Monte Carlo estimation;
//! - [`bounds`]: the per-variable success exponent G(d,k) by adaptive
//!   quadrature and by a beta-function closed form, plus comparison
//!   exponents;
//! - [`submodular`]: functions on the boolean cube, monotonicity and
//!   submodularity checks, gluing restrictions, and the correlation
//!   inequalities behind the G(d,k) bound;
//! - [`generators`]: planted, worst-case-patterned, and uniform random
//!   instance families;
//! - [`cli`]: the command-line front end.

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod formula;
pub mod generators;
pub mod solver;
pub mod submodular;

pub use error::{Error, Result};
pub use formula::{Assignment, Constraint, Formula, Literal, PartialAssignment};
