//! Exact and Monte Carlo analysis of ppz.
//!
//! The exact oracles enumerate all `n!` variable orders. For a fixed target
//! assignment `alpha`, the allowed set `S(x, pi, alpha)` of a variable `x`
//! depends only on the *set* of variables processed before `x`, so the
//! per-assignment quantities are computed by dynamic programming over the
//! `2^n` prefix subsets, in exact rational arithmetic. The total success
//! probability is additionally computed by a second, independent route: a
//! weighted DFS over every variable order and every random value choice of
//! the algorithm. Both routes are exact and must agree.
//!
//! Enumeration is feasible for `n <= 8`; all entry points enforce guards.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula};
use crate::solver::{ppz_trial, Permutation};

/// Absolute tolerance on real-valued inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Maximum variable count for the permutation-enumeration oracles.
pub const MAX_EXACT_VARS: usize = 8;

/// The allowed set `S(x, pi, alpha)`: values not forbidden by a unit
/// constraint once the variables before `x` in `pi` are set per `alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllowedSet {
    pub variable: usize,
    pub values: BTreeSet<u32>,
}

/// Exact per-assignment quantities for one satisfying assignment.
#[derive(Debug, Clone, Serialize)]
pub struct AssignmentAnalysis {
    pub assignment: Assignment,
    /// Pr[ppz returns this assignment], averaged over all permutations.
    pub return_prob: f64,
    /// E[log2 |S(x, pi, alpha)|] per variable.
    pub expected_log_allowed: Vec<f64>,
    /// The Jensen lower bound `2^(-sum_x E[log2 |S|])`.
    pub jensen_bound: f64,
    /// `return_prob - jensen_bound` (nonnegative up to tolerance).
    pub jensen_gap: f64,
}

/// Exact success-probability report over all satisfying assignments.
#[derive(Debug, Clone, Serialize)]
pub struct ExactReport {
    pub per_assignment: Vec<AssignmentAnalysis>,
    /// Sum of the per-assignment return probabilities.
    pub total: f64,
}

/// Per-assignment check of the Jensen lower bound on the return probability.
#[derive(Debug, Clone, Serialize)]
pub struct JensenBoundReport {
    pub entries: Vec<AssignmentAnalysis>,
    pub holds: bool,
    /// Most negative Jensen gap seen (0 when every gap is nonnegative).
    pub worst_gap: f64,
}

/// Result of the isolation-counting inequality
/// `sum_{alpha in sat} prod_x 1/looseness(alpha, x) >= 1`.
#[derive(Debug, Clone, Serialize)]
pub struct KraftReport {
    pub sum: f64,
    pub num_assignments: usize,
    pub holds: bool,
    /// True when the sum equals 1 exactly (rational arithmetic).
    pub exactly_one: bool,
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
}

fn check_exact_vars(f: &Formula, cap: usize) -> Result<()> {
    if f.num_vars() > cap {
        return Err(Error::too_large(format!(
            "permutation enumeration requires n <= {cap}, got n = {}",
            f.num_vars()
        )));
    }
    Ok(())
}

fn check_satisfying(f: &Formula, alpha: &Assignment) -> Result<()> {
    if alpha.len() != f.num_vars() {
        return Err(Error::arg("assignment length does not match n"));
    }
    if !f.is_satisfied(alpha) {
        return Err(Error::arg("assignment does not satisfy the formula"));
    }
    Ok(())
}

/// `S(x, pi, alpha)`: substitute `alpha` on the prefix of `pi` before `x`,
/// then complement the unit-forbidden values.
pub fn allowed_set(
    f: &Formula,
    alpha: &Assignment,
    pi: &Permutation,
    x: usize,
) -> Result<AllowedSet> {
    check_satisfying(f, alpha)?;
    if pi.len() != f.num_vars() {
        return Err(Error::arg("permutation length does not match n"));
    }
    let mut current = f.clone();
    for &y in pi.order() {
        if y == x {
            break;
        }
        current = current.substitute(y, alpha.value(y))?;
    }
    let values: BTreeSet<u32> = current.allowed_values(x).into_iter().collect();
    assert!(
        values.contains(&alpha.value(x)),
        "the target value is always allowed"
    );
    Ok(AllowedSet {
        variable: x,
        values,
    })
}

/// Exact quantities for a fixed satisfying assignment, by DP over prefix
/// subsets. `formulas[mask]` is the formula after substituting `alpha` on
/// the variables in `mask`.
struct PrefixLattice {
    n: usize,
    d: u32,
    formulas: Vec<Formula>,
    alpha_values: Vec<u32>,
}

impl PrefixLattice {
    fn new(f: &Formula, alpha: &Assignment) -> Result<Self> {
        check_exact_vars(f, MAX_EXACT_VARS)?;
        check_satisfying(f, alpha)?;
        let n = f.num_vars();
        let mut formulas = Vec::with_capacity(1 << n);
        formulas.push(f.clone());
        for mask in 1usize..(1 << n) {
            let x = mask.trailing_zeros() as usize;
            let prev = &formulas[mask & (mask - 1)];
            formulas.push(prev.substitute(x, alpha.value(x))?);
        }
        Ok(PrefixLattice {
            n,
            d: f.d(),
            formulas,
            alpha_values: alpha.values().to_vec(),
        })
    }

    /// |S(x, prefix)| with the invariant that alpha's value stays allowed.
    fn allowed_count(&self, prefix: usize, x: usize) -> usize {
        let allowed = self.formulas[prefix].allowed_values(x);
        assert!(
            allowed.contains(&self.alpha_values[x]),
            "the target value is always allowed"
        );
        allowed.len()
    }

    /// Pr[ppz returns alpha] = (1/n!) sum over orders of prod_x 1/|S|.
    ///
    /// DP over subsets: paths[mask] accumulates, over all orderings of
    /// `mask` as a prefix, the product of 1/|S| at each step.
    fn return_prob(&self) -> BigRational {
        let full = (1usize << self.n) - 1;
        let mut paths = vec![BigRational::zero(); 1 << self.n];
        paths[0] = BigRational::one();
        for mask in 1usize..=full {
            let mut acc = BigRational::zero();
            let mut rest = mask;
            while rest != 0 {
                let x = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let prev = mask & !(1 << x);
                let size = self.allowed_count(prev, x);
                acc += &paths[prev] / BigInt::from(size);
            }
            paths[mask] = acc;
        }
        paths[full].clone() / factorial(self.n)
    }

    /// Exact distribution of |S(x, pi, alpha)| over uniform pi, indexed by
    /// size (entry 0 unused).
    fn size_distribution(&self, x: usize) -> Vec<BigRational> {
        let mut dist = vec![BigRational::zero(); self.d as usize + 1];
        let others: Vec<usize> = (0..self.n).filter(|&y| y != x).collect();
        let m = others.len();
        // Pr[prefix set = T] depends only on |T|.
        let n_fact = factorial(self.n);
        let weights: Vec<BigRational> = (0..=m)
            .map(|t| {
                BigRational::from(factorial(t) * factorial(self.n - 1 - t)) / n_fact.clone()
            })
            .collect();
        for sub in 0usize..(1 << m) {
            let mut prefix = 0usize;
            for (bit, &y) in others.iter().enumerate() {
                if sub & (1 << bit) != 0 {
                    prefix |= 1 << y;
                }
            }
            let size = self.allowed_count(prefix, x);
            dist[size] += &weights[sub.count_ones() as usize];
        }
        dist
    }

    /// Pr over pi that the value `c` is allowed for `x`.
    fn value_allowed_prob(&self, x: usize, c: u32) -> BigRational {
        let others: Vec<usize> = (0..self.n).filter(|&y| y != x).collect();
        let m = others.len();
        let n_fact = factorial(self.n);
        let weights: Vec<BigRational> = (0..=m)
            .map(|t| {
                BigRational::from(factorial(t) * factorial(self.n - 1 - t)) / n_fact.clone()
            })
            .collect();
        let mut prob = BigRational::zero();
        for sub in 0usize..(1 << m) {
            let mut prefix = 0usize;
            for (bit, &y) in others.iter().enumerate() {
                if sub & (1 << bit) != 0 {
                    prefix |= 1 << y;
                }
            }
            if self.formulas[prefix].allowed_values(x).contains(&c) {
                prob += &weights[sub.count_ones() as usize];
            }
        }
        prob
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("probability fits in f64")
}

/// Exact Pr[ppz returns `alpha`], averaged over all `n!` permutations.
pub fn exact_return_prob(f: &Formula, alpha: &Assignment) -> Result<f64> {
    Ok(rational_to_f64(&PrefixLattice::new(f, alpha)?.return_prob()))
}

/// Exact `E[log2 |S(x, pi, alpha)|]` over uniform permutations.
pub fn expected_log_allowed(f: &Formula, alpha: &Assignment, x: usize) -> Result<f64> {
    if x >= f.num_vars() {
        return Err(Error::arg("variable out of range"));
    }
    let lattice = PrefixLattice::new(f, alpha)?;
    let dist = lattice.size_distribution(x);
    Ok(expected_log_from_distribution(&dist))
}

fn expected_log_from_distribution(dist: &[BigRational]) -> f64 {
    dist.iter()
        .enumerate()
        .skip(1)
        .map(|(size, p)| rational_to_f64(p) * (size as f64).log2())
        .sum()
}

/// Exact distribution of |S(x, pi, alpha)| as probabilities indexed by
/// size (index 0 is always zero).
pub fn allowed_size_distribution(f: &Formula, alpha: &Assignment, x: usize) -> Result<Vec<f64>> {
    if x >= f.num_vars() {
        return Err(Error::arg("variable out of range"));
    }
    let lattice = PrefixLattice::new(f, alpha)?;
    Ok(lattice
        .size_distribution(x)
        .iter()
        .map(rational_to_f64)
        .collect())
}

/// Exact Pr over permutations that `c` is allowed for `x` along `alpha`.
pub fn value_allowed_prob(f: &Formula, alpha: &Assignment, x: usize, c: u32) -> Result<f64> {
    if x >= f.num_vars() {
        return Err(Error::arg("variable out of range"));
    }
    if c < 1 || c > f.d() {
        return Err(Error::arg("value out of range"));
    }
    let lattice = PrefixLattice::new(f, alpha)?;
    Ok(rational_to_f64(&lattice.value_allowed_prob(x, c)))
}

fn analyze_assignment(f: &Formula, alpha: &Assignment) -> Result<AssignmentAnalysis> {
    let lattice = PrefixLattice::new(f, alpha)?;
    let return_prob = rational_to_f64(&lattice.return_prob());
    let expected_log_allowed: Vec<f64> = (0..f.num_vars())
        .map(|x| expected_log_from_distribution(&lattice.size_distribution(x)))
        .collect();
    let jensen_bound = (-expected_log_allowed.iter().sum::<f64>()).exp2();
    Ok(AssignmentAnalysis {
        assignment: alpha.clone(),
        return_prob,
        expected_log_allowed,
        jensen_bound,
        jensen_gap: return_prob - jensen_bound,
    })
}

/// Exact success probability as the sum of per-assignment return
/// probabilities over the satisfying set (the first of the two routes).
pub fn exact_success_prob(f: &Formula) -> Result<f64> {
    check_exact_vars(f, MAX_EXACT_VARS)?;
    let mut total = BigRational::zero();
    for alpha in f.sat_set()? {
        total += PrefixLattice::new(f, &alpha)?.return_prob();
    }
    Ok(rational_to_f64(&total))
}

/// Exact success probability by weighted DFS over every variable order and
/// every random value choice (the second, independent route).
///
/// Weights are accumulated exactly: every path weight is `1 / prod |S|`,
/// and `prod |S|` divides `lcm(1..=d)^n`, so path weights are integer
/// multiples of `1 / (lcm(1..=d)^n)`.
pub fn exact_success_prob_dfs(f: &Formula) -> Result<f64> {
    check_exact_vars(f, MAX_EXACT_VARS)?;
    let space = f.assignment_space().unwrap_or(u128::MAX);
    if space > crate::formula::BRUTE_FORCE_CAP {
        return Err(Error::too_large(format!(
            "d^n = {space} exceeds the branch-enumeration cap"
        )));
    }
    let n = f.num_vars();
    let denom_unit = lcm_pow(f.d(), n).ok_or_else(|| {
        Error::too_large("common denominator for exact path weights overflows".to_string())
    })?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut numerator = BigInt::zero();
    dfs_orders(f, &mut remaining, denom_unit, &mut numerator);
    let total = BigRational::new(numerator, BigInt::from(denom_unit) * factorial(n));
    Ok(rational_to_f64(&total))
}

fn lcm_pow(d: u32, n: usize) -> Option<u128> {
    let mut unit: u128 = 1;
    for v in 2..=u128::from(d) {
        unit = (unit / gcd(unit, v)).checked_mul(v)?;
    }
    let mut out: u128 = 1;
    for _ in 0..n {
        out = out.checked_mul(unit)?;
    }
    Some(out)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sums `weight` over all orders and value choices that end in a satisfying
/// leaf, where `weight` starts at `lcm^n` and is divided by |S| at each
/// step; every division is exact.
fn dfs_orders(current: &Formula, remaining: &mut Vec<usize>, weight: u128, acc: &mut BigInt) {
    if remaining.is_empty() {
        // All variables substituted: any surviving constraint is violated.
        if current.constraints().is_empty() {
            *acc += BigInt::from(weight);
        }
        return;
    }
    for i in 0..remaining.len() {
        let last = remaining.len() - 1;
        remaining.swap(i, last);
        let x = remaining.pop().expect("nonempty");
        let allowed = current.allowed_values(x);
        if !allowed.is_empty() {
            let share = weight / allowed.len() as u128;
            debug_assert_eq!(share * allowed.len() as u128, weight, "division is exact");
            for &c in &allowed {
                let next = current.substitute(x, c).expect("allowed value in range");
                dfs_orders(&next, remaining, share, acc);
            }
        }
        remaining.push(x);
        let last = remaining.len() - 1;
        remaining.swap(i, last);
    }
}

/// Full exact report: one entry per satisfying assignment plus the total.
pub fn exact_report(f: &Formula) -> Result<ExactReport> {
    check_exact_vars(f, MAX_EXACT_VARS)?;
    let per_assignment: Vec<AssignmentAnalysis> = f
        .sat_set()?
        .iter()
        .map(|alpha| analyze_assignment(f, alpha))
        .collect::<Result<_>>()?;
    let total = per_assignment.iter().map(|e| e.return_prob).sum();
    Ok(ExactReport {
        per_assignment,
        total,
    })
}

/// Checks, for every satisfying assignment, that the exact return
/// probability dominates the Jensen bound `2^(-sum_x E[log2 |S|])`.
pub fn verify_jensen_bound(f: &Formula) -> Result<JensenBoundReport> {
    check_exact_vars(f, 7)?;
    let report = exact_report(f)?;
    let worst_gap = report
        .per_assignment
        .iter()
        .map(|e| e.jensen_gap)
        .fold(0.0f64, f64::min);
    Ok(JensenBoundReport {
        holds: worst_gap >= -INEQUALITY_TOL,
        entries: report.per_assignment,
        worst_gap,
    })
}

/// Evaluates the isolation-counting inequality
/// `sum_{alpha in sat} prod_x 1/looseness(alpha, x) >= 1` in exact
/// rational arithmetic.
pub fn verify_kraft(f: &Formula) -> Result<KraftReport> {
    let space = f.assignment_space().unwrap_or(u128::MAX);
    if space > 1_000_000 {
        return Err(Error::too_large(format!(
            "d^n = {space} exceeds the 10^6 cap for the looseness sum"
        )));
    }
    let sat = f.sat_set()?;
    if sat.is_empty() {
        return Err(Error::arg(
            "the looseness sum is only defined for satisfiable formulas",
        ));
    }
    let mut sum = BigRational::zero();
    for alpha in &sat {
        let mut product = BigRational::one();
        for x in 0..f.num_vars() {
            let ell = f.looseness(alpha, x)?;
            product /= BigInt::from(ell);
        }
        sum += product;
    }
    let exactly_one = sum == BigRational::one();
    let sum_f = rational_to_f64(&sum);
    Ok(KraftReport {
        sum: sum_f,
        num_assignments: sat.len(),
        holds: sum_f >= 1.0 - INEQUALITY_TOL,
        exactly_one,
    })
}

/// Fraction of successful ppz passes over fresh uniform permutations, with
/// binomial standard error. Uses the same per-trial streams as the solve
/// driver, so estimates are reproducible for any worker count.
pub fn monte_carlo_success(f: &Formula, trials: u64, seed: u64) -> McEstimate {
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| ppz_trial(f, seed, t).assignment.is_some())
        .count() as u64;
    let estimate = if trials == 0 {
        0.0
    } else {
        successes as f64 / trials as f64
    };
    let std_error = if trials == 0 {
        0.0
    } else {
        (estimate * (1.0 - estimate) / trials as f64).sqrt()
    };
    McEstimate {
        trials,
        successes,
        estimate,
        std_error,
    }
}

/// Exact per-restart success probability of the random-walk baseline
/// within `steps` moves, by Markov-chain enumeration over all `d^n`
/// states. Transitions mirror the walk exactly: first violated constraint
/// in file order, uniform literal, uniform different value.
pub fn schoening_exact_success(f: &Formula, steps: u64) -> Result<f64> {
    let space = f.assignment_space().unwrap_or(u128::MAX);
    if space > 100_000 {
        return Err(Error::too_large(format!(
            "d^n = {space} exceeds the walk-enumeration cap"
        )));
    }
    let size = space as usize;
    let n = f.num_vars();
    let d = f.d();

    // Decode a state index into an assignment (little-endian mixed radix).
    let decode = |idx: usize| {
        let mut values = Vec::with_capacity(n);
        let mut rest = idx;
        for _ in 0..n {
            values.push((rest % d as usize) as u32 + 1);
            rest /= d as usize;
        }
        Assignment::new(values)
    };
    let encode = |a: &Assignment| {
        let mut idx = 0usize;
        for pos in (0..n).rev() {
            idx = idx * d as usize + (a.value(pos) - 1) as usize;
        }
        idx
    };

    let states: Vec<Assignment> = (0..size).map(decode).collect();
    let satisfied: Vec<bool> = states.iter().map(|a| f.is_satisfied(a)).collect();

    let mut dist = vec![1.0 / size as f64; size];
    let mut success = 0.0;
    for (i, &sat) in satisfied.iter().enumerate() {
        if sat {
            success += dist[i];
            dist[i] = 0.0;
        }
    }
    for _ in 0..steps {
        let mut next = vec![0.0f64; size];
        for (i, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let a = &states[i];
            let violated = f
                .constraints()
                .iter()
                .find(|ct| !ct.is_satisfied_by(a))
                .expect("state has zero mass once satisfied");
            if violated.is_empty() || d == 1 {
                continue; // the walk halts; this mass can never succeed
            }
            let literals = violated.literals();
            let per_literal = mass / literals.len() as f64;
            for lit in literals {
                let per_value = per_literal / (d - 1) as f64;
                for c in 1..=d {
                    if c == a.value(lit.var) {
                        continue;
                    }
                    let j = encode(&a.with_value(lit.var, c));
                    if satisfied[j] {
                        success += per_value;
                    } else {
                        next[j] += per_value;
                    }
                }
            }
        }
        dist = next;
    }
    Ok(success)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example_formula() -> Formula {
        Formula::parse("p csp 3 3 2\n1!=2 2!=1 0\n1!=3 3!=1 0").unwrap()
    }

    fn ones(n: usize) -> Assignment {
        Assignment::all_ones(n)
    }

    #[test]
    fn allowed_set_example_orders() {
        let f = example_formula();
        let alpha = ones(3);
        // pi = (x, y, z): nothing substituted before x.
        let pi = Permutation::from_order(vec![0, 1, 2]).unwrap();
        assert_eq!(
            allowed_set(&f, &alpha, &pi, 0).unwrap().values,
            BTreeSet::from([1, 2, 3])
        );
        // pi' = (y, x, z): y=1 reduces the first constraint to (x != 2).
        let pi = Permutation::from_order(vec![1, 0, 2]).unwrap();
        assert_eq!(
            allowed_set(&f, &alpha, &pi, 0).unwrap().values,
            BTreeSet::from([1, 3])
        );
        // pi'' = (y, z, x): both constraints reduce to units on x.
        let pi = Permutation::from_order(vec![1, 2, 0]).unwrap();
        assert_eq!(
            allowed_set(&f, &alpha, &pi, 0).unwrap().values,
            BTreeSet::from([1])
        );
    }

    #[test]
    fn allowed_set_rejects_non_satisfying() {
        let f = example_formula();
        let pi = Permutation::identity(3);
        let bad = Assignment::new(vec![2, 1, 1]);
        assert!(allowed_set(&f, &bad, &pi, 0).is_err());
    }

    #[test]
    fn exact_return_prob_example() {
        // Over the 6 orders: x first gives 1/27 each, x middle 1/18 each,
        // x last 1/9 each, so the average is 11/162.
        let f = example_formula();
        let p = exact_return_prob(&f, &ones(3)).unwrap();
        assert_abs_diff_eq!(p, 11.0 / 162.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_return_prob_edge_cases() {
        // Forced single variable.
        let f = Formula::parse("p csp 3 1 2\n1!=2 0\n1!=3 0").unwrap();
        assert_abs_diff_eq!(
            exact_return_prob(&f, &ones(1)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // Empty formula: pure guessing, 2^-n.
        let f = Formula::empty(2, 2);
        assert_abs_diff_eq!(
            exact_return_prob(&f, &Assignment::new(vec![2, 1])).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        // Guard on n.
        let f = Formula::empty(2, 9);
        assert!(exact_return_prob(&f, &ones(9)).is_err());
    }

    /// Independent oracle: literal (1/n!) sum over all permutations of the
    /// product of 1/|S| along the substitution chain.
    fn naive_return_prob(f: &Formula, alpha: &Assignment) -> f64 {
        fn go(f: &Formula, alpha: &Assignment, remaining: &mut Vec<usize>) -> f64 {
            if remaining.is_empty() {
                return 1.0;
            }
            let mut total = 0.0;
            for i in 0..remaining.len() {
                let x = remaining.remove(i);
                let size = f.allowed_values(x).len() as f64;
                let next = f.substitute(x, alpha.value(x)).unwrap();
                total += go(&next, alpha, remaining) / size;
                remaining.insert(i, x);
            }
            total
        }
        let n = f.num_vars();
        let mut remaining: Vec<usize> = (0..n).collect();
        let total = go(f, alpha, &mut remaining);
        total / (1..=n).map(|v| v as f64).product::<f64>()
    }

    #[test]
    fn return_prob_matches_naive_enumeration() {
        let f = example_formula();
        let alpha = ones(3);
        assert_abs_diff_eq!(
            exact_return_prob(&f, &alpha).unwrap(),
            naive_return_prob(&f, &alpha),
            epsilon = 1e-14
        );
        for seed in 0..20 {
            let spec = crate::generators::GenSpec {
                d: 3,
                k: 3,
                n: 4,
                m: 6,
                seed,
            };
            let f = crate::generators::uniform_random(&spec).unwrap();
            for alpha in f.sat_set().unwrap() {
                assert_abs_diff_eq!(
                    exact_return_prob(&f, &alpha).unwrap(),
                    naive_return_prob(&f, &alpha),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn exact_success_prob_edge_cases() {
        let unsat = Formula::parse("p csp 2 2 1\n0").unwrap();
        assert_eq!(exact_success_prob(&unsat).unwrap(), 0.0);
        assert_eq!(exact_success_prob_dfs(&unsat).unwrap(), 0.0);

        let empty = Formula::empty(2, 2);
        assert_abs_diff_eq!(exact_success_prob(&empty).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            exact_success_prob_dfs(&empty).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn exact_success_prob_dual_route() {
        // The example formula is so loosely constrained that ppz cannot
        // fail on it: units always appear before a constraint could break.
        let f = example_formula();
        let by_sum = exact_success_prob(&f).unwrap();
        let by_dfs = exact_success_prob_dfs(&f).unwrap();
        // Both routes are exact rational computations of the same quantity.
        assert_abs_diff_eq!(by_sum, by_dfs, epsilon = 1e-14);
        assert_abs_diff_eq!(by_sum, 1.0, epsilon = 1e-14);

        // A genuinely fractional case: the chain has success probability
        // 2^(-n/2) since its unique assignment is returned or nothing is.
        let chain = crate::generators::constant_x_chain(4).unwrap();
        assert_abs_diff_eq!(exact_success_prob(&chain).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(
            exact_success_prob_dfs(&chain).unwrap(),
            0.25,
            epsilon = 1e-14
        );

        for seed in 0..10 {
            let spec = crate::generators::GenSpec {
                d: 3,
                k: 3,
                n: 4,
                m: 5,
                seed: 100 + seed,
            };
            let f = crate::generators::uniform_random(&spec).unwrap();
            assert_abs_diff_eq!(
                exact_success_prob(&f).unwrap(),
                exact_success_prob_dfs(&f).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn expected_log_allowed_examples() {
        // Forced variable: |S| = 1 always.
        let f = Formula::parse("p csp 3 1 2\n1!=2 0\n1!=3 0").unwrap();
        assert_abs_diff_eq!(
            expected_log_allowed(&f, &ones(1), 0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // Example formula, variable x: |S| is 3, 2, 1 when x is first,
        // middle, last, each with probability 1/3.
        let f = example_formula();
        let expected = (3.0f64.log2() + 1.0) / 3.0;
        assert_abs_diff_eq!(
            expected_log_allowed(&f, &ones(3), 0).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn chain_formula_has_constant_log_sum() {
        // The 2-CNF chain construction: sum_x E[log2 |S|] = n/2 exactly.
        for n in [2usize, 4] {
            let f = crate::generators::constant_x_chain(n).unwrap();
            let alpha = ones(n);
            let sum: f64 = (0..n)
                .map(|x| expected_log_allowed(&f, &alpha, x).unwrap())
                .sum();
            assert_abs_diff_eq!(sum, n as f64 / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jensen_bound_reports() {
        // Equality on the chain construction: X is constant so Jensen is
        // tight.
        let f = crate::generators::constant_x_chain(4).unwrap();
        let report = verify_jensen_bound(&f).unwrap();
        assert!(report.holds);
        assert_eq!(report.entries.len(), 1);
        assert_abs_diff_eq!(report.entries[0].jensen_gap, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.entries[0].return_prob, 0.25, epsilon = 1e-12);

        // Random satisfiable (3,3) instance.
        let mut checked = 0;
        for seed in 0.. {
            let spec = crate::generators::GenSpec {
                d: 3,
                k: 3,
                n: 5,
                m: 8,
                seed,
            };
            let f = crate::generators::uniform_random(&spec).unwrap();
            if crate::solver::brute_solve(&f).unwrap().is_none() {
                continue;
            }
            let report = verify_jensen_bound(&f).unwrap();
            assert!(report.holds, "violated at seed {seed}: {}", report.worst_gap);
            checked += 1;
            if checked >= 5 {
                break;
            }
        }

        // Forced single variable: both sides are exactly 1.
        let f = Formula::parse("p csp 3 1 2\n1!=2 0\n1!=3 0").unwrap();
        let report = verify_jensen_bound(&f).unwrap();
        assert!(report.holds);
        assert_eq!(report.entries[0].return_prob, 1.0);
        assert_eq!(report.entries[0].jensen_bound, 1.0);
    }

    #[test]
    fn kraft_inequality() {
        // Unique satisfying assignment: every looseness is 1, sum is 1.
        let f = Formula::parse("p csp 3 1 2\n1!=2 0\n1!=3 0").unwrap();
        let report = verify_kraft(&f).unwrap();
        assert!(report.holds && report.exactly_one);

        // Empty formula: d^n assignments, each with looseness d everywhere.
        let f = Formula::empty(3, 3);
        let report = verify_kraft(&f).unwrap();
        assert!(report.holds && report.exactly_one);
        assert_eq!(report.num_assignments, 27);

        // Unsatisfiable: argument error.
        let unsat = Formula::parse("p csp 2 1 2\n1!=1 0\n1!=2 0").unwrap();
        assert!(verify_kraft(&unsat).is_err());

        // Random satisfiable instances: sum >= 1.
        let mut checked = 0;
        for seed in 0.. {
            let spec = crate::generators::GenSpec {
                d: 3,
                k: 3,
                n: 5,
                m: 10,
                seed: 300 + seed,
            };
            let f = crate::generators::uniform_random(&spec).unwrap();
            if crate::solver::brute_solve(&f).unwrap().is_none() {
                continue;
            }
            let report = verify_kraft(&f).unwrap();
            assert!(report.holds, "sum {} at seed {seed}", report.sum);
            checked += 1;
            if checked >= 20 {
                break;
            }
        }
    }

    #[test]
    fn monte_carlo_estimates() {
        let unsat = Formula::parse("p csp 2 1 2\n1!=1 0\n1!=2 0").unwrap();
        let est = monte_carlo_success(&unsat, 2000, 5);
        assert_eq!(est.successes, 0);
        assert_eq!(est.estimate, 0.0);

        // Empty formula: every pass succeeds, but each pass is pure
        // guessing, so a specific target assignment is returned with rate
        // 1/d^n = 1/8.
        let f = Formula::empty(2, 3);
        let est = monte_carlo_success(&f, 50_000, 5);
        assert_eq!(est.estimate, 1.0);
        let target = Assignment::new(vec![2, 1, 2]);
        let trials = 200_000u64;
        let hits = (0..trials)
            .filter(|&t| ppz_trial(&f, 5, t).assignment.as_ref() == Some(&target))
            .count() as u64;
        let rate = hits as f64 / trials as f64;
        let sigma = (0.125 * 0.875 / trials as f64).sqrt();
        assert!((rate - 0.125).abs() <= 4.0 * sigma, "rate {rate}");

        // Example formula against the exact value (which is exactly 1).
        let f = example_formula();
        let exact = exact_success_prob(&f).unwrap();
        let est = monte_carlo_success(&f, 100_000, 6);
        let sigma = (exact * (1.0 - exact) / 100_000.0f64).sqrt();
        assert!(
            (est.estimate - exact).abs() <= 4.0 * sigma,
            "estimate {} vs exact {exact}",
            est.estimate
        );

        // And against a fractional exact value.
        let chain = crate::generators::constant_x_chain(4).unwrap();
        let exact = exact_success_prob(&chain).unwrap();
        let est = monte_carlo_success(&chain, 200_000, 7);
        let sigma = (exact * (1.0 - exact) / 200_000.0f64).sqrt();
        assert!(
            (est.estimate - exact).abs() <= 4.0 * sigma,
            "estimate {} vs exact {exact}",
            est.estimate
        );
    }

    #[test]
    fn monte_carlo_deterministic_across_worker_counts() {
        let f = example_formula();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| monte_carlo_success(&f, 10_000, 9))
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn value_allowed_prob_bounded_by_criticality() {
        // If switching x to c breaks the formula, then over random orders
        // Pr[c allowed] <= 1 - 1/k.
        let f = example_formula();
        let alpha = ones(3);
        let k = f.width() as f64;
        for c in 2..=3 {
            let p = value_allowed_prob(&f, &alpha, 0, c).unwrap();
            assert!(p <= 1.0 - 1.0 / k + INEQUALITY_TOL, "p = {p} for c = {c}");
        }
        // x switched to its own value stays allowed with probability 1.
        assert_eq!(value_allowed_prob(&f, &alpha, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn one_value_bound_across_generated_instances() {
        // Exact enumeration of Pr[c in S(x,pi,alpha)] on planted and
        // random instances with n <= 7: whenever alpha[x -> c] breaks the
        // formula, the probability is at most 1 - 1/k.
        let mut checked = 0;
        for seed in 0..40u64 {
            let spec = crate::generators::GenSpec {
                d: 2 + (seed % 2) as u32,
                k: 2 + (seed % 2) as usize,
                n: 5 + (seed % 3) as usize,
                m: 10,
                seed,
            };
            let f = if seed % 2 == 0 {
                crate::generators::planted_random(&spec).unwrap()
            } else {
                let f = crate::generators::uniform_random(&spec).unwrap();
                if crate::solver::brute_solve(&f).unwrap().is_none() {
                    continue;
                }
                f
            };
            let k = f.width() as f64;
            for alpha in f.sat_set().unwrap().iter().take(3) {
                for x in 0..f.num_vars() {
                    for c in 1..=f.d() {
                        let switched_sat = f.is_satisfied(&alpha.with_value(x, c));
                        let p = value_allowed_prob(&f, alpha, x, c).unwrap();
                        if !switched_sat {
                            assert!(
                                p <= 1.0 - 1.0 / k + INEQUALITY_TOL,
                                "Pr[{c} allowed for x{x}] = {p} with k = {k} at seed {seed}"
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 100, "only {checked} critical (x, c) pairs seen");
    }

    #[test]
    fn walk_enumeration_hand_checked() {
        // Single boolean variable with unit constraint (x != 2): half the
        // initial states are satisfying; one move fixes the other half.
        let f = Formula::parse("p csp 2 1 1\n1!=2 0").unwrap();
        assert_abs_diff_eq!(
            schoening_exact_success(&f, 0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            schoening_exact_success(&f, 1).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // Unsatisfiable formulas never absorb success mass.
        let unsat = Formula::parse("p csp 2 1 2\n1!=1 0\n1!=2 0").unwrap();
        assert_eq!(schoening_exact_success(&unsat, 50).unwrap(), 0.0);
        // Empty formula succeeds immediately.
        let empty = Formula::empty(3, 2);
        assert_abs_diff_eq!(
            schoening_exact_success(&empty, 0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn report_total_matches_success_prob() {
        let f = example_formula();
        let report = exact_report(&f).unwrap();
        let total = exact_success_prob(&f).unwrap();
        assert_abs_diff_eq!(report.total, total, epsilon = 1e-12);
        assert_eq!(report.per_assignment.len(), f.sat_set().unwrap().len());
    }
}
