//! Randomized solvers: the ppz algorithm, a repeated-trial driver, a
//! random-walk baseline, and a brute-force decision fallback.
//!
//! One ppz pass processes the variables in a random order. At each variable
//! it collects the values forbidden by unit constraints of the current
//! (substituted) formula, fails if every value is forbidden, and otherwise
//! assigns a value chosen uniformly at random among the allowed ones. The
//! pass succeeds iff the completed assignment satisfies the original
//! formula.
//!
//! Trials are independent: trial `t` of a run with master seed `s` draws
//! its permutation and its value choices from a dedicated stream derived
//! from `(s, t)`, so reports are reproducible for any worker count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, PartialAssignment, BRUTE_FORCE_CAP};

/// A permutation of the variables `0..n`, the processing order of one
/// ppz pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            order: (0..n).collect(),
        }
    }

    /// Validates that `order` is a bijection on `0..order.len()`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &x in &order {
            if x >= n || seen[x] {
                return Err(Error::arg("order is not a permutation of 0..n"));
            }
            seen[x] = true;
        }
        Ok(Permutation { order })
    }

    /// Uniformly random permutation.
    pub fn sample(n: usize, rng: &mut impl Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Permutation { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Result of a single ppz pass.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// The satisfying assignment, or `None` on failure.
    pub assignment: Option<Assignment>,
    /// Size of the allowed set at each processed variable, in processing
    /// order. Shorter than `n` when the pass failed on an empty allowed set.
    pub allowed_sizes: Vec<u32>,
}

/// Aggregate over repeated randomized trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub found: Option<Assignment>,
    pub trials_run: u64,
    pub successes: u64,
    pub seed: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic per-trial random stream derived from `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial.wrapping_add(1))))
}

/// One ppz pass with a fixed permutation.
///
/// Returns the assignment only if it satisfies `f`; the final check is kept
/// even though substitution makes it redundant unless an empty constraint
/// appeared.
pub fn ppz_run(f: &Formula, pi: &Permutation, rng: &mut impl Rng) -> TrialOutcome {
    assert_eq!(pi.len(), f.num_vars(), "permutation must cover all variables");
    let mut current = f.clone();
    let mut partial = PartialAssignment::new(f.num_vars());
    let mut allowed_sizes = Vec::with_capacity(f.num_vars());
    for &x in pi.order() {
        let allowed = current.allowed_values(x);
        if allowed.is_empty() {
            return TrialOutcome {
                assignment: None,
                allowed_sizes,
            };
        }
        let value = allowed[rng.random_range(0..allowed.len())];
        allowed_sizes.push(allowed.len() as u32);
        partial.set(x, value);
        current = current
            .substitute(x, value)
            .expect("allowed values are in range");
    }
    let assignment = partial.into_assignment().expect("all variables processed");
    TrialOutcome {
        assignment: f.is_satisfied(&assignment).then_some(assignment),
        allowed_sizes,
    }
}

/// One full ppz trial: fresh uniform permutation, fresh value randomness,
/// both drawn from the `(seed, trial)` stream.
pub fn ppz_trial(f: &Formula, seed: u64, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(seed, trial);
    let pi = Permutation::sample(f.num_vars(), &mut rng);
    ppz_run(f, &pi, &mut rng)
}

/// Repeated ppz trials. With `stop_early` the driver stops at the first
/// success (lowest trial index, regardless of worker count); otherwise it
/// runs all trials and counts successes. Trials run in parallel on the
/// current rayon pool.
pub fn ppz_solve(f: &Formula, trials: u64, seed: u64, stop_early: bool) -> SolveReport {
    run_trials(f, trials, seed, stop_early, |f, seed, t| {
        ppz_trial(f, seed, t).assignment
    })
}

fn run_trials(
    f: &Formula,
    trials: u64,
    seed: u64,
    stop_early: bool,
    trial: impl Fn(&Formula, u64, u64) -> Option<Assignment> + Sync,
) -> SolveReport {
    if stop_early {
        const CHUNK: u64 = 1024;
        let mut start = 0;
        while start < trials {
            let end = trials.min(start + CHUNK);
            let first = (start..end)
                .into_par_iter()
                .filter_map(|t| trial(f, seed, t).map(|a| (t, a)))
                .min_by_key(|(t, _)| *t);
            if let Some((t, a)) = first {
                return SolveReport {
                    found: Some(a),
                    trials_run: t + 1,
                    successes: 1,
                    seed,
                };
            }
            start = end;
        }
        return SolveReport {
            found: None,
            trials_run: trials,
            successes: 0,
            seed,
        };
    }

    let (successes, first) = (0..trials)
        .into_par_iter()
        .map(|t| (t, trial(f, seed, t)))
        .fold(
            || (0u64, None::<(u64, Assignment)>),
            |(count, best), (t, outcome)| match outcome {
                Some(a) => {
                    let best = match best {
                        Some((bt, ba)) if bt < t => Some((bt, ba)),
                        _ => Some((t, a)),
                    };
                    (count + 1, best)
                }
                None => (count, best),
            },
        )
        .reduce(
            || (0u64, None),
            |(c1, b1), (c2, b2)| {
                let best = match (b1, b2) {
                    (Some((t1, a1)), Some((t2, a2))) => {
                        if t1 <= t2 {
                            Some((t1, a1))
                        } else {
                            Some((t2, a2))
                        }
                    }
                    (b1, None) => b1,
                    (None, b2) => b2,
                };
                (c1 + c2, best)
            },
        );
    SolveReport {
        found: first.map(|(_, a)| a),
        trials_run: trials,
        successes,
        seed,
    }
}

/// One random-walk pass: start from a uniform assignment; while unsatisfied
/// and moves remain, pick the first violated constraint (file order), pick
/// one of its literals `(x != c)` uniformly, and reassign `x` uniformly
/// among the other `d - 1` values. Reference baseline only.
pub fn schoening_run(f: &Formula, steps: u64, rng: &mut impl Rng) -> Option<Assignment> {
    let n = f.num_vars();
    let d = f.d();
    let mut a = Assignment::new((0..n).map(|_| rng.random_range(1..=d)).collect());
    for step in 0..=steps {
        let violated = f.constraints().iter().find(|ct| !ct.is_satisfied_by(&a));
        let Some(constraint) = violated else {
            return Some(a);
        };
        if step == steps || constraint.is_empty() || d == 1 {
            // Out of moves, or no move can ever fix this constraint.
            return None;
        }
        let literals = constraint.literals();
        let lit = literals[rng.random_range(0..literals.len())];
        // The constraint is violated, so a(var) equals the forbidden value.
        let current = a.value(lit.var);
        let mut value = rng.random_range(1..=d - 1);
        if value >= current {
            value += 1;
        }
        a = a.with_value(lit.var, value);
    }
    None
}

/// Random-walk driver with restarts; each restart is an independent walk of
/// `steps` moves.
pub fn schoening_solve(
    f: &Formula,
    restarts: u64,
    steps: u64,
    seed: u64,
    stop_early: bool,
) -> SolveReport {
    run_trials(f, restarts, seed, stop_early, |f, seed, t| {
        schoening_run(f, steps, &mut trial_rng(seed, t))
    })
}

/// First satisfying assignment in lexicographic order, or `None`.
/// Ground-truth oracle; refuses when `d^n` exceeds [`BRUTE_FORCE_CAP`].
pub fn brute_solve(f: &Formula) -> Result<Option<Assignment>> {
    let space = f.assignment_space().unwrap_or(u128::MAX);
    if space > BRUTE_FORCE_CAP {
        return Err(Error::too_large(format!(
            "d^n = {}^{} exceeds the {} assignment cap",
            f.d(),
            f.num_vars(),
            BRUTE_FORCE_CAP
        )));
    }
    let mut found = None;
    f.for_each_assignment(|a| {
        if f.is_satisfied(a) {
            found = Some(a.clone());
            false
        } else {
            true
        }
    });
    Ok(found)
}
