//! The per-variable success exponent `G(d,k)` and comparison exponents.
//!
//! `G(d,k)` is the integral over `r in [0,1]` of
//!
//! ```text
//! g(d,k,r) = sum_{j=0}^{d-1} log2(1+j) C(d-1,j) (1-r^(k-1))^j (r^(k-1))^(d-1-j)
//! ```
//!
//! the expected `log2(1 + B)` for `B ~ Binomial(d-1, 1-r^(k-1))`: the
//! expected guessing cost of a variable whose timestamp in the processing
//! order is `r`. One ppz pass then succeeds with probability at least
//! `2^(-n G(d,k))`.
//!
//! The integral is evaluated two independent ways: adaptive Simpson
//! quadrature of `g`, and a closed form obtained by substituting
//! `u = r^(k-1)`, which turns each summand into a beta integral:
//!
//! ```text
//! G(d,k) = sum_j log2(1+j) C(d-1,j) (1/(k-1)) B(j+1, d-1-j + 1/(k-1))
//! ```

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::solver::trial_rng;

/// Default absolute tolerance for the quadrature route.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

/// A (d,k) pair naming a problem family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundSpec {
    pub d: u32,
    pub k: u32,
}

/// How a bound exponent was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    Quadrature,
    BetaClosedForm,
    MonteCarlo,
}

/// A per-variable base-2 exponent together with its base `2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub exponent: f64,
    pub base: f64,
    pub method: BoundMethod,
}

impl BoundValue {
    fn new(exponent: f64, method: BoundMethod) -> Self {
        BoundValue {
            exponent,
            base: exponent.exp2(),
            method,
        }
    }
}

fn check_dk(d: u32, k: u32) -> Result<()> {
    if d < 1 || k < 1 {
        return Err(Error::arg("bounds require d >= 1 and k >= 1"));
    }
    Ok(())
}

fn binomial(n: u32, j: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..j {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

fn g_of_r_unchecked(d: u32, k: u32, r: f64) -> f64 {
    let q = 1.0 - r.powi(k as i32 - 1);
    let mut total = 0.0;
    for j in 0..d {
        let term = ((1 + j) as f64).log2()
            * binomial(d - 1, j)
            * q.powi(j as i32)
            * (1.0 - q).powi((d - 1 - j) as i32);
        total += term;
    }
    total
}

/// `E[log2(1 + B)]` for `B ~ Binomial(d-1, 1-r^(k-1))`.
pub fn g_of_r(d: u32, k: u32, r: f64) -> Result<f64> {
    check_dk(d, k)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::arg(format!("r = {r} outside [0, 1]")));
    }
    Ok(g_of_r_unchecked(d, k, r))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `G(d,k)` by adaptive Simpson quadrature of `g(d,k,r)` over `[0,1]` with
/// absolute error at most `tol`. The integrand is smooth on the interval.
pub fn g_quadrature(d: u32, k: u32, tol: f64) -> Result<BoundValue> {
    check_dk(d, k)?;
    if tol <= 0.0 {
        return Err(Error::arg("quadrature tolerance must be positive"));
    }
    let exponent = adaptive_simpson(&|r| g_of_r_unchecked(d, k, r), 0.0, 1.0, tol);
    Ok(BoundValue::new(exponent, BoundMethod::Quadrature))
}

/// `G(d,k)` through the beta-function closed form, evaluated in log-gamma
/// space to stay stable for large `d`.
pub fn g_closed_form(d: u32, k: u32) -> Result<BoundValue> {
    check_dk(d, k)?;
    if k == 1 {
        // All non-target values are forbidden by the time any variable is
        // processed; nothing is ever guessed.
        return Ok(BoundValue::new(0.0, BoundMethod::BetaClosedForm));
    }
    let inv = 1.0 / (k as f64 - 1.0);
    let mut exponent = 0.0;
    for j in 1..d {
        let ln_choose =
            ln_gamma(d as f64) - ln_gamma(j as f64 + 1.0) - ln_gamma((d - j) as f64);
        let ln_beta = ln_gamma(j as f64 + 1.0) + ln_gamma((d - 1 - j) as f64 + inv)
            - ln_gamma(d as f64 + inv);
        exponent += ((1 + j) as f64).log2() * (ln_choose + ln_beta - (k as f64 - 1.0).ln()).exp();
    }
    Ok(BoundValue::new(exponent, BoundMethod::BetaClosedForm))
}

/// Monte Carlo estimate of `g(d,k,r)` at a fixed `r`: sample
/// `B ~ Binomial(d-1, 1-r^(k-1))` and average `log2(1 + B)`.
/// Returns the mean and its standard error.
pub fn g_monte_carlo_point(
    d: u32,
    k: u32,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dk(d, k)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::arg(format!("r = {r} outside [0, 1]")));
    }
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let q = 1.0 - r.powi(k as i32 - 1);
    let mut rng = trial_rng(seed, 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let mut b = 0u32;
        for _ in 1..d {
            if rng.random::<f64>() < q {
                b += 1;
            }
        }
        let value = ((1 + b) as f64).log2();
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Monte Carlo estimate of `G(d,k)` itself: `r` uniform in `[0,1]`, then
/// one binomial draw. Returns the estimate and its standard error.
pub fn g_monte_carlo(d: u32, k: u32, samples: u64, seed: u64) -> Result<(BoundValue, f64)> {
    check_dk(d, k)?;
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let mut rng = trial_rng(seed, 1);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let r: f64 = rng.random();
        let q = 1.0 - r.powi(k as i32 - 1);
        let mut b = 0u32;
        for _ in 1..d {
            if rng.random::<f64>() < q {
                b += 1;
            }
        }
        let value = ((1 + b) as f64).log2();
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    Ok((
        BoundValue::new(mean, BoundMethod::MonteCarlo),
        (var / samples as f64).sqrt(),
    ))
}

/// The weaker exponent `log2((d(k-1)+1)/k)` from applying Jensen's
/// inequality a second time (inside the logarithm).
pub fn suboptimal_exponent(d: u32, k: u32) -> f64 {
    debug_assert!(d >= 1 && k >= 1);
    (((d * (k - 1) + 1) as f64) / k as f64).log2()
}

/// The random-walk reference exponent `log2(d(k-1)/k)`.
pub fn schoening_exponent(d: u32, k: u32) -> Result<f64> {
    check_dk(d, k)?;
    if d * (k - 1) == 0 {
        return Err(Error::arg(
            "the walk exponent is undefined when d(k-1) = 0",
        ));
    }
    Ok(((d * (k - 1)) as f64 / k as f64).log2())
}

/// One row of the comparison table. Bases are `2^exponent` per variable;
/// the walk base is computed directly from its rational formula and is
/// `None` where the walk is undefined (d < 2 or k < 2).
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub d: u32,
    pub k: u32,
    pub schoening_base: Option<f64>,
    pub ppz_base: f64,
    pub ppz_exponent: f64,
    pub suboptimal_base: f64,
}

/// Builds the comparison table for the given (d,k) pairs.
pub fn comparison_table(pairs: &[BoundSpec]) -> Result<Vec<TableRow>> {
    pairs
        .iter()
        .map(|&BoundSpec { d, k }| {
            let g = g_quadrature(d, k, DEFAULT_QUADRATURE_TOL)?;
            let schoening_base =
                (d >= 2 && k >= 2).then(|| (d * (k - 1)) as f64 / k as f64);
            Ok(TableRow {
                d,
                k,
                schoening_base,
                ppz_base: g.base,
                ppz_exponent: g.exponent,
                suboptimal_base: (d * (k - 1) + 1) as f64 / k as f64,
            })
        })
        .collect()
}

/// Formats a bound base to 4 significant digits, rounding up (the
/// conservative direction for a success-probability base) and trimming
/// trailing zeros: 4/3 prints as 1.334 and 2^(2/3) as 1.588.
pub fn format_base(x: f64) -> String {
    if x <= 0.0 {
        return format!("{x}");
    }
    let exp = x.log10().floor() as i32;
    let decimals = 3 - exp;
    let scale = 10f64.powi(decimals);
    let rounded = (x * scale).ceil() / scale;
    let mut out = if decimals > 0 {
        format!("{:.*}", decimals as usize, rounded)
    } else {
        format!("{rounded:.0}")
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}
