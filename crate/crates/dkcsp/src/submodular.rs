//! Real-valued functions on the boolean cube: monotonicity and
//! submodularity predicates, gluing restrictions, product-Bernoulli
//! expectations, and the correlation inequalities they support.
//!
//! Everything here works on explicit tables over `{0,1}^m`, indexed by bit
//! mask with coordinate `i` stored in bit `i`. Arities stay small (`m <=
//! 20`, pair checks `m <= 12`), which keeps every check exhaustive rather
//! than sampled.
//!
//! A *gluing step* replaces one input coordinate by a copy of another;
//! feeding independent Bernoulli bits into a glued restriction is the same
//! as feeding correlated bits into the original function. For submodular
//! functions, gluing can only decrease the expectation, and that inequality
//! is what makes independent side variables the worst case for the
//! allowed-set analysis.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on real-valued inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Arity cap for cube tables.
pub const MAX_ARITY: usize = 20;

/// Arity cap for the all-pairs submodularity check (`4^m` pairs).
pub const MAX_PAIRWISE_ARITY: usize = 12;

/// An explicit function table on `{0,1}^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    arity: usize,
    table: Vec<f64>,
}

impl CubeFunction {
    pub fn new(arity: usize, table: Vec<f64>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::too_large(format!(
                "cube arity {arity} exceeds the {MAX_ARITY} cap"
            )));
        }
        if table.len() != 1 << arity {
            return Err(Error::arg(format!(
                "table length {} does not match 2^{arity}",
                table.len()
            )));
        }
        Ok(CubeFunction { arity, table })
    }

    pub fn from_fn(arity: usize, f: impl Fn(u32) -> f64) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::too_large(format!(
                "cube arity {arity} exceeds the {MAX_ARITY} cap"
            )));
        }
        let table = (0..1u32 << arity).map(f).collect();
        Ok(CubeFunction { arity, table })
    }

    /// OR of all m bits.
    pub fn or_function(arity: usize) -> Self {
        CubeFunction::from_fn(arity, |mask| if mask != 0 { 1.0 } else { 0.0 })
            .expect("small arity")
    }

    /// AND of all m bits.
    pub fn and_function(arity: usize) -> Self {
        let full = (1u32 << arity) - 1;
        CubeFunction::from_fn(arity, |mask| if mask == full { 1.0 } else { 0.0 })
            .expect("small arity")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn value(&self, mask: u32) -> f64 {
        self.table[mask as usize]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Pointwise composition with a scalar function.
    pub fn map(&self, h: impl Fn(f64) -> f64) -> CubeFunction {
        CubeFunction {
            arity: self.arity,
            table: self.table.iter().map(|&v| h(v)).collect(),
        }
    }

    /// Pointwise sum; arities must match.
    pub fn sum(&self, other: &CubeFunction) -> Result<CubeFunction> {
        if self.arity != other.arity {
            return Err(Error::arg("cannot add cube functions of different arity"));
        }
        Ok(CubeFunction {
            arity: self.arity,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// A violating input pair for a failed predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub x: u32,
    pub y: u32,
    pub lhs: f64,
    pub rhs: f64,
}

/// First pair `x <= y` (pointwise) with `f(x) > f(y)`, or `None` when the
/// function is monotone. Checking single-bit-flip edges suffices by
/// transitivity.
pub fn monotone_counterexample(f: &CubeFunction) -> Option<Violation> {
    let m = f.arity();
    for mask in 0..1u32 << m {
        for bit in 0..m {
            if mask & (1 << bit) == 0 {
                let upper = mask | (1 << bit);
                if f.value(mask) > f.value(upper) + INEQUALITY_TOL {
                    return Some(Violation {
                        x: mask,
                        y: upper,
                        lhs: f.value(mask),
                        rhs: f.value(upper),
                    });
                }
            }
        }
    }
    None
}

pub fn is_monotone(f: &CubeFunction) -> bool {
    monotone_counterexample(f).is_none()
}

/// First pair violating `f(x) + f(y) >= f(x and y) + f(x or y)`, checked
/// exhaustively over all pairs, or `None` when the function is submodular.
pub fn submodular_counterexample(f: &CubeFunction) -> Result<Option<Violation>> {
    let m = f.arity();
    if m > MAX_PAIRWISE_ARITY {
        return Err(Error::too_large(format!(
            "all-pairs check requires arity <= {MAX_PAIRWISE_ARITY}, got {m}"
        )));
    }
    let size = 1u32 << m;
    for x in 0..size {
        for y in 0..size {
            let lhs = f.value(x) + f.value(y);
            let rhs = f.value(x & y) + f.value(x | y);
            if lhs < rhs - INEQUALITY_TOL {
                return Ok(Some(Violation { x, y, lhs, rhs }));
            }
        }
    }
    Ok(None)
}

pub fn is_submodular(f: &CubeFunction) -> Result<bool> {
    Ok(submodular_counterexample(f)?.is_none())
}

/// One gluing step: coordinate `j`'s input is ignored and replaced by
/// coordinate `i`'s value. The arity is unchanged.
pub fn glue(f: &CubeFunction, i: usize, j: usize) -> Result<CubeFunction> {
    let m = f.arity();
    if i >= j || j >= m {
        return Err(Error::arg(format!(
            "gluing needs coordinates i < j < arity, got i={i} j={j} m={m}"
        )));
    }
    CubeFunction::from_fn(m, |mask| {
        let with_copy = if mask & (1 << i) != 0 {
            mask | (1 << j)
        } else {
            mask & !(1 << j)
        };
        f.value(with_copy)
    })
}

/// An identification of cube coordinates: each coordinate is mapped to its
/// group representative (the smallest member of its group).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GluingMap {
    rep: Vec<usize>,
}

impl GluingMap {
    /// Every coordinate its own group: no gluing at all.
    pub fn identity(m: usize) -> Self {
        GluingMap {
            rep: (0..m).collect(),
        }
    }

    /// Builds the map from coordinate pairs to merge.
    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut rep: Vec<usize> = (0..m).collect();
        fn find(rep: &mut Vec<usize>, i: usize) -> usize {
            if rep[i] != i {
                let root = find(rep, rep[i]);
                rep[i] = root;
            }
            rep[i]
        }
        for &(i, j) in pairs {
            if i >= m || j >= m {
                return Err(Error::arg(format!(
                    "gluing pair ({i},{j}) out of range for arity {m}"
                )));
            }
            let (a, b) = (find(&mut rep, i), find(&mut rep, j));
            let (lo, hi) = (a.min(b), a.max(b));
            rep[hi] = lo;
        }
        for i in 0..m {
            find(&mut rep, i);
        }
        Ok(GluingMap { rep })
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn rep(&self, i: usize) -> usize {
        self.rep[i]
    }

    pub fn is_identity(&self) -> bool {
        self.rep.iter().enumerate().all(|(i, &r)| i == r)
    }

    /// Group representatives in ascending order.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = (0..self.rep.len()).filter(|&i| self.rep[i] == i).collect();
        reps.sort_unstable();
        reps
    }
}

/// Exact `E[f(X_1, ..., X_m)]` where each gluing group receives one
/// independent Bernoulli(p) bit (no gluing: all groups are singletons).
pub fn expect(f: &CubeFunction, p: f64, gluing: Option<&GluingMap>) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p = {p} outside [0, 1]")));
    }
    let m = f.arity();
    match gluing {
        None => {
            let mut total = 0.0;
            for mask in 0..1u32 << m {
                let ones = mask.count_ones() as i32;
                total += f.value(mask) * p.powi(ones) * (1.0 - p).powi(m as i32 - ones);
            }
            Ok(total)
        }
        Some(gluing) => {
            if gluing.len() != m {
                return Err(Error::arg("gluing map arity does not match the function"));
            }
            let reps = gluing.representatives();
            // Bit mask over coordinates for each group.
            let group_masks: Vec<u32> = reps
                .iter()
                .map(|&r| {
                    (0..m)
                        .filter(|&i| gluing.rep(i) == r)
                        .fold(0u32, |acc, i| acc | (1 << i))
                })
                .collect();
            let g = reps.len();
            let mut total = 0.0;
            for groups in 0..1u32 << g {
                let mut mask = 0u32;
                for (bit, &gm) in group_masks.iter().enumerate() {
                    if groups & (1 << bit) != 0 {
                        mask |= gm;
                    }
                }
                let ones = groups.count_ones() as i32;
                total += f.value(mask) * p.powi(ones) * (1.0 - p).powi(g as i32 - ones);
            }
            Ok(total)
        }
    }
}

/// One grid point of the gluing-correlation check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GluingLemmaEntry {
    pub p: f64,
    pub independent: f64,
    pub glued: f64,
}

/// Result of checking `E[f(independent bits)] >= E[f(glued bits)]` on a
/// grid of bit probabilities.
#[derive(Debug, Clone, Serialize)]
pub struct GluingLemmaReport {
    pub entries: Vec<GluingLemmaEntry>,
    pub holds: bool,
}

/// Checks the correlation inequality for a submodular `f`: gluing input
/// coordinates together can only decrease the expectation. Errors when `f`
/// is not submodular (the inequality genuinely needs it: AND with its two
/// inputs glued gains expectation).
pub fn verify_gluing_lemma(
    f: &CubeFunction,
    gluing: &GluingMap,
    p_grid: &[f64],
) -> Result<GluingLemmaReport> {
    if submodular_counterexample(f)?.is_some() {
        return Err(Error::Precondition(
            "the gluing lemma requires a submodular function".into(),
        ));
    }
    let mut entries = Vec::with_capacity(p_grid.len());
    let mut holds = true;
    for &p in p_grid {
        let independent = expect(f, p, None)?;
        let glued = expect(f, p, Some(gluing))?;
        holds &= independent >= glued - INEQUALITY_TOL;
        entries.push(GluingLemmaEntry {
            p,
            independent,
            glued,
        });
    }
    Ok(GluingLemmaReport { entries, holds })
}

/// Result of checking that a monotone concave reparameterization preserves
/// monotonicity and submodularity.
#[derive(Debug, Clone, Serialize)]
pub struct ConcaveCompositionReport {
    pub monotone: bool,
    pub submodular: bool,
    pub holds: bool,
}

/// Composes `h` (nondecreasing and concave on the range of `f`) with a
/// monotone submodular `f` and checks that both properties survive.
pub fn verify_concave_composition(
    f: &CubeFunction,
    h: impl Fn(f64) -> f64,
) -> Result<ConcaveCompositionReport> {
    if monotone_counterexample(f).is_some() {
        return Err(Error::Precondition(
            "concave composition requires a monotone function".into(),
        ));
    }
    if submodular_counterexample(f)?.is_some() {
        return Err(Error::Precondition(
            "concave composition requires a submodular function".into(),
        ));
    }
    let composed = f.map(h);
    let monotone = is_monotone(&composed);
    let submodular = is_submodular(&composed)?;
    Ok(ConcaveCompositionReport {
        monotone,
        submodular,
        holds: monotone && submodular,
    })
}

/// The cube function behind the worst-case comparison: coordinates are the
/// side variables `y_j^(c)` for `c in ell+1..=d`, `j in 1..=k-1` (blocks of
/// `k-1` bits per value `c`), and
///
/// ```text
/// f(bits) = log2(ell + #{c : OR of block c fires}).
/// ```
pub fn build_worstcase_f(d: u32, k: u32, ell: u32) -> Result<CubeFunction> {
    if ell < 1 || ell > d || k < 1 {
        return Err(Error::arg(format!(
            "worst-case function needs 1 <= ell <= d and k >= 1, got d={d} k={k} ell={ell}"
        )));
    }
    let blocks = (d - ell) as usize;
    let width = (k - 1) as usize;
    let arity = blocks * width;
    if arity > MAX_ARITY {
        return Err(Error::too_large(format!(
            "(d-ell)(k-1) = {arity} exceeds the {MAX_ARITY} arity cap"
        )));
    }
    CubeFunction::from_fn(arity, |mask| {
        let mut fired = 0u32;
        for block in 0..blocks {
            let block_mask = ((1u32 << width) - 1) << (block * width);
            if mask & block_mask != 0 {
                fired += 1;
            }
        }
        f64::from(ell + fired).log2()
    })
}

/// Exact `E[log2(ell + B)]` for `B ~ Binomial(count, q)`.
pub fn binomial_log_expectation(ell: u32, count: u32, q: f64) -> f64 {
    let mut total = 0.0;
    let mut choose = 1.0;
    for j in 0..=count {
        if j > 0 {
            choose = choose * (count - j + 1) as f64 / j as f64;
        }
        total += f64::from(ell + j).log2()
            * choose
            * q.powi(j as i32)
            * (1.0 - q).powi((count - j) as i32);
    }
    total
}

/// A worst-case comparison instance: looseness `ell`, a gluing pattern over
/// the `(d-ell)(k-1)` side-variable coordinates, and the conditioning
/// timestamp `r` of the pivot variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseSpec {
    pub d: u32,
    pub k: u32,
    pub ell: u32,
    pub gluing: GluingMap,
    pub r: f64,
}

/// Both sides of the worst-case comparison at one spec.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorstCaseReport {
    /// Expected `log2(ell + # fired blocks)` with glued side variables,
    /// each appearing after the pivot with probability `1 - r`.
    pub glued: f64,
    /// The independent upper bound `E[log2(ell + Binomial(d-ell, 1-r^(k-1)))]`.
    pub independent: f64,
    pub holds: bool,
}

/// Checks that identified (glued) side variables never beat the fully
/// independent pattern: `E[log2(ell + sum Y)] <= E[log2(ell + sum Z)]`.
pub fn verify_independence_worst_case(spec: &WorstCaseSpec) -> Result<WorstCaseReport> {
    if !(0.0..=1.0).contains(&spec.r) {
        return Err(Error::arg(format!("r = {} outside [0, 1]", spec.r)));
    }
    let f = build_worstcase_f(spec.d, spec.k, spec.ell)?;
    if spec.gluing.len() != f.arity() {
        return Err(Error::arg(format!(
            "gluing map covers {} coordinates, function has {}",
            spec.gluing.len(),
            f.arity()
        )));
    }
    let glued = expect(&f, 1.0 - spec.r, Some(&spec.gluing))?;
    let q = 1.0 - spec.r.powi(spec.k as i32 - 1);
    let independent = binomial_log_expectation(spec.ell, spec.d - spec.ell, q);
    Ok(WorstCaseReport {
        glued,
        independent,
        holds: glued <= independent + INEQUALITY_TOL,
    })
}

/// Random monotone submodular function: a nonnegative weighted sum of ORs
/// over random nonempty coordinate subsets (closed under the operations the
/// checks need, by construction).
pub fn random_monotone_submodular(m: usize, rng: &mut impl Rng) -> CubeFunction {
    let terms = 1 + rng.random_range(0..2 * m.max(1) + 1);
    let mut table = vec![0.0; 1 << m];
    for _ in 0..terms {
        let subset = rng.random_range(1..1u32 << m);
        let weight: f64 = rng.random();
        for (mask, entry) in table.iter_mut().enumerate() {
            if mask as u32 & subset != 0 {
                *entry += weight;
            }
        }
    }
    CubeFunction::new(m, table).expect("small arity")
}

/// Random gluing pattern over `m` coordinates.
pub fn random_gluing(m: usize, rng: &mut impl Rng) -> GluingMap {
    let merges = rng.random_range(0..=m);
    let pairs: Vec<(usize, usize)> = (0..merges)
        .map(|_| {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..m);
            (i.min(j), i.max(j))
        })
        .filter(|(i, j)| i != j)
        .collect();
    GluingMap::from_pairs(m, &pairs).expect("pairs are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::trial_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn monotonicity_examples() {
        assert!(is_monotone(&CubeFunction::or_function(2)));
        assert!(is_monotone(&CubeFunction::and_function(3)));
        // Constant functions are monotone.
        let constant = CubeFunction::from_fn(3, |_| 2.5).unwrap();
        assert!(is_monotone(&constant));
        // Parity is not; the first witness is (1,0) < (1,1).
        let xor = CubeFunction::from_fn(2, |m| (m.count_ones() % 2) as f64).unwrap();
        let violation = monotone_counterexample(&xor).unwrap();
        assert_eq!((violation.x, violation.y), (0b01, 0b11));
    }

    #[test]
    fn submodularity_examples() {
        for m in 1..=6 {
            assert!(is_submodular(&CubeFunction::or_function(m)).unwrap());
        }
        // AND on two bits fails at x=(1,0), y=(0,1).
        let and = CubeFunction::and_function(2);
        let violation = submodular_counterexample(&and).unwrap().unwrap();
        assert_eq!(
            (violation.x.min(violation.y), violation.x.max(violation.y)),
            (0b01, 0b10)
        );
        assert_abs_diff_eq!(violation.lhs, 0.0);
        assert_abs_diff_eq!(violation.rhs, 1.0);
        // Linear functions satisfy the inequality with equality.
        let linear = CubeFunction::from_fn(4, |m| {
            (0..4)
                .filter(|b| m & (1 << b) != 0)
                .map(|b| (b + 1) as f64)
                .sum()
        })
        .unwrap();
        assert!(is_submodular(&linear).unwrap());

        let too_big = CubeFunction::from_fn(13, |_| 0.0).unwrap();
        assert!(submodular_counterexample(&too_big).is_err());
    }

    #[test]
    fn gluing_examples() {
        let xor = CubeFunction::from_fn(2, |m| (m.count_ones() % 2) as f64).unwrap();
        let glued = glue(&xor, 0, 1).unwrap();
        assert_eq!(glued.table(), &[0.0, 0.0, 0.0, 0.0]);

        let or = CubeFunction::or_function(2);
        let glued = glue(&or, 0, 1).unwrap();
        // Projection to coordinate 0: the second input is ignored.
        assert_eq!(glued.table(), &[0.0, 1.0, 0.0, 1.0]);

        assert!(glue(&or, 1, 1).is_err());
        assert!(glue(&or, 0, 2).is_err());
    }

    #[test]
    fn gluing_preserves_submodularity() {
        let mut rng = trial_rng(31, 0);
        for _ in 0..500 {
            let m = rng.random_range(2..=4);
            let f = random_monotone_submodular(m, &mut rng);
            assert!(is_submodular(&f).unwrap());
            let i = rng.random_range(0..m - 1);
            let j = rng.random_range(i + 1..m);
            let glued = glue(&f, i, j).unwrap();
            assert!(is_submodular(&glued).unwrap(), "gluing broke submodularity");
        }
    }

    #[test]
    fn sum_of_submodular_is_submodular() {
        let mut rng = trial_rng(32, 0);
        for _ in 0..100 {
            let m = rng.random_range(2..=4);
            let f = random_monotone_submodular(m, &mut rng);
            let g = random_monotone_submodular(m, &mut rng);
            let sum = f.sum(&g).unwrap();
            assert!(is_monotone(&sum));
            assert!(is_submodular(&sum).unwrap());
        }
    }

    #[test]
    fn expectation_examples() {
        let or = CubeFunction::or_function(2);
        assert_abs_diff_eq!(expect(&or, 0.5, None).unwrap(), 0.75, epsilon = 1e-15);
        let both = GluingMap::from_pairs(2, &[(0, 1)]).unwrap();
        assert_abs_diff_eq!(
            expect(&or, 0.5, Some(&both)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let constant = CubeFunction::from_fn(3, |_| 2.5).unwrap();
        for p in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(expect(&constant, p, None).unwrap(), 2.5, epsilon = 1e-12);
        }
        // The identity gluing is no gluing.
        let f = random_monotone_submodular(4, &mut trial_rng(33, 0));
        let id = GluingMap::identity(4);
        for p in [0.2, 0.6] {
            assert_abs_diff_eq!(
                expect(&f, p, None).unwrap(),
                expect(&f, p, Some(&id)).unwrap(),
                epsilon = 1e-12
            );
        }
        assert!(expect(&or, -0.1, None).is_err());
    }

    #[test]
    fn gluing_lemma_on_or() {
        let or3 = CubeFunction::or_function(3);
        let gluing = GluingMap::from_pairs(3, &[(0, 2)]).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let report = verify_gluing_lemma(&or3, &gluing, &grid).unwrap();
        assert!(report.holds);
        // Deterministic endpoints give equality.
        assert_abs_diff_eq!(
            report.entries[0].independent,
            report.entries[0].glued,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            report.entries[4].independent,
            report.entries[4].glued,
            epsilon = 1e-15
        );
    }

    #[test]
    fn gluing_lemma_needs_submodularity() {
        // AND with its inputs glued gains expectation: 1/4 vs 1/2.
        let and = CubeFunction::and_function(2);
        let both = GluingMap::from_pairs(2, &[(0, 1)]).unwrap();
        assert_abs_diff_eq!(expect(&and, 0.5, None).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            expect(&and, 0.5, Some(&both)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(matches!(
            verify_gluing_lemma(&and, &both, &[0.5]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gluing_lemma_randomized() {
        let mut rng = trial_rng(34, 0);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for _ in 0..100 {
            let m = rng.random_range(2..=4);
            let f = random_monotone_submodular(m, &mut rng);
            let gluing = random_gluing(m, &mut rng);
            let report = verify_gluing_lemma(&f, &gluing, &grid).unwrap();
            assert!(report.holds);
        }
    }

    #[test]
    fn concave_composition_examples() {
        // 1 + sum of three bits, composed with log2.
        let f = CubeFunction::from_fn(3, |m| 1.0 + m.count_ones() as f64).unwrap();
        let report = verify_concave_composition(&f, |t| t.log2()).unwrap();
        assert!(report.holds);
        // Identity trivially preserves both properties.
        let report = verify_concave_composition(&f, |t| t).unwrap();
        assert!(report.holds);
        // Random cases with sqrt.
        let mut rng = trial_rng(35, 0);
        for _ in 0..50 {
            let m = rng.random_range(2..=4);
            let f = random_monotone_submodular(m, &mut rng);
            let report = verify_concave_composition(&f, |t| t.sqrt()).unwrap();
            assert!(report.holds);
        }
        // Non-monotone input is a precondition error.
        let xor = CubeFunction::from_fn(2, |m| (m.count_ones() % 2) as f64).unwrap();
        assert!(matches!(
            verify_concave_composition(&xor, |t| t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn worstcase_function_shapes() {
        // d=2, k=2, ell=1: one side variable, log2(1 + x).
        let f = build_worstcase_f(2, 2, 1).unwrap();
        assert_eq!(f.arity(), 1);
        assert_eq!(f.table(), &[0.0, 1.0]);

        // d=3, k=3, ell=1: two blocks of two bits.
        let f = build_worstcase_f(3, 3, 1).unwrap();
        assert_eq!(f.arity(), 4);
        assert_abs_diff_eq!(f.value(0b1111), 3.0f64.log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(f.value(0b0011), 1.0, epsilon = 1e-15);
        assert!(is_monotone(&f));
        assert!(is_submodular(&f).unwrap());

        // d=4, k=3, ell=2 passes exhaustively.
        let f = build_worstcase_f(4, 3, 2).unwrap();
        assert!(is_monotone(&f));
        assert!(is_submodular(&f).unwrap());

        assert!(build_worstcase_f(3, 3, 0).is_err());
        assert!(build_worstcase_f(3, 3, 4).is_err());
    }

    #[test]
    fn worstcase_all_small_parameters() {
        for d in 1..=4u32 {
            for ell in 1..=d {
                for k in 2..=3u32 {
                    let f = build_worstcase_f(d, k, ell).unwrap();
                    assert!(is_monotone(&f), "({d},{k},{ell}) not monotone");
                    assert!(is_submodular(&f).unwrap(), "({d},{k},{ell}) not submodular");
                }
            }
        }
    }

    #[test]
    fn independence_worst_case_equality_without_gluing() {
        // With distinct side variables the OR of k-1 independent
        // Bernoulli(1-r) bits is Bernoulli(1-r^(k-1)): both sides match.
        for (d, k, ell) in [(3, 3, 1), (4, 2, 2), (4, 3, 1), (2, 3, 1)] {
            let arity = ((d - ell) * (k - 1)) as usize;
            for i in 0..=20 {
                let r = i as f64 / 20.0;
                let spec = WorstCaseSpec {
                    d,
                    k,
                    ell,
                    gluing: GluingMap::identity(arity),
                    r,
                };
                let report = verify_independence_worst_case(&spec).unwrap();
                assert!(report.holds);
                assert_abs_diff_eq!(report.glued, report.independent, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn independence_worst_case_with_gluing() {
        // Glue y_1 of block c=2 with y_1 of block c=3.
        let gluing = GluingMap::from_pairs(4, &[(0, 2)]).unwrap();
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            let spec = WorstCaseSpec {
                d: 3,
                k: 3,
                ell: 1,
                gluing: gluing.clone(),
                r,
            };
            let report = verify_independence_worst_case(&spec).unwrap();
            assert!(report.holds, "violated at r = {r}");
        }
        // r = 0: every side variable comes after the pivot, both sides
        // equal log2(d).
        let spec = WorstCaseSpec {
            d: 3,
            k: 3,
            ell: 1,
            gluing,
            r: 0.0,
        };
        let report = verify_independence_worst_case(&spec).unwrap();
        assert_abs_diff_eq!(report.glued, 3.0f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.independent, 3.0f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn independence_worst_case_randomized() {
        let mut rng = trial_rng(36, 0);
        for _ in 0..200 {
            let d = rng.random_range(1..=4u32);
            let ell = rng.random_range(1..=d);
            let k = rng.random_range(2..=3u32);
            let arity = ((d - ell) * (k - 1)) as usize;
            let spec = WorstCaseSpec {
                d,
                k,
                ell,
                gluing: random_gluing(arity, &mut rng),
                r: rng.random(),
            };
            let report = verify_independence_worst_case(&spec).unwrap();
            assert!(report.holds, "violated at {spec:?}");
        }
    }

    #[test]
    fn no_gluing_bound_integrates_to_g() {
        // Integrating E[log2(1 + Binomial(d-1, 1-r^(k-1)))] over r at
        // ell=1 reproduces the per-variable exponent.
        for (d, k) in [(2u32, 3u32), (3, 3), (5, 4)] {
            // Composite Simpson with 2000 panels is far below 1e-8 error
            // for this smooth integrand.
            let steps = 2000;
            let h = 1.0 / steps as f64;
            let eval = |r: f64| binomial_log_expectation(1, d - 1, 1.0 - r.powi(k as i32 - 1));
            let mut integral = eval(0.0) + eval(1.0);
            for i in 1..steps {
                let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
                integral += weight * eval(i as f64 * h);
            }
            integral *= h / 3.0;
            let g = crate::bounds::g_quadrature(d, k, 1e-10).unwrap().exponent;
            assert_abs_diff_eq!(integral, g, epsilon = 1e-8);
        }
    }

    #[test]
    fn gluing_map_invariants() {
        let g = GluingMap::from_pairs(5, &[(1, 3), (3, 4)]).unwrap();
        for i in 0..5 {
            assert!(g.rep(i) <= i);
            assert_eq!(g.rep(g.rep(i)), g.rep(i));
        }
        assert_eq!(g.representatives(), vec![0, 1, 2]);
        assert!(GluingMap::from_pairs(3, &[(0, 3)]).is_err());
        assert!(GluingMap::identity(4).is_identity());
    }
}
