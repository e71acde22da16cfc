//! Exact Euclidean projection of a vector onto the (scaled) probability
//! simplex `{x : sum(x) = a, x >= 0}`.
//!
//! The workhorse is [`project_sort`]: sort the input in descending order,
//! locate the size `rho` of the positive support with a running threshold
//! test, shift by the multiplier `lambda = (a - sum of top rho values) / rho`
//! and clip at zero. Three independent routes to the same point are provided
//! for cross-validation:
//!
//! * [`project_sort_early_exit`] — same sort, but stops scanning as soon as
//!   the next test value is certain to fail;
//! * [`project_bisection`] — root-finds the multiplier on the monotone pile
//!   map `lambda -> sum(max(y + lambda, 0))`;
//! * [`project_michelot`] — alternating projection with support shrinking,
//!   finite termination in at most D passes;
//! * [`brute_force_oracle`] — exhaustive active-set enumeration, exponential
//!   in D, intended for verification only.
//!
//! [`kkt_check`] certifies any claimed projection by reconstructing the
//! inequality multipliers and measuring the violation of each optimality
//! condition.

use crate::error::{Error, Result};
use crate::num::KahanSum;

/// Dense vector of finite reals. Construction rejects NaN/Inf eagerly so the
/// numeric kernels never have to re-validate.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn sum(&self) -> f64 {
        crate::num::kahan_sum(self.values.iter().copied())
    }
}

impl AsRef<[f64]> for DenseVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Target simplex: dimension D and total mass `a > 0` (`a = 1` gives the
/// probability simplex).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexSpec {
    dimension: usize,
    scale: f64,
}

impl SimplexSpec {
    pub fn new(dimension: usize, scale: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::EmptyVector);
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidScale(scale));
        }
        Ok(Self { dimension, scale })
    }

    /// Probability simplex (`a = 1`).
    pub fn unit(dimension: usize) -> Result<Self> {
        Self::new(dimension, 1.0)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn check_dimension(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: len,
            });
        }
        Ok(())
    }
}

/// Projection plus diagnostics: support size `rho`, shift `lambda`, and the
/// active mask (true where `x_i > 0`).
///
/// Floating-point noise can in principle flip a component sitting exactly on
/// the support boundary; this moves `x` by at most ~1e-16 and is harmless.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub x: DenseVector,
    pub rho: usize,
    pub lambda: f64,
    pub active: Vec<bool>,
}

/// Worst-case violations of the four optimality conditions for the simplex
/// projection QP. All fields are nonnegative; zero means exactly satisfied.
#[derive(Clone, Copy, Debug)]
pub struct KktReport {
    pub stationarity_residual: f64,
    pub primal_feasibility_violation: f64,
    pub dual_feasibility_violation: f64,
    pub complementarity_residual: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity_residual
            .max(self.primal_feasibility_violation)
            .max(self.dual_feasibility_violation)
            .max(self.complementarity_residual)
    }
}

/// Copy of `y` sorted ascending; callers scan it in reverse for the
/// descending order the threshold tests want. Ties need no tie-breaking:
/// only the value sequence matters, so equal inputs land in equal outputs
/// regardless of their original positions.
fn sorted_ascending(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_unstable_by(f64::total_cmp);
    u
}

/// Shift-and-clip once the multiplier is known. Coordinates past the
/// support satisfy `y_i + lambda <= 0` and clip to exact zero.
fn threshold(y: &[f64], lambda: f64) -> (Vec<f64>, Vec<bool>) {
    let mut x = vec![0.0; y.len()];
    let mut active = vec![false; y.len()];
    for (i, &v) in y.iter().enumerate() {
        let xi = (v + lambda).max(0.0);
        x[i] = xi;
        active[i] = xi > 0.0;
    }
    (x, active)
}

/// Scan state for the support-size search: the running compensated prefix
/// sum over the descending values, the best `j` with a positive test, and
/// the prefix sum at that `j`.
struct SupportScan {
    acc: KahanSum,
    rho: usize,
    sum_at_rho: f64,
    next_j: usize,
}

impl SupportScan {
    fn new() -> Self {
        Self {
            acc: KahanSum::default(),
            rho: 1,
            sum_at_rho: 0.0,
            next_j: 0,
        }
    }

    /// Feeds another block of descending values; returns true while every
    /// test in the block came out positive (the support may extend further).
    fn feed(&mut self, block: impl Iterator<Item = f64>, scale: f64) -> bool {
        let mut all_positive = true;
        for v in block {
            self.acc.add(v);
            let s = self.acc.value();
            let j = self.next_j;
            self.next_j += 1;
            let t = v + (scale - s) / (j + 1) as f64;
            // t_1 = scale > 0 always holds mathematically; forcing j = 0
            // keeps rho >= 1 even if extreme magnitudes cancel the first
            // test to zero.
            if j == 0 || t > 0.0 {
                self.rho = j + 1;
                self.sum_at_rho = s;
            } else {
                all_positive = false;
            }
        }
        all_positive
    }

    fn lambda(&self, scale: f64) -> f64 {
        (scale - self.sum_at_rho) / self.rho as f64
    }
}

/// Above this length the kernel sorts lazily: it selects and sorts only as
/// much of the descending prefix as the support scan consumes. The tests
/// are positive exactly up to the support size, so once a block contains a
/// failed test no later value can matter; typical supports are tiny
/// compared to D and the work drops from a full sort to a few linear
/// selection passes.
const LAZY_SORT_THRESHOLD: usize = 1 << 16;

/// Initial block size for the lazy path.
const LAZY_FIRST_BLOCK: usize = 4096;

fn scan_full(y: &[f64], scale: f64) -> SupportScan {
    let u = sorted_ascending(y);
    let mut scan = SupportScan::new();
    scan.feed(u.iter().rev().copied(), scale);
    scan
}

fn scan_lazy(y: &[f64], scale: f64) -> SupportScan {
    let d = y.len();
    let mut work = y.to_vec();
    let descending = |a: &f64, b: &f64| b.total_cmp(a);

    let mut scan = SupportScan::new();
    let mut processed = 0usize;
    let mut block_end = LAZY_FIRST_BLOCK.min(d);
    loop {
        // Move the next-largest block to work[processed..block_end] and
        // sort just that block descending.
        if block_end < d {
            work[processed..].select_nth_unstable_by(block_end - processed - 1, descending);
        }
        work[processed..block_end].sort_unstable_by(descending);
        let extend = scan.feed(work[processed..block_end].iter().copied(), scale);
        if !extend || block_end == d {
            return scan;
        }
        processed = block_end;
        block_end = (block_end * 4).min(d);
    }
}

/// Shared kernel for [`project_sort`] and the row-wise batch routine, so the
/// two are bitwise identical by construction.
pub(crate) fn project_sort_core(y: &[f64], scale: f64) -> (Vec<f64>, usize, f64, Vec<bool>) {
    let scan = if y.len() < LAZY_SORT_THRESHOLD {
        scan_full(y, scale)
    } else {
        scan_lazy(y, scale)
    };
    let lambda = scan.lambda(scale);
    let (x, active) = threshold(y, lambda);
    (x, scan.rho, lambda, active)
}

/// Projects `y` onto the simplex by the descending-sort threshold method.
///
/// Returns the unique minimizer of `0.5 * ||x - y||^2` subject to
/// `sum(x) = a`, `x >= 0`, together with the support size and multiplier.
/// Cost is dominated by the sort, O(D log D).
pub fn project_sort(y: &DenseVector, spec: &SimplexSpec) -> Result<ProjectionReport> {
    spec.check_dimension(y.len())?;
    let (x, rho, lambda, active) = project_sort_core(y.as_slice(), spec.scale());
    Ok(ProjectionReport {
        x: DenseVector { values: x },
        rho,
        lambda,
        active,
    })
}

/// Same contract as [`project_sort`], but the scan over candidate support
/// sizes stops as soon as the next sorted value is certain to fail the test:
/// once `u_{j+1} + (a - s_j)/j <= 0` the optimum is `rho = j`.
pub fn project_sort_early_exit(y: &DenseVector, spec: &SimplexSpec) -> Result<ProjectionReport> {
    spec.check_dimension(y.len())?;
    let d = y.len();
    let scale = spec.scale();
    let u = sorted_ascending(y.as_slice());

    let mut acc = KahanSum::default();
    let mut rho = d;
    let mut lambda = 0.0;
    for j in 0..d {
        acc.add(u[d - 1 - j]);
        let lam = (scale - acc.value()) / (j + 1) as f64;
        if j + 1 == d || u[d - 2 - j] + lam <= 0.0 {
            rho = j + 1;
            lambda = lam;
            break;
        }
    }

    let (x, active) = threshold(y.as_slice(), lambda);
    Ok(ProjectionReport {
        x: DenseVector { values: x },
        rho,
        lambda,
        active,
    })
}

/// Pile sum `sum(max(y_i + lambda, 0)) - scale`, monotone non-decreasing in
/// `lambda`.
fn pile_excess(y: &[f64], lambda: f64, scale: f64) -> f64 {
    let mut acc = KahanSum::default();
    for &v in y {
        let piled = v + lambda;
        if piled > 0.0 {
            acc.add(piled);
        }
    }
    acc.value() - scale
}

/// Projects `y` by bisecting for the multiplier on the monotone map
/// `lambda -> sum(max(y + lambda, 0))`.
///
/// The initial bracket `[a/D - max(y), a/D - min(y)]` always encloses the
/// root: at the left end every piled term is at most `a/D`, at the right end
/// every term is at least `a/D`. Bisection stops when the bracket is
/// narrower than `tol`, so the result matches [`project_sort`] to within a
/// small multiple of `tol`.
pub fn project_bisection(
    y: &DenseVector,
    spec: &SimplexSpec,
    tol: f64,
) -> Result<ProjectionReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    spec.check_dimension(y.len())?;
    let values = y.as_slice();
    let d = values.len() as f64;
    let scale = spec.scale();

    let max_y = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_y = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = scale / d - max_y;
    let mut hi = scale / d - min_y;

    let slack = 1e-9
        * 1.0f64
            .max(scale)
            .max(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if pile_excess(values, lo, scale) > slack || pile_excess(values, hi, scale) < -slack {
        return Err(Error::BracketFailure);
    }

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket narrower than one ulp
        }
        if pile_excess(values, mid, scale) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let mut x = vec![0.0; values.len()];
    let mut active = vec![false; values.len()];
    let mut rho = 0;
    for (i, &v) in values.iter().enumerate() {
        let xi = (v + lambda).max(0.0);
        if xi > 0.0 {
            rho += 1;
            active[i] = true;
        }
        x[i] = xi;
    }
    Ok(ProjectionReport {
        x: DenseVector { values: x },
        rho,
        lambda,
        active,
    })
}

/// Projects `y` by alternating projection with support shrinking: project
/// onto the mass hyperplane restricted to the current support, drop the
/// nonpositive coordinates, repeat. Terminates in at most D passes and
/// agrees with [`project_sort`] up to roundoff.
pub fn project_michelot(y: &DenseVector, spec: &SimplexSpec) -> Result<ProjectionReport> {
    spec.check_dimension(y.len())?;
    let values = y.as_slice();
    let d = values.len();
    let scale = spec.scale();

    let mut support = vec![true; d];
    let mut count = d;
    let mut lambda;
    loop {
        let mut acc = KahanSum::default();
        for (i, &v) in values.iter().enumerate() {
            if support[i] {
                acc.add(v);
            }
        }
        lambda = (scale - acc.value()) / count as f64;

        let mut removed = 0;
        for (i, &v) in values.iter().enumerate() {
            if support[i] && v + lambda <= 0.0 {
                support[i] = false;
                removed += 1;
            }
        }
        if removed == 0 {
            break;
        }
        count -= removed;
        debug_assert!(count > 0, "hyperplane shift keeps at least one positive");
    }

    let mut x = vec![0.0; d];
    let mut active = vec![false; d];
    for i in 0..d {
        if support[i] {
            let xi = (values[i] + lambda).max(0.0);
            x[i] = xi;
            active[i] = xi > 0.0;
        }
    }
    Ok(ProjectionReport {
        x: DenseVector { values: x },
        rho: count,
        lambda,
        active,
    })
}

/// Certifies a claimed projection against the QP optimality system.
///
/// The inequality multipliers are reconstructed as
/// `beta_i = x_i - y_i - lambda` (they are determined by stationarity), so
/// the stationarity residual is zero by construction and the interesting
/// outputs are primal feasibility (`|sum x - a|` and negativity), dual
/// feasibility (`beta >= 0`) and complementarity (`x_i * beta_i = 0`).
pub fn kkt_check(
    y: &DenseVector,
    report: &ProjectionReport,
    spec: &SimplexSpec,
) -> Result<KktReport> {
    spec.check_dimension(y.len())?;
    spec.check_dimension(report.x.len())?;
    if report.active.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: report.active.len(),
        });
    }

    let x = report.x.as_slice();
    let lambda = report.lambda;

    let mut stationarity = 0.0f64;
    let mut negativity = 0.0f64;
    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut mass = KahanSum::default();
    for (&xi, &yi) in x.iter().zip(y.as_slice()) {
        let beta = xi - yi - lambda;
        stationarity = stationarity.max((xi - yi - lambda - beta).abs());
        negativity = negativity.max(-xi);
        dual = dual.max(-beta);
        complementarity = complementarity.max((xi * beta).abs());
        mass.add(xi);
    }

    Ok(KktReport {
        stationarity_residual: stationarity.max(0.0),
        primal_feasibility_violation: (mass.value() - spec.scale()).abs().max(negativity.max(0.0)),
        dual_feasibility_violation: dual.max(0.0),
        complementarity_residual: complementarity,
    })
}

/// Maximum dimension accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_DIMENSION: usize = 16;

/// Exhaustive reference solution: enumerates every nonempty candidate active
/// set, solves the equality-constrained minimizer on it, keeps the
/// candidates that satisfy every optimality condition and returns the one
/// closest to `y`. Exponential in D; refuses D > 16.
///
/// Independent of the sort-based route on purpose — it shares no code with
/// [`project_sort`] beyond elementary arithmetic.
pub fn brute_force_oracle(y: &DenseVector, spec: &SimplexSpec) -> Result<DenseVector> {
    spec.check_dimension(y.len())?;
    let d = y.len();
    if d > ORACLE_MAX_DIMENSION {
        return Err(Error::OracleDimensionTooLarge {
            got: d,
            max: ORACLE_MAX_DIMENSION,
        });
    }
    let values = y.as_slice();
    let scale = spec.scale();
    let eps = 1e-9
        * 1.0f64
            .max(scale)
            .max(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << d) {
        let size = mask.count_ones() as f64;
        let mut sum = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += v;
            }
        }
        let lambda = (scale - sum) / size;

        let mut feasible = true;
        for (i, &v) in values.iter().enumerate() {
            let shifted = v + lambda;
            let in_set = mask & (1 << i) != 0;
            if (in_set && shifted < -eps) || (!in_set && shifted > eps) {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }

        let mut x = vec![0.0; d];
        let mut dist2 = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                x[i] = (v + lambda).max(0.0);
            }
            let diff = x[i] - v;
            dist2 += diff * diff;
        }
        match &best {
            Some((best_dist, _)) if *best_dist <= dist2 => {}
            _ => best = Some((dist2, x)),
        }
    }

    let (_, x) = best.expect("a KKT-consistent active set always exists");
    Ok(DenseVector { values: x })
}
