//! Sample local covariances, variances and correlations at every scale.
//!
//! For scales `(k, l)` the truncated matrices keep `A_ij` only when
//! `R^A_ij <= k` and `B_ij` only when `R^B_ij <= l`. With
//! `E(M) = sum_{i != j} M_ij / (n (n - 1))`:
//!
//! ```text
//! cov[k][l] = E(A^k o B^l') - E(A^k) E(B^l)
//! var_x[k]  = E(A^k o A^k') - E(A^k)^2
//! corr      = cov / sqrt(var_x var_y), or 0 when either variance < eps
//! ```
//!
//! [`local_corr_map`] accumulates rank histograms in one pass over the `n^2`
//! pairs and reads every scale off prefix sums. [`local_map_naive`] evaluates
//! the same definitions directly per scale and exists as a test oracle.

use crate::distances::{CenteredMatrix, DistanceRankPair, SquareMatrix};
use crate::error::{MgcError, Result};

/// Relative factor of the default ε-guard.
pub const DEFAULT_EPS_FACTOR: f64 = 1e-12;

/// Default bound on `n` for the naive oracle.
pub const NAIVE_ORACLE_BOUND: usize = 64;

/// Floor below which a local variance zeroes the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EpsGuard {
    /// `1e-12 * (1 + max(|var_x[n]|, |var_y[n]|))`.
    #[default]
    Relative,
    /// A fixed positive floor.
    Absolute(f64),
}

impl EpsGuard {
    fn resolve(self, full_var_x: f64, full_var_y: f64) -> Result<f64> {
        match self {
            EpsGuard::Relative => {
                Ok(DEFAULT_EPS_FACTOR * (1.0 + full_var_x.abs().max(full_var_y.abs())))
            }
            EpsGuard::Absolute(eps) if eps.is_finite() && eps > 0.0 => Ok(eps),
            EpsGuard::Absolute(eps) => Err(MgcError::InvalidParameter(format!(
                "eps guard must be positive, got {eps}"
            ))),
        }
    }
}

/// All local statistics over the `n x n` grid of scales.
///
/// Accessors take 1-indexed scales `k, l` in `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCorrMap {
    n: usize,
    cov: SquareMatrix<f64>,
    var_x: Vec<f64>,
    var_y: Vec<f64>,
    corr: SquareMatrix<f64>,
    eps_guard: f64,
}

impl LocalCorrMap {
    /// A map carrying only correlations, e.g. a hand-built grid for
    /// exercising the region logic. Covariances are set equal to the
    /// correlations and variances to one.
    pub fn from_correlations(corr: SquareMatrix<f64>) -> Result<Self> {
        let n = corr.n();
        if n == 0 {
            return Err(MgcError::InvalidData("empty correlation map".into()));
        }
        if corr.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(MgcError::InvalidData("non-finite correlation".into()));
        }
        Ok(Self {
            n,
            cov: corr.clone(),
            var_x: vec![1.0; n],
            var_y: vec![1.0; n],
            corr,
            eps_guard: DEFAULT_EPS_FACTOR,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn corr(&self, k: usize, l: usize) -> f64 {
        self.corr.get(k - 1, l - 1)
    }

    pub fn cov(&self, k: usize, l: usize) -> f64 {
        self.cov.get(k - 1, l - 1)
    }

    pub fn var_x(&self, k: usize) -> f64 {
        self.var_x[k - 1]
    }

    pub fn var_y(&self, l: usize) -> f64 {
        self.var_y[l - 1]
    }

    pub fn var_x_profile(&self) -> &[f64] {
        &self.var_x
    }

    pub fn var_y_profile(&self) -> &[f64] {
        &self.var_y
    }

    /// Correlations, row `k - 1`, column `l - 1`.
    pub fn corr_grid(&self) -> &SquareMatrix<f64> {
        &self.corr
    }

    pub fn cov_grid(&self) -> &SquareMatrix<f64> {
        &self.cov
    }

    pub fn eps_guard(&self) -> f64 {
        self.eps_guard
    }

    /// `corr[n][n]`, the global distance correlation.
    pub fn corr_full(&self) -> f64 {
        self.corr(self.n, self.n)
    }

    pub fn max_corr(&self) -> f64 {
        self.corr
            .as_slice()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Covariance and variances at the full scale `(n, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FullScale {
    pub cov: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub sum_x: f64,
    pub sum_y: f64,
}

/// Direct sums over `i != j` without truncation. Pairs are visited as
/// `i < j` and each contributes both orientations, so swapping the roles of
/// `a` and `b` reproduces the result bit-for-bit.
pub(crate) fn full_scale(a: &CenteredMatrix, b: &CenteredMatrix) -> FullScale {
    let n = a.n();
    let norm = (n * (n - 1)) as f64;
    let (mut cross, mut sxx, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let a_row = a.row(i);
        let b_row = b.row(i);
        for j in (i + 1)..n {
            let (a_ij, a_ji) = (a_row[j], a.get(j, i));
            let (b_ij, b_ji) = (b_row[j], b.get(j, i));
            cross += a_ij * b_ji + a_ji * b_ij;
            sxx += 2.0 * (a_ij * a_ji);
            syy += 2.0 * (b_ij * b_ji);
            sx += a_ij + a_ji;
            sy += b_ij + b_ji;
        }
    }
    let (mx, my) = (sx / norm, sy / norm);
    FullScale {
        cov: cross / norm - mx * my,
        var_x: sxx / norm - mx * mx,
        var_y: syy / norm - my * my,
        sum_x: sx,
        sum_y: sy,
    }
}

pub(crate) fn guarded_corr(cov: f64, var_x: f64, var_y: f64, eps: f64) -> f64 {
    if var_x < eps || var_y < eps {
        0.0
    } else {
        cov / (var_x * var_y).sqrt()
    }
}

/// Distance correlation at the full scale under the given guard.
pub(crate) fn full_scale_corr(x: &CenteredMatrix, y: &CenteredMatrix, guard: EpsGuard) -> Result<f64> {
    let full = full_scale(x, y);
    let eps = guard.resolve(full.var_x, full.var_y)?;
    Ok(guarded_corr(full.cov, full.var_x, full.var_y, eps))
}

fn check_pairs(x: &DistanceRankPair, y: &DistanceRankPair) -> Result<usize> {
    if x.n() != y.n() {
        return Err(MgcError::DimensionMismatch(format!(
            "x has {} observations but y has {}",
            x.n(),
            y.n()
        )));
    }
    if x.n() < 2 {
        return Err(MgcError::InsufficientSample {
            needed: 2,
            got: x.n(),
        });
    }
    Ok(x.n())
}

/// Per-side 1-D profiles: cumulative sums of `A_ij` by rank and of
/// `A_ij A_ji` by the larger of the two ranks.
struct SideProfile {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

fn side_profile(pair: &DistanceRankPair) -> SideProfile {
    let n = pair.n();
    let a = pair.centered();
    let r = pair.ranks();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a_ij, a_ji) = (a.get(i, j), a.get(j, i));
            let (r_ij, r_ji) = (r.get(i, j) as usize - 1, r.get(j, i) as usize - 1);
            if r_ij == r_ji {
                sum[r_ij] += a_ij + a_ji;
            } else {
                sum[r_ij] += a_ij;
                sum[r_ji] += a_ji;
            }
            sum_sq[r_ij.max(r_ji)] += 2.0 * (a_ij * a_ji);
        }
    }
    for k in 1..n {
        sum[k] += sum[k - 1];
        sum_sq[k] += sum_sq[k - 1];
    }
    SideProfile { sum, sum_sq }
}

/// All local correlations in `O(n^2)` given the ranks.
pub fn local_corr_map(
    x: &DistanceRankPair,
    y: &DistanceRankPair,
    guard: EpsGuard,
) -> Result<LocalCorrMap> {
    let n = check_pairs(x, y)?;
    let norm = (n * (n - 1)) as f64;
    let (a, ra) = (x.centered(), x.ranks());
    let (b, rb) = (y.centered(), y.ranks());

    // Joint histogram over (R^A_ij, R^B_ji) weighted by A_ij B_ji. When both
    // orientations of a pair land in one bin their sum is added at once so
    // that the (Y, X) histogram is the exact transpose.
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let bin1 = (ra.get(i, j) as usize - 1) * n + (rb.get(j, i) as usize - 1);
            let bin2 = (ra.get(j, i) as usize - 1) * n + (rb.get(i, j) as usize - 1);
            let p1 = a.get(i, j) * b.get(j, i);
            let p2 = a.get(j, i) * b.get(i, j);
            if bin1 == bin2 {
                joint[bin1] += p1 + p2;
            } else {
                joint[bin1] += p1;
                joint[bin2] += p2;
            }
        }
    }

    // 2-D prefix sums; `up + left` is formed first so the recurrence commutes
    // under transposition.
    for k in 0..n {
        for l in 0..n {
            let up = if k > 0 { joint[(k - 1) * n + l] } else { 0.0 };
            let left = if l > 0 { joint[k * n + l - 1] } else { 0.0 };
            let diag = if k > 0 && l > 0 {
                joint[(k - 1) * n + l - 1]
            } else {
                0.0
            };
            joint[k * n + l] += (up + left) - diag;
        }
    }

    let px = side_profile(x);
    let py = side_profile(y);
    let full = full_scale(a, b);
    let eps = guard.resolve(full.var_x, full.var_y)?;

    // At or beyond the largest rank the truncation keeps every entry; those
    // cells take the direct full-scale sums so they match Dcorr exactly.
    let sat_x = x.max_rank() as usize - 1;
    let sat_y = y.max_rank() as usize - 1;

    let profile_var = |p: &SideProfile, sat: usize, full_var: f64, full_sum: f64| {
        (0..n)
            .map(|k| {
                if k >= sat {
                    (full_var, full_sum)
                } else {
                    let m = p.sum[k] / norm;
                    (p.sum_sq[k] / norm - m * m, p.sum[k])
                }
            })
            .unzip::<f64, f64, Vec<f64>, Vec<f64>>()
    };
    let (var_x, sum_x) = profile_var(&px, sat_x, full.var_x, full.sum_x);
    let (var_y, sum_y) = profile_var(&py, sat_y, full.var_y, full.sum_y);

    // The histogram becomes the covariance grid in place. Guarded scales
    // get a zero standard deviation and hence a zero correlation.
    let sd = |v: &[f64]| -> Vec<f64> { v.iter().map(|&v| if v < eps { 0.0 } else { v.sqrt() }).collect() };
    let (sd_x, sd_y) = (sd(&var_x), sd(&var_y));
    let mean_y: Vec<f64> = sum_y.iter().map(|s| s / norm).collect();
    let mut corr = vec![0.0; n * n];
    for k in 0..n {
        let mx = sum_x[k] / norm;
        let cov_row = &mut joint[k * n..(k + 1) * n];
        let corr_row = &mut corr[k * n..(k + 1) * n];
        for l in 0..n {
            let c = cov_row[l] / norm - mx * mean_y[l];
            cov_row[l] = c;
            let scale = sd_x[k] * sd_y[l];
            corr_row[l] = if scale == 0.0 { 0.0 } else { c / scale };
        }
        if k >= sat_x {
            for l in sat_y..n {
                cov_row[l] = full.cov;
                corr_row[l] = guarded_corr(full.cov, var_x[k], var_y[l], eps);
            }
        }
    }
    let cov = SquareMatrix::from_vec(n, joint)?;
    let corr = SquareMatrix::from_vec(n, corr)?;

    Ok(LocalCorrMap {
        n,
        cov,
        var_x,
        var_y,
        corr,
        eps_guard: eps,
    })
}

/// Direct per-scale evaluation of the definitions, `O(n^4)` overall.
/// Refuses `n > NAIVE_ORACLE_BOUND`.
pub fn local_map_naive(
    x: &DistanceRankPair,
    y: &DistanceRankPair,
    guard: EpsGuard,
) -> Result<LocalCorrMap> {
    local_map_naive_bounded(x, y, guard, NAIVE_ORACLE_BOUND)
}

pub fn local_map_naive_bounded(
    x: &DistanceRankPair,
    y: &DistanceRankPair,
    guard: EpsGuard,
    bound: usize,
) -> Result<LocalCorrMap> {
    let n = check_pairs(x, y)?;
    if n > bound {
        return Err(MgcError::OracleBound { n, bound });
    }
    let norm = (n * (n - 1)) as f64;
    let truncate = |pair: &DistanceRankPair, k: usize| -> Vec<f64> {
        let (a, r) = (pair.centered(), pair.ranks());
        (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                if r.get(i, j) as usize <= k {
                    a.get(i, j)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let off_diag_mean = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j];
                }
            }
        }
        s / norm
    };
    let cross_mean = |m1: &[f64], m2: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m1[i * n + j] * m2[j * n + i];
                }
            }
        }
        s / norm
    };
    // tr(M1 M2) and tr(M J), summed as full matrix products including the
    // (zero) diagonal.
    let trace_product = |m1: &[f64], m2: &[f64]| -> f64 {
        (0..n)
            .map(|i| (0..n).map(|j| m1[i * n + j] * m2[j * n + i]).sum::<f64>())
            .sum()
    };
    let trace_ones = |m: &[f64]| -> f64 { m.iter().sum() };

    let ax: Vec<Vec<f64>> = (1..=n).map(|k| truncate(x, k)).collect();
    let by: Vec<Vec<f64>> = (1..=n).map(|l| truncate(y, l)).collect();
    let var_of = |m: &[f64]| cross_mean(m, m) - off_diag_mean(m).powi(2);
    let var_x: Vec<f64> = ax.iter().map(|m| var_of(m)).collect();
    let var_y: Vec<f64> = by.iter().map(|m| var_of(m)).collect();
    let eps = guard.resolve(var_x[n - 1], var_y[n - 1])?;

    let mut cov = SquareMatrix::filled(n, 0.0);
    let mut corr = SquareMatrix::filled(n, 0.0);
    for (k, ak) in ax.iter().enumerate() {
        let mean_a = off_diag_mean(ak);
        for (l, bl) in by.iter().enumerate() {
            let c = cross_mean(ak, bl) - mean_a * off_diag_mean(bl);
            let via_trace = trace_product(ak, bl) - trace_ones(ak) * trace_ones(bl) / norm;
            let scale = 1.0 + via_trace.abs().max((c * norm).abs());
            if (via_trace - c * norm).abs() > 1e-9 * scale {
                return Err(MgcError::OracleMismatch(format!(
                    "scale ({}, {}): direct {} vs trace {}",
                    k + 1,
                    l + 1,
                    c * norm,
                    via_trace
                )));
            }
            cov.set(k, l, c);
            corr.set(k, l, guarded_corr(c, var_x[k], var_y[l], eps));
        }
    }
    Ok(LocalCorrMap {
        n,
        cov,
        var_x,
        var_y,
        corr,
        eps_guard: eps,
    })
}
