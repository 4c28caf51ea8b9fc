//! The sample MGC statistic: threshold the local correlation map, keep the
//! largest connected region, and take its maximum.

mod components;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub use components::{label_components, largest_region, Connectivity};
pub use crate::special::beta_symmetric_quantile;

use crate::data::{check_paired, DataMatrix};
use crate::distances::DistanceRankPair;
use crate::error::{MgcError, Result};
use crate::localmap::{local_corr_map, EpsGuard, LocalCorrMap};

/// Type-1 error budget spread over `n` in the threshold quantile.
const THRESHOLD_TAIL: f64 = 0.02;

/// Regions smaller than `MIN_REGION_FACTOR * n` cells are discarded.
pub const MIN_REGION_FACTOR: usize = 2;

/// Threshold on local correlations together with a flag for small `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// `n < 4`: the Beta law is undefined and the threshold is zero.
    pub degenerate: bool,
}

/// `tau_n = 2 F^{-1}(1 - 0.02 / n) - 1`, with `F` the symmetric Beta law of
/// shape `(v - 1) / 2`, `v = n (n - 3) / 2`. Zero (and flagged) for `n < 4`.
pub fn threshold_tau(n: usize) -> Threshold {
    if n < 4 {
        return Threshold {
            value: 0.0,
            degenerate: true,
        };
    }
    // The quantile inversion dominates small-n statistics and permutation
    // replicates, and depends on n alone.
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&value) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return Threshold {
            value,
            degenerate: false,
        };
    }
    let value = tau_uncached(n);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(n, value);
    Threshold {
        value,
        degenerate: false,
    }
}

fn tau_uncached(n: usize) -> f64 {
    let v = (n * (n - 3)) as f64 / 2.0;
    let shape = (v - 1.0) / 2.0;
    let prob = 1.0 - THRESHOLD_TAIL / n as f64;
    let q = beta_symmetric_quantile(shape, prob).expect("shape and probability are in range for n >= 4");
    2.0 * q - 1.0
}

/// Options for [`mgc_statistic_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MgcOptions {
    pub connectivity: Connectivity,
    pub eps_guard: EpsGuard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgcResult {
    pub statistic: f64,
    /// 1-indexed `(k, l)`.
    pub optimal_scale: (usize, usize),
    pub threshold: f64,
    /// The threshold came from the `n < 4` rule rather than the Beta law.
    pub threshold_degenerate: bool,
    /// Cells in the selected region, whether or not it was used.
    pub region_size: usize,
    pub used_fallback: bool,
    /// Reported statistic exceeds one (possible off the diagonal at small n).
    pub exceeds_unit: bool,
    pub map: LocalCorrMap,
}

/// Region search and smoothed maximum on a finished map.
pub fn mgc_statistic(map: LocalCorrMap, tau: f64) -> MgcResult {
    mgc_statistic_with(map, tau, Connectivity::default())
}

pub fn mgc_statistic_with(map: LocalCorrMap, tau: f64, connectivity: Connectivity) -> MgcResult {
    let scan = scan_map(&map, tau, connectivity);
    MgcResult {
        statistic: scan.statistic,
        optimal_scale: scan.optimal_scale,
        threshold: tau,
        threshold_degenerate: false,
        region_size: scan.region_size,
        used_fallback: scan.used_fallback,
        exceeds_unit: scan.region_max > 1.0,
        map,
    }
}

pub(crate) struct Scan {
    pub statistic: f64,
    pub optimal_scale: (usize, usize),
    pub region_size: usize,
    pub region_max: f64,
    pub used_fallback: bool,
}

pub(crate) fn scan_map(map: &LocalCorrMap, tau: f64, connectivity: Connectivity) -> Scan {
    let n = map.n();
    let corner = map.corr_full();
    let cut = tau.max(corner);
    let grid = map.corr_grid().as_slice();
    let mask: Vec<bool> = grid.iter().map(|&c| c > cut).collect();
    let (labels, sizes) = label_components(&mask, n, connectivity);
    let component_size = sizes.iter().skip(1).copied().max().unwrap_or(0);
    let in_region = |idx: usize| labels[idx] != 0 && sizes[labels[idx] as usize] == component_size;

    // Off-diagonal local correlations can overshoot 1 by rounding-scale
    // amounts that grow with n; the reported value is capped there. Row-major
    // scan with strict improvement keeps the smallest k, then l.
    let cap = corner.max(1.0);
    let mut region_size = 0;
    let mut raw_max = f64::NEG_INFINITY;
    let mut best: Option<(f64, usize)> = None;
    for idx in (0..n * n).filter(|&idx| in_region(idx)) {
        region_size += 1;
        raw_max = raw_max.max(grid[idx]);
        let value = grid[idx].min(cap);
        if best.is_none_or(|(v, _)| value > v) {
            best = Some((value, idx));
        }
    }
    match best {
        Some((value, idx)) if component_size >= MIN_REGION_FACTOR * n && value > corner => Scan {
            statistic: value,
            optimal_scale: (idx / n + 1, idx % n + 1),
            region_size,
            region_max: raw_max,
            used_fallback: false,
        },
        _ => Scan {
            statistic: corner,
            optimal_scale: (n, n),
            region_size,
            region_max: raw_max.max(corner),
            used_fallback: true,
        },
    }
}

/// Distances, centering, ranks, local map, threshold, region search.
pub fn mgc_test_statistic(x: &DataMatrix, y: &DataMatrix) -> Result<MgcResult> {
    mgc_test_statistic_with(x, y, MgcOptions::default())
}

pub fn mgc_test_statistic_with(x: &DataMatrix, y: &DataMatrix, options: MgcOptions) -> Result<MgcResult> {
    let n = check_paired(x, y)?;
    if n < 2 {
        return Err(MgcError::InsufficientSample { needed: 2, got: n });
    }
    let xp = DistanceRankPair::from_data(x)?;
    let yp = DistanceRankPair::from_data(y)?;
    mgc_from_pairs(&xp, &yp, options)
}

pub fn mgc_from_pairs(x: &DistanceRankPair, y: &DistanceRankPair, options: MgcOptions) -> Result<MgcResult> {
    let map = local_corr_map(x, y, options.eps_guard)?;
    let tau = threshold_tau(map.n());
    let mut result = mgc_statistic_with(map, tau.value, options.connectivity);
    result.threshold_degenerate = tau.degenerate;
    Ok(result)
}

/// The statistic alone, for permutation replicates.
pub(crate) fn mgc_value(x: &DistanceRankPair, y: &DistanceRankPair, options: MgcOptions) -> Result<f64> {
    let map = local_corr_map(x, y, options.eps_guard)?;
    let tau = threshold_tau(map.n()).value;
    Ok(scan_map(&map, tau, options.connectivity).statistic)
}
