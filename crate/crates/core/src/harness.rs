//! Power estimation, statistic panels and timing runs over the simulation
//! suite.
//!
//! Power follows the null/alternative-distribution procedure: `replicates`
//! dependent pairs give the alternative sample of the statistic, the same
//! number of crossed pairs give the null sample, and power is the fraction
//! of alternative values above the empirical `1 - alpha` null quantile.
//! Pearson is the exception and rejects by its t-test.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{dcorr_global, pearson};
use crate::error::{MgcError, Result};
use crate::inference::{domain, Method, PermutationStatistic, RngSpec};
use crate::mgc::mgc_test_statistic;
use crate::simgen::{null_counterpart, simulate, SimSpec, SimType};

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_BENCH_RUNS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult {
    pub sim_type: SimType,
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub power: f64,
    pub stderr: f64,
}

impl PowerResult {
    fn new(spec: &SimSpec, method: Method, alpha: f64, replicates: usize, power: f64) -> Self {
        Self {
            sim_type: spec.sim_type,
            method,
            n: spec.n,
            p: spec.p,
            alpha,
            replicates,
            power,
            stderr: (power * (1.0 - power) / replicates as f64).sqrt(),
        }
    }
}

/// Empirical `1 - alpha` quantile: the `ceil((1 - alpha) m)`-th order
/// statistic of the `m` null values.
pub fn null_critical_value(null: &[f64], alpha: f64) -> f64 {
    let mut sorted = null.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let rank = ((1.0 - alpha) * m as f64).ceil() as usize;
    sorted[rank.clamp(1, m) - 1]
}

fn check_power_args(alpha: f64, replicates: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MgcError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if replicates == 0 {
        return Err(MgcError::InvalidParameter("at least one replicate is required".into()));
    }
    Ok(())
}

fn alternative_pair(spec: &SimSpec, rng: &RngSpec, i: u64) -> Result<crate::simgen::SamplePair> {
    simulate(&spec.with_seed(rng.derive_seed(domain::ALTERNATIVE, i)))
}

fn null_pair(spec: &SimSpec, rng: &RngSpec, i: u64) -> Result<crate::simgen::SamplePair> {
    null_counterpart(
        &spec.with_seed(rng.derive_seed(domain::NULL_X, i)),
        rng.derive_seed(domain::NULL_Y, i),
    )
}

/// Statistic of `method` on `replicates` independent draws of `pair`.
fn sample_statistics<F>(method: Method, replicates: usize, pair: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<crate::simgen::SamplePair> + Sync,
{
    (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let s = pair(i)?;
            method.compute(&s.x, &s.y)
        })
        .collect()
}

/// Testing power of `method` at level `alpha` on the law given by `spec`
/// (its `seed` is ignored; replicate seeds derive from `rng`).
pub fn estimate_power(
    spec: &SimSpec,
    method: Method,
    alpha: f64,
    replicates: usize,
    rng: RngSpec,
) -> Result<PowerResult> {
    check_power_args(alpha, replicates)?;
    let power = if method == Method::Pearson {
        let rejections = (0..replicates as u64)
            .into_par_iter()
            .map(|i| {
                let s = alternative_pair(spec, &rng, i)?;
                Ok(pearson(&s.x, &s.y)?.p_value < alpha)
            })
            .collect::<Result<Vec<bool>>>()?;
        rejections.iter().filter(|&&r| r).count() as f64 / replicates as f64
    } else {
        let alt = sample_statistics(method, replicates, |i| alternative_pair(spec, &rng, i))?;
        let null = sample_statistics(method, replicates, |i| null_pair(spec, &rng, i))?;
        let crit = null_critical_value(&null, alpha);
        alt.iter().filter(|&&v| v > crit).count() as f64 / replicates as f64
    };
    Ok(PowerResult::new(spec, method, alpha, replicates, power))
}

/// Power of each method at each sample size, in method-major order. The
/// `n` of `base` is replaced by each entry of `n_values`.
pub fn power_curve(
    base: &SimSpec,
    methods: &[Method],
    n_values: &[usize],
    alpha: f64,
    replicates: usize,
    rng: RngSpec,
) -> Result<Vec<PowerResult>> {
    let mut out = Vec::with_capacity(methods.len() * n_values.len());
    for &method in methods {
        for (idx, &n) in n_values.iter().enumerate() {
            let spec = SimSpec { n, ..*base };
            out.push(estimate_power(&spec, method, alpha, replicates, rng.child(domain::REPLICATE, idx as u64))?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelRow {
    pub sim_type: SimType,
    pub mgc: f64,
    pub dcorr: f64,
    pub pearson_abs: f64,
}

/// Noiseless one-dimensional draw of every type with the three statistics.
pub fn statistic_panel(n: usize, rng: RngSpec) -> Result<Vec<PanelRow>> {
    if n < 5 {
        return Err(MgcError::InsufficientSample { needed: 5, got: n });
    }
    SimType::ALL
        .par_iter()
        .map(|&t| {
            let seed = rng.derive_seed(domain::SIMULATION, t.number() as u64);
            let s = simulate(&SimSpec::new(t, n, 1, 0.0, seed))?;
            Ok(PanelRow {
                sim_type: t,
                mgc: mgc_test_statistic(&s.x, &s.y)?.statistic,
                dcorr: dcorr_global(&s.x, &s.y)?.value,
                pearson_abs: pearson(&s.x, &s.y)?.r.abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub method: Method,
    pub seconds: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Median wall-clock seconds of the MGC and Dcorr statistics (from raw
/// data, distances included) on quadratic data.
pub fn runtime_bench(n_values: &[usize], p: usize, rng: RngSpec) -> Result<Vec<BenchRow>> {
    runtime_bench_with(n_values, p, DEFAULT_BENCH_RUNS, rng)
}

pub fn runtime_bench_with(n_values: &[usize], p: usize, runs: usize, rng: RngSpec) -> Result<Vec<BenchRow>> {
    if runs == 0 {
        return Err(MgcError::InvalidParameter("at least one timing run is required".into()));
    }
    let mut rows = Vec::with_capacity(2 * n_values.len());
    for (idx, &n) in n_values.iter().enumerate() {
        let seed = rng.derive_seed(domain::SIMULATION, idx as u64);
        let s = simulate(&SimSpec::new(SimType::Quadratic, n, p, SimSpec::default_kappa(p), seed))?;
        for method in [Method::Mgc, Method::Dcorr] {
            // One untimed warm-up run.
            let mut times = Vec::with_capacity(runs);
            for run in 0..=runs {
                let start = Instant::now();
                let value = match method {
                    Method::Mgc => mgc_test_statistic(&s.x, &s.y)?.statistic,
                    _ => dcorr_global(&s.x, &s.y)?.value,
                };
                let elapsed = start.elapsed().as_secs_f64();
                std::hint::black_box(value);
                if run > 0 {
                    times.push(elapsed);
                }
            }
            rows.push(BenchRow {
                n,
                method,
                seconds: median(times),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_value_is_upper_order_statistic() {
        let null: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(null_critical_value(&null, 0.05), 95.0);
        assert_eq!(null_critical_value(&null, 0.5), 50.0);
        assert_eq!(null_critical_value(&[3.0], 0.05), 3.0);
    }

    #[test]
    fn stderr_matches_binomial_formula() {
        let spec = SimSpec::new(SimType::Linear, 10, 1, 1.0, 0);
        let r = PowerResult::new(&spec, Method::Dcorr, 0.05, 400, 0.25);
        assert!((r.stderr - (0.25f64 * 0.75 / 400.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_linear_has_full_power() {
        let spec = SimSpec::new(SimType::Linear, 50, 1, 0.0, 0);
        for method in [Method::Mgc, Method::Dcorr] {
            let r = estimate_power(&spec, method, 0.05, 100, RngSpec::new(3)).unwrap();
            assert_eq!(r.power, 1.0, "{method}");
        }
    }

    #[test]
    fn power_is_deterministic() {
        let spec = SimSpec::new(SimType::Quadratic, 15, 1, 1.0, 0);
        let a = estimate_power(&spec, Method::Mgc, 0.05, 50, RngSpec::new(8)).unwrap();
        let b = estimate_power(&spec, Method::Mgc, 0.05, 50, RngSpec::new(8)).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.power));
    }

    #[test]
    fn power_rejects_bad_alpha() {
        let spec = SimSpec::new(SimType::Linear, 10, 1, 1.0, 0);
        assert!(estimate_power(&spec, Method::Dcorr, 1.0, 10, RngSpec::new(1)).is_err());
        assert!(estimate_power(&spec, Method::Dcorr, 0.05, 0, RngSpec::new(1)).is_err());
    }

    #[test]
    fn curve_layout() {
        let rows = power_curve(
            &SimSpec::new(SimType::Linear, 0, 1, 1.0, 0),
            &[Method::Mgc, Method::Dcorr],
            &[8, 12],
            0.05,
            20,
            RngSpec::new(2),
        )
        .unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.method, r.n)).collect();
        assert_eq!(
            keys,
            [(Method::Mgc, 8), (Method::Mgc, 12), (Method::Dcorr, 8), (Method::Dcorr, 12)]
        );
    }

    #[test]
    fn panel_mgc_dominates_dcorr() {
        let rows = statistic_panel(40, RngSpec::new(5)).unwrap();
        assert_eq!(rows.len(), 20);
        for row in rows {
            assert!(row.mgc >= row.dcorr, "{}", row.sim_type);
        }
    }

    #[test]
    fn bench_rows() {
        let rows = runtime_bench_with(&[20, 40], 1, 2, RngSpec::new(1)).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.seconds > 0.0));
    }
}
