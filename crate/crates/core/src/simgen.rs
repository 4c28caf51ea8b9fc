//! The twenty benchmark dependence structures.
//!
//! Every type draws `X` in `R^p` and `Y` in `R^q`, with `q = p` for joint
//! normal, logarithmic, both sines, square, diamond, multiplicative noise and
//! multimodal independence, and `q = 1` otherwise. `w_d = 1/d` weights the
//! coordinates wherever `w'X` appears, and `kappa` scales the noise terms
//! that carry it.
//!
//! Within one observation, random primitives are consumed in the order the
//! variables are introduced in each definition (auxiliaries `U`, `V` first
//! when they are declared before `X`), then the noise terms. Normals come
//! from the Box-Muller cosine branch on two uniforms, uniforms from the
//! 53-bit `[0, 1)` generator, Bernoulli(1/2) from `u < 0.5`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{MgcError, Result};
use crate::inference::{domain, RngSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimType {
    Linear,
    Exponential,
    Cubic,
    JointNormal,
    Step,
    Quadratic,
    WShape,
    Spiral,
    UncorrelatedBernoulli,
    Logarithmic,
    FourthRoot,
    Sine4Pi,
    Sine16Pi,
    Square,
    TwoParabolas,
    Circle,
    Ellipse,
    Diamond,
    MultiplicativeNoise,
    MultimodalIndependence,
}

impl SimType {
    pub const ALL: [SimType; 20] = [
        SimType::Linear,
        SimType::Exponential,
        SimType::Cubic,
        SimType::JointNormal,
        SimType::Step,
        SimType::Quadratic,
        SimType::WShape,
        SimType::Spiral,
        SimType::UncorrelatedBernoulli,
        SimType::Logarithmic,
        SimType::FourthRoot,
        SimType::Sine4Pi,
        SimType::Sine16Pi,
        SimType::Square,
        SimType::TwoParabolas,
        SimType::Circle,
        SimType::Ellipse,
        SimType::Diamond,
        SimType::MultiplicativeNoise,
        SimType::MultimodalIndependence,
    ];

    /// 1-based position in the benchmark list.
    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&t| t == self).unwrap() + 1
    }

    pub fn from_number(number: usize) -> Option<Self> {
        number.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            SimType::Linear => "linear",
            SimType::Exponential => "exponential",
            SimType::Cubic => "cubic",
            SimType::JointNormal => "joint-normal",
            SimType::Step => "step",
            SimType::Quadratic => "quadratic",
            SimType::WShape => "w-shape",
            SimType::Spiral => "spiral",
            SimType::UncorrelatedBernoulli => "uncorrelated-bernoulli",
            SimType::Logarithmic => "logarithmic",
            SimType::FourthRoot => "fourth-root",
            SimType::Sine4Pi => "sine-4pi",
            SimType::Sine16Pi => "sine-16pi",
            SimType::Square => "square",
            SimType::TwoParabolas => "two-parabolas",
            SimType::Circle => "circle",
            SimType::Ellipse => "ellipse",
            SimType::Diamond => "diamond",
            SimType::MultiplicativeNoise => "multiplicative-noise",
            SimType::MultimodalIndependence => "multimodal-independence",
        }
    }

    /// Accepts the kebab-case name or the 1-based number.
    pub fn parse(name: &str) -> Result<Self> {
        if let Some(t) = Self::ALL.into_iter().find(|t| t.name() == name) {
            return Ok(t);
        }
        name.parse::<usize>()
            .ok()
            .and_then(Self::from_number)
            .ok_or_else(|| MgcError::UnknownSimulation {
                name: name.to_string(),
                valid: Self::ALL.map(|t| t.name()).join(", "),
            })
    }

    pub fn y_dim(self, p: usize) -> usize {
        match self {
            SimType::JointNormal
            | SimType::Logarithmic
            | SimType::Sine4Pi
            | SimType::Sine16Pi
            | SimType::Square
            | SimType::Diamond
            | SimType::MultiplicativeNoise
            | SimType::MultimodalIndependence => p,
            _ => 1,
        }
    }

    /// Types 1-5.
    pub fn is_monotone(self) -> bool {
        self.number() <= 5
    }
}

impl std::fmt::Display for SimType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub sim_type: SimType,
    pub n: usize,
    pub p: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(sim_type: SimType, n: usize, p: usize, kappa: f64, seed: u64) -> Self {
        Self {
            sim_type,
            n,
            p,
            kappa,
            seed,
        }
    }

    /// `kappa = 1` in one dimension and `0` otherwise.
    pub fn default_kappa(p: usize) -> f64 {
        if p == 1 {
            1.0
        } else {
            0.0
        }
    }

    pub fn q(&self) -> usize {
        self.sim_type.y_dim(self.p)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(MgcError::InvalidParameter(format!(
                "simulation needs n >= 1 and p >= 1 (got n = {}, p = {})",
                self.n, self.p
            )));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(MgcError::InvalidParameter(format!(
                "noise constant must be non-negative, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub x: DataMatrix,
    pub y: DataMatrix,
}

/// Box-Muller, cosine branch.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn bernoulli_half<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<f64>() < 0.5 {
        1.0
    } else {
        0.0
    }
}

/// `w'x` with `w_d = 1/d`.
pub fn weighted_sum(x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(d, v)| v / (d + 1) as f64).sum()
}

/// Noise-free spiral point at parameter `u`: `X_d = u sin(pi u) cos^d(pi u)`
/// for `d < p`, `X_p = u cos^p(pi u)`, and `Y` without noise `u sin(pi u)`.
pub fn spiral_coordinates(u: f64, p: usize) -> (Vec<f64>, f64) {
    let (s, c) = (PI * u).sin_cos();
    let mut x = Vec::with_capacity(p);
    for d in 1..p {
        x.push(u * s * c.powi(d as i32));
    }
    x.push(u * c.powi(p as i32));
    (x, u * s)
}

/// Lower Cholesky factor of the joint-normal covariance
/// `[[I, rho J], [rho J, (1 + kappa / 2) I]]`, `rho = 1 / (2p)`.
fn joint_normal_factor(p: usize, kappa: f64) -> Vec<f64> {
    let m = 2 * p;
    let rho = 1.0 / (2.0 * p as f64);
    let sigma = |i: usize, j: usize| -> f64 {
        match (i < p, j < p) {
            (true, true) | (false, false) if i == j => {
                if i < p {
                    1.0
                } else {
                    1.0 + 0.5 * kappa
                }
            }
            (true, false) | (false, true) => rho,
            _ => 0.0,
        }
    };
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = sigma(i, j);
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = if i == j { s.sqrt() } else { s / l[j * m + j] };
        }
    }
    l
}

/// Draws one observation of `(X, Y)` into the provided buffers.
fn draw_observation<R: Rng + ?Sized>(
    t: SimType,
    p: usize,
    kappa: f64,
    chol: &[f64],
    rng: &mut R,
    x: &mut Vec<f64>,
    y: &mut Vec<f64>,
) {
    x.clear();
    y.clear();
    let normal = |rng: &mut R| standard_normal(rng);
    match t {
        SimType::Linear => {
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            y.push(weighted_sum(x) + kappa * normal(rng));
        }
        SimType::Exponential => {
            x.extend((0..p).map(|_| uniform(rng, 0.0, 3.0)));
            y.push(weighted_sum(x).exp() + 10.0 * kappa * normal(rng));
        }
        SimType::Cubic => {
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            let s = weighted_sum(x) - 1.0 / 3.0;
            y.push(128.0 * s.powi(3) + 48.0 * s.powi(2) - 12.0 * s + 80.0 * kappa * normal(rng));
        }
        SimType::JointNormal => {
            let m = 2 * p;
            let z: Vec<f64> = (0..m).map(|_| normal(rng)).collect();
            for i in 0..m {
                let v: f64 = (0..=i).map(|k| chol[i * m + k] * z[k]).sum();
                if i < p {
                    x.push(v);
                } else {
                    y.push(v);
                }
            }
        }
        SimType::Step => {
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            let step = if weighted_sum(x) > 0.0 { 1.0 } else { 0.0 };
            y.push(step + normal(rng));
        }
        SimType::Quadratic => {
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            y.push(weighted_sum(x).powi(2) + 0.5 * kappa * normal(rng));
        }
        SimType::WShape => {
            let u: Vec<f64> = (0..p).map(|_| uniform(rng, -1.0, 1.0)).collect();
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            let s = weighted_sum(x);
            let inner = (s * s - 0.5).powi(2) + weighted_sum(&u) / 500.0;
            y.push(4.0 * inner + 0.5 * kappa * normal(rng));
        }
        SimType::Spiral => {
            let u = uniform(rng, 0.0, 5.0);
            let (coords, base) = spiral_coordinates(u, p);
            x.extend(coords);
            y.push(base + 0.4 * p as f64 * normal(rng));
        }
        SimType::UncorrelatedBernoulli => {
            let u = bernoulli_half(rng);
            x.extend((0..p).map(|_| bernoulli_half(rng)));
            for v in x.iter_mut() {
                *v += 0.5 * normal(rng);
            }
            y.push((2.0 * u - 1.0) * weighted_sum(x) + 0.5 * normal(rng));
        }
        SimType::Logarithmic => {
            x.extend((0..p).map(|_| normal(rng)));
            for xd in x.iter() {
                y.push(2.0 * xd.abs().log2() + 3.0 * kappa * normal(rng));
            }
        }
        SimType::FourthRoot => {
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            y.push(weighted_sum(x).abs().powf(0.25) + kappa / 4.0 * normal(rng));
        }
        SimType::Sine4Pi | SimType::Sine16Pi => {
            let (theta, noise) = if t == SimType::Sine4Pi {
                (4.0 * PI, kappa)
            } else {
                (16.0 * PI, 0.5 * kappa)
            };
            let u = uniform(rng, -1.0, 1.0);
            for _ in 0..p {
                let v = normal(rng);
                x.push(u + 0.02 * p as f64 * v);
            }
            for xd in x.iter() {
                y.push((theta * xd).sin() + noise * normal(rng));
            }
        }
        SimType::Square | SimType::Diamond => {
            let theta = if t == SimType::Square { -PI / 8.0 } else { -PI / 4.0 };
            let (s, c) = theta.sin_cos();
            let u = uniform(rng, -1.0, 1.0);
            let v = uniform(rng, -1.0, 1.0);
            for _ in 0..p {
                x.push(u * c + v * s + 0.05 * p as f64 * normal(rng));
                y.push(-u * s + v * c);
            }
        }
        SimType::TwoParabolas => {
            let eps = uniform(rng, 0.0, 1.0);
            let u = bernoulli_half(rng);
            x.extend((0..p).map(|_| uniform(rng, -1.0, 1.0)));
            y.push((weighted_sum(x).powi(2) + 2.0 * kappa * eps) * (u - 0.5));
        }
        SimType::Circle | SimType::Ellipse => {
            let r = if t == SimType::Circle { 1.0 } else { 5.0 };
            let u: Vec<f64> = (0..p).map(|_| uniform(rng, -1.0, 1.0)).collect();
            let mut cos_prod = 1.0;
            for d in 0..p {
                cos_prod *= (PI * u[d]).cos();
                let eps = normal(rng);
                let base = if d + 1 < p {
                    (PI * u[d + 1]).sin() * cos_prod
                } else {
                    cos_prod
                };
                x.push(r * (base + 0.4 * eps));
            }
            y.push((PI * u[0]).sin());
        }
        SimType::MultiplicativeNoise => {
            let u: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
            x.extend((0..p).map(|_| normal(rng)));
            for d in 0..p {
                y.push(u[d] * x[d]);
            }
        }
        SimType::MultimodalIndependence => {
            unreachable!("independent type draws each side from its own stream")
        }
    }
}

fn multimodal<R: Rng + ?Sized>(rng: &mut R, p: usize, out: &mut Vec<f64>) {
    out.clear();
    let u: Vec<f64> = (0..p).map(|_| standard_normal(rng)).collect();
    for ud in u {
        out.push(ud / 3.0 + 2.0 * bernoulli_half(rng) - 1.0);
    }
}

/// Draws `n` independent observations of the configured joint law.
pub fn simulate(spec: &SimSpec) -> Result<SamplePair> {
    spec.validate()?;
    let (n, p, q) = (spec.n, spec.p, spec.q());
    let rng_spec = RngSpec::new(spec.seed);
    let mut xs = Vec::with_capacity(n * p);
    let mut ys = Vec::with_capacity(n * q);
    let mut xb = Vec::with_capacity(p);
    let mut yb = Vec::with_capacity(q);

    if spec.sim_type == SimType::MultimodalIndependence {
        let mut rx = rng_spec.stream(domain::SIMULATION, 0);
        let mut ry = rng_spec.stream(domain::SIMULATION, 1);
        for _ in 0..n {
            multimodal(&mut rx, p, &mut xb);
            xs.extend_from_slice(&xb);
            multimodal(&mut ry, q, &mut yb);
            ys.extend_from_slice(&yb);
        }
    } else {
        let chol = if spec.sim_type == SimType::JointNormal {
            joint_normal_factor(p, spec.kappa)
        } else {
            Vec::new()
        };
        let mut rng = rng_spec.stream(domain::SIMULATION, 0);
        for _ in 0..n {
            draw_observation(spec.sim_type, p, spec.kappa, &chol, &mut rng, &mut xb, &mut yb);
            debug_assert_eq!(yb.len(), q);
            xs.extend_from_slice(&xb);
            ys.extend_from_slice(&yb);
        }
    }
    Ok(SamplePair {
        x: DataMatrix::from_column_major(p, n, xs)?,
        y: DataMatrix::from_column_major(q, n, ys)?,
    })
}

/// Same marginals, no dependence: `X` from a draw with `spec.seed`, `Y` from
/// an independent draw with `seed2`.
pub fn null_counterpart(spec: &SimSpec, seed2: u64) -> Result<SamplePair> {
    let first = simulate(spec)?;
    let second = simulate(&spec.with_seed(seed2))?;
    Ok(SamplePair {
        x: first.x,
        y: second.y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::pearson;

    fn spec(t: SimType, n: usize, p: usize, kappa: f64) -> SimSpec {
        SimSpec::new(t, n, p, kappa, 17)
    }

    #[test]
    fn names_numbers_round_trip() {
        for (i, t) in SimType::ALL.into_iter().enumerate() {
            assert_eq!(t.number(), i + 1);
            assert_eq!(SimType::parse(t.name()).unwrap(), t);
            assert_eq!(SimType::parse(&(i + 1).to_string()).unwrap(), t);
        }
        let err = SimType::parse("zigzag").unwrap_err();
        assert!(matches!(err, MgcError::UnknownSimulation { .. }));
        assert!(err.to_string().contains("multimodal-independence"));
        assert!(SimType::parse("21").is_err());
    }

    #[test]
    fn shapes_follow_q_rule() {
        let same_dim = [4, 10, 12, 13, 14, 18, 19, 20];
        for t in SimType::ALL {
            let pair = simulate(&spec(t, 7, 3, 0.0)).unwrap();
            let q = if same_dim.contains(&t.number()) { 3 } else { 1 };
            assert_eq!((pair.x.p(), pair.x.n()), (3, 7), "{t}");
            assert_eq!((pair.y.p(), pair.y.n()), (q, 7), "{t}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        for t in SimType::ALL {
            let s = spec(t, 10, 2, 1.0);
            assert_eq!(simulate(&s).unwrap(), simulate(&s).unwrap());
            assert_ne!(simulate(&s).unwrap(), simulate(&s.with_seed(18)).unwrap());
        }
    }

    #[test]
    fn noiseless_linear_is_weighted_sum() {
        let pair = simulate(&spec(SimType::Linear, 25, 3, 0.0)).unwrap();
        for j in 0..25 {
            let x = pair.x.observation(j);
            let want = x[0] + x[1] / 2.0 + x[2] / 3.0;
            assert!((pair.y.get(0, j) - want).abs() < 1e-12);
            assert!(x.iter().all(|v| (-1.0..1.0).contains(v)));
        }
    }

    #[test]
    fn noiseless_functional_types_follow_their_formulas() {
        type Law = fn(f64) -> f64;
        let laws: [(SimType, Law); 4] = [
            (SimType::Exponential, |s| s.exp()),
            (SimType::Cubic, |s| {
                let c = s - 1.0 / 3.0;
                128.0 * c.powi(3) + 48.0 * c.powi(2) - 12.0 * c
            }),
            (SimType::Quadratic, |s| s * s),
            (SimType::FourthRoot, |s| s.abs().powf(0.25)),
        ];
        for (t, law) in laws {
            let pair = simulate(&spec(t, 30, 2, 0.0)).unwrap();
            for j in 0..30 {
                let s = weighted_sum(pair.x.observation(j));
                assert!((pair.y.get(0, j) - law(s)).abs() < 1e-12, "{t}");
            }
        }
        let pair = simulate(&spec(SimType::TwoParabolas, 30, 2, 0.0)).unwrap();
        for j in 0..30 {
            let s = weighted_sum(pair.x.observation(j));
            assert!((pair.y.get(0, j).abs() - s * s / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_residual_is_standard_normal_ish() {
        let pair = simulate(&spec(SimType::Step, 4000, 1, 0.0)).unwrap();
        let resid: Vec<f64> = (0..4000)
            .map(|j| {
                let s = if pair.x.get(0, j) > 0.0 { 1.0 } else { 0.0 };
                pair.y.get(0, j) - s
            })
            .collect();
        let mean = resid.iter().sum::<f64>() / 4000.0;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 3999.0;
        assert!(mean.abs() < 0.06 && (var - 1.0).abs() < 0.08, "{mean} {var}");
    }

    #[test]
    fn spiral_at_quarter() {
        let (x, y) = spiral_coordinates(0.25, 2);
        assert!((x[0] - 0.125).abs() < 1e-15);
        assert!((x[1] - 0.125).abs() < 1e-15);
        assert!((y - 0.25 * (PI / 4.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn joint_normal_factor_reproduces_covariance() {
        let (p, kappa) = (3, 1.0);
        let l = joint_normal_factor(p, kappa);
        let m = 2 * p;
        for i in 0..m {
            for j in 0..m {
                let s: f64 = (0..m).map(|k| l[i * m + k] * l[j * m + k]).sum();
                let want = if i == j {
                    if i < p { 1.0 } else { 1.5 }
                } else if (i < p) != (j < p) {
                    1.0 / 6.0
                } else {
                    0.0
                };
                assert!((s - want).abs() < 1e-12, "({i},{j}) {s} vs {want}");
            }
        }
    }

    #[test]
    fn circle_one_dimensional_form() {
        let pair = simulate(&spec(SimType::Circle, 200, 1, 0.0)).unwrap();
        assert!(pair.y.as_column_major().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn null_counterpart_crosses_draws() {
        let s = spec(SimType::Linear, 40, 1, 0.0);
        let null = null_counterpart(&s, 99).unwrap();
        assert_eq!(null.x, simulate(&s).unwrap().x);
        assert_eq!(null.y, simulate(&s.with_seed(99)).unwrap().y);
    }

    #[test]
    fn crossed_linear_pair_is_uncorrelated() {
        let s = spec(SimType::Linear, 2000, 1, 0.0);
        let null = null_counterpart(&s, 5).unwrap();
        assert!(pearson(&null.x, &null.y).unwrap().r.abs() < 0.1);
    }

    fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn crossed_marginals_match() {
        let s = spec(SimType::Quadratic, 2000, 1, 1.0);
        let mut dep = simulate(&s).unwrap().y.feature(0);
        let mut crossed = null_counterpart(&s, 1234).unwrap().y.feature(0);
        // 1% two-sample critical value: 1.628 * sqrt(2 / 2000).
        let crit = 1.628 * (2.0f64 / 2000.0).sqrt();
        assert!(ks_statistic(&mut dep, &mut crossed) < crit);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(simulate(&spec(SimType::Linear, 0, 1, 0.0)).is_err());
        assert!(simulate(&spec(SimType::Linear, 5, 0, 0.0)).is_err());
        assert!(simulate(&spec(SimType::Linear, 5, 1, -1.0)).is_err());
    }
}
