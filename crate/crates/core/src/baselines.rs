//! Comparison statistics: global distance correlation, the Mantel
//! coefficient, and Pearson's correlation with its t-test.

use crate::data::{check_paired, DataMatrix};
use crate::distances::{center_columns, pairwise_distances, DistanceMatrix};
use crate::error::{MgcError, Result};
use crate::localmap::{full_scale_corr, EpsGuard};
use crate::special::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarStatistic {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearsonResult {
    pub r: f64,
    pub t: f64,
    pub p_value: f64,
}

fn require_sample(x: &DataMatrix, y: &DataMatrix, needed: usize) -> Result<usize> {
    let n = check_paired(x, y)?;
    if n < needed {
        return Err(MgcError::InsufficientSample { needed, got: n });
    }
    Ok(n)
}

/// Distance correlation at the full scale; identical to `corr[n][n]` of the
/// local correlation map.
pub fn dcorr_global(x: &DataMatrix, y: &DataMatrix) -> Result<ScalarStatistic> {
    require_sample(x, y, 2)?;
    let a = center_columns(&pairwise_distances(x)?)?;
    let b = center_columns(&pairwise_distances(y)?)?;
    Ok(ScalarStatistic {
        name: "dcorr",
        value: full_scale_corr(&a, &b, EpsGuard::Relative)?,
    })
}

/// `M(X, Y) = E(A o B) - E(A) E(B)` on raw distances, `E` the
/// diagonal-excluded mean.
fn mantel_moment(a: &DistanceMatrix, b: &DistanceMatrix) -> f64 {
    let n = a.n();
    let norm = (n * (n - 1)) as f64;
    let (mut cross, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (ra, rb) = (a.row(i), b.row(i));
        for j in 0..n {
            if i != j {
                cross += ra[j] * rb[j];
                sa += ra[j];
                sb += rb[j];
            }
        }
    }
    cross / norm - (sa / norm) * (sb / norm)
}

pub(crate) fn mantel_from_distances(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<f64> {
    let mxx = mantel_moment(a, a);
    let myy = mantel_moment(b, b);
    if !(mxx > 0.0 && myy > 0.0) {
        return Err(MgcError::DegenerateData(
            "Mantel coefficient needs non-constant distances on both sides".into(),
        ));
    }
    Ok(mantel_moment(a, b) / (mxx * myy).sqrt())
}

/// Mantel coefficient. Signed; only meaningful as a two-sided test.
pub fn mantel(x: &DataMatrix, y: &DataMatrix) -> Result<ScalarStatistic> {
    require_sample(x, y, 2)?;
    let value = mantel_from_distances(&pairwise_distances(x)?, &pairwise_distances(y)?)?;
    Ok(ScalarStatistic { name: "mantel", value })
}

pub(crate) fn pearson_values(x: &[f64], y: &[f64]) -> Result<PearsonResult> {
    let n = x.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(MgcError::DegenerateData(
            "Pearson correlation needs non-zero variance on both sides".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let t = if r.abs() == 1.0 {
        r.signum() * f64::INFINITY
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    Ok(PearsonResult {
        r,
        t,
        p_value: student_t_two_sided(t, df),
    })
}

/// Product-moment correlation of univariate data, with the two-sided
/// t-test on `n - 2` degrees of freedom.
pub fn pearson(x: &DataMatrix, y: &DataMatrix) -> Result<PearsonResult> {
    if x.p() != 1 || y.p() != 1 {
        return Err(MgcError::UnsupportedDimension(format!(
            "Pearson needs univariate data, got p = {}, q = {}",
            x.p(),
            y.p()
        )));
    }
    require_sample(x, y, 3)?;
    pearson_values(x.as_column_major(), y.as_column_major())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::DistanceRankPair;
    use crate::localmap::local_corr_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uni(v: &[f64]) -> DataMatrix {
        DataMatrix::univariate(v).unwrap()
    }

    #[test]
    fn dcorr_hand_example() {
        let x = uni(&[0.0, 1.0, 3.0]);
        assert_eq!(dcorr_global(&x, &x).unwrap().value, 1.0);
    }

    #[test]
    fn dcorr_constant_is_zero() {
        let x = uni(&[1.0; 5]);
        let y = uni(&[0.0, 1.0, 2.0, 3.0, 5.0]);
        assert_eq!(dcorr_global(&x, &y).unwrap().value, 0.0);
    }

    #[test]
    fn dcorr_equals_map_corner_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [5usize, 12, 31] {
            let xs: Vec<f64> = (0..2 * n).map(|_| rng.random()).collect();
            let ys: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 4.0).round()).collect();
            let x = DataMatrix::from_column_major(2, n, xs).unwrap();
            let y = uni(&ys);
            let map = local_corr_map(
                &DistanceRankPair::from_data(&x).unwrap(),
                &DistanceRankPair::from_data(&y).unwrap(),
                EpsGuard::Relative,
            )
            .unwrap();
            assert_eq!(dcorr_global(&x, &y).unwrap().value, map.corr_full());
        }
    }

    #[test]
    fn mantel_examples() {
        let x = uni(&[0.0, 1.0, 3.0]);
        assert!((mantel(&x, &x).unwrap().value - 1.0).abs() < 1e-15);
        let y = uni(&[0.0, 3.0, 1.0]);
        assert!((mantel(&x, &y).unwrap().value + 1.0).abs() < 1e-12);
        let c = uni(&[2.0; 3]);
        assert!(matches!(mantel(&c, &x), Err(MgcError::DegenerateData(_))));
    }

    #[test]
    fn mantel_invariant_to_shift_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 15;
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let y = uni(&(0..n).map(|_| rng.random()).collect::<Vec<_>>());
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let moved: Vec<[f64; 2]> = pts
            .iter()
            .map(|p| [c * p[0] - s * p[1] + 5.0, s * p[0] + c * p[1] - 2.0])
            .collect();
        let a = mantel(&DataMatrix::from_observations(&pts).unwrap(), &y).unwrap().value;
        let b = mantel(&DataMatrix::from_observations(&moved).unwrap(), &y).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples() {
        let x = uni(&[1.0, 2.0, 3.0]);
        assert!((pearson(&x, &uni(&[2.0, 4.0, 6.0])).unwrap().r - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &uni(&[6.0, 4.0, 2.0])).unwrap().r + 1.0).abs() < 1e-15);
        let half = pearson(&x, &uni(&[1.0, 3.0, 2.0])).unwrap();
        assert!((half.r - 0.5).abs() < 1e-15);
        assert!(half.p_value > 0.0 && half.p_value <= 1.0);
    }

    #[test]
    fn pearson_errors() {
        let x3 = DataMatrix::from_observations(&[[0.0, 1.0, 2.0], [1.0, 1.0, 0.0], [3.0, 2.0, 1.0]]).unwrap();
        let y = uni(&[1.0, 2.0, 3.0]);
        assert!(matches!(pearson(&x3, &y), Err(MgcError::UnsupportedDimension(_))));
        assert!(matches!(
            pearson(&uni(&[1.0, 1.0, 1.0]), &y),
            Err(MgcError::DegenerateData(_))
        ));
        assert!(matches!(
            pearson(&uni(&[1.0, 2.0]), &uni(&[1.0, 2.0])),
            Err(MgcError::InsufficientSample { .. })
        ));
    }

    #[test]
    fn pearson_bounds_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.random_range(3..40);
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let r = pearson(&uni(&x), &uni(&y)).unwrap();
            assert!((-1.0..=1.0).contains(&r.r));
            assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }
    }
}
