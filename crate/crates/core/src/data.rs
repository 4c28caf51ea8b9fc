//! Data containers shared by every statistic.

use rand::Rng;

use crate::error::{MgcError, Result};
use crate::simgen::standard_normal;

/// `p` features by `n` observations, one column per observation.
///
/// Storage is column-major so each observation is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    p: usize,
    n: usize,
}

impl DataMatrix {
    /// Builds a matrix from column-major storage (`values[j * p + d]` is
    /// feature `d` of observation `j`).
    pub fn from_column_major(p: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(MgcError::InvalidData(format!(
                "data must have at least one observation and one feature (got p = {p}, n = {n})"
            )));
        }
        if values.len() != p * n {
            return Err(MgcError::InvalidData(format!(
                "expected {} values for a {p}x{n} matrix, got {}",
                p * n,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(MgcError::InvalidData(format!(
                "non-finite value {} at observation {}, feature {}",
                values[pos],
                pos / p,
                pos % p
            )));
        }
        Ok(Self { values, p, n })
    }

    /// One slice per observation.
    pub fn from_observations<S: AsRef<[f64]>>(observations: &[S]) -> Result<Self> {
        let n = observations.len();
        let p = observations.first().map_or(0, |o| o.as_ref().len());
        let mut values = Vec::with_capacity(n * p);
        for (j, obs) in observations.iter().enumerate() {
            let obs = obs.as_ref();
            if obs.len() != p {
                return Err(MgcError::InvalidData(format!(
                    "observation {j} has {} features, expected {p}",
                    obs.len()
                )));
            }
            values.extend_from_slice(obs);
        }
        Self::from_column_major(p, n, values)
    }

    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::from_column_major(1, values.len(), values.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn observation(&self, j: usize) -> &[f64] {
        &self.values[j * self.p..(j + 1) * self.p]
    }

    pub fn get(&self, feature: usize, obs: usize) -> f64 {
        self.values[obs * self.p + feature]
    }

    pub fn as_column_major(&self) -> &[f64] {
        &self.values
    }

    pub fn observations(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    /// Feature `d` across all observations.
    pub fn feature(&self, d: usize) -> Vec<f64> {
        self.observations().map(|o| o[d]).collect()
    }

    /// Observations reordered so that column `j` of the result is column
    /// `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.n);
        let mut values = Vec::with_capacity(self.values.len());
        for &src in perm {
            values.extend_from_slice(self.observation(src));
        }
        Self {
            values,
            p: self.p,
            n: self.n,
        }
    }

    /// Adds independent `N(0, variance)` noise to every entry. Used to break
    /// ties before ranking.
    pub fn jittered<R: Rng + ?Sized>(&self, variance: f64, rng: &mut R) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(MgcError::InvalidParameter(format!(
                "jitter variance must be positive, got {variance}"
            )));
        }
        let sd = variance.sqrt();
        let values = self
            .values
            .iter()
            .map(|v| v + sd * standard_normal(rng))
            .collect();
        Self::from_column_major(self.p, self.n, values)
    }
}

/// Ensures two datasets describe the same observations.
pub(crate) fn check_paired(x: &DataMatrix, y: &DataMatrix) -> Result<usize> {
    if x.n() != y.n() {
        return Err(MgcError::DimensionMismatch(format!(
            "x has {} observations but y has {}",
            x.n(),
            y.n()
        )));
    }
    Ok(x.n())
}
