//! Pairwise Euclidean distances, column centering, and nearest-neighbor ranks.
//!
//! All square matrices are stored row-major. Column `j` of a distance matrix
//! holds the distances from every point to `x_j`; ranks are taken within
//! that column, so `ranks.get(i, j) == k` means `x_i` is the `k`-th closest
//! point to `x_j` (the point itself being the first).

use crate::data::DataMatrix;
use crate::error::{MgcError, Result};

/// Dense `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> SquareMatrix<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(MgcError::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn filled(n: usize, value: T) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Relabels the points: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        let mut data = Vec::with_capacity(self.data.len());
        for &pi in perm {
            let row = self.row(pi);
            data.extend(perm.iter().map(|&pj| row[pj]));
        }
        Self { n: self.n, data }
    }
}

/// Symmetric matrix of Euclidean distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(SquareMatrix<f64>);

/// Distances centered within each column, diagonal excluded and set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix(SquareMatrix<f64>);

/// Minimal ranks of each column of a distance matrix, valued in `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix(SquareMatrix<u32>);

macro_rules! deref_square {
    ($name:ident, $t:ty) => {
        impl std::ops::Deref for $name {
            type Target = SquareMatrix<$t>;
            fn deref(&self) -> &Self::Target {
                &self.0
            }
        }

        impl $name {
            pub fn into_inner(self) -> SquareMatrix<$t> {
                self.0
            }

            pub fn permuted(&self, perm: &[usize]) -> Self {
                Self(self.0.permuted(perm))
            }
        }
    };
}

deref_square!(DistanceMatrix, f64);
deref_square!(CenteredMatrix, f64);
deref_square!(RankMatrix, u32);

impl DistanceMatrix {
    /// Wraps a precomputed matrix after checking symmetry, the zero diagonal,
    /// and non-negativity.
    pub fn from_square(m: SquareMatrix<f64>) -> Result<Self> {
        let n = m.n();
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(MgcError::InvalidData(format!(
                    "distance matrix diagonal entry {i} is {}",
                    m.get(i, i)
                )));
            }
            for j in 0..n {
                let v = m.get(i, j);
                if !v.is_finite() || v < 0.0 || v != m.get(j, i) {
                    return Err(MgcError::InvalidData(format!(
                        "distance matrix entry ({i}, {j}) = {v} is invalid or asymmetric"
                    )));
                }
            }
        }
        Ok(Self(m))
    }
}

/// `d_ij = ||x_i - x_j||`.
pub fn pairwise_distances(data: &DataMatrix) -> Result<DistanceMatrix> {
    if data.as_column_major().iter().any(|v| !v.is_finite()) {
        return Err(MgcError::InvalidData("non-finite value in data".into()));
    }
    let n = data.n();
    let mut m = SquareMatrix::filled(n, 0.0);
    for i in 0..n {
        let xi = data.observation(i);
        for j in (i + 1)..n {
            let xj = data.observation(j);
            let sq: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
            let d = sq.sqrt();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Ok(DistanceMatrix(m))
}

/// `a_ij = d_ij - (1 / (n - 1)) * sum_s d_sj` for `i != j`, `a_jj = 0`.
pub fn center_columns(dist: &DistanceMatrix) -> Result<CenteredMatrix> {
    let n = dist.n();
    if n < 2 {
        return Err(MgcError::InsufficientSample { needed: 2, got: n });
    }
    // Symmetry makes column sums equal to row sums.
    let means: Vec<f64> = (0..n)
        .map(|j| dist.row(j).iter().sum::<f64>() / (n - 1) as f64)
        .collect();
    let mut a = SquareMatrix::filled(n, 0.0);
    for i in 0..n {
        let row = dist.row(i);
        for j in 0..n {
            if i != j {
                a.set(i, j, row[j] - means[j]);
            }
        }
    }
    Ok(CenteredMatrix(a))
}

/// Minimal ranks within each column: tied distances share the smallest rank
/// of their group, and the next distinct distance gets the next integer.
pub fn compute_ranks(dist: &DistanceMatrix) -> RankMatrix {
    let n = dist.n();
    // Distances are non-negative, so once -0.0 is folded into +0.0 their bit
    // patterns sort like the values. Each key keeps the high bits of the
    // distance and the row index in the low bits; a single u64 sort then
    // leaves only runs sharing the truncated prefix to finish by exact value.
    let index_bits = usize::BITS - n.saturating_sub(1).leading_zeros();
    let index_mask = (1u64 << index_bits) - 1;
    let mut by_column = vec![0u32; n * n];
    let mut keys: Vec<u64> = Vec::with_capacity(n);
    for j in 0..n {
        let row = dist.row(j);
        let exact = |key: u64| (row[(key & index_mask) as usize] + 0.0).to_bits();
        keys.clear();
        keys.extend(
            row.iter()
                .enumerate()
                .map(|(i, d)| ((d + 0.0).to_bits() & !index_mask) | i as u64),
        );
        keys.sort_unstable();
        for t in 1..n {
            let mut u = t;
            while u > 0 && exact(keys[u - 1]) > exact(keys[u]) {
                keys.swap(u - 1, u);
                u -= 1;
            }
        }
        let out = &mut by_column[j * n..(j + 1) * n];
        let mut rank = 0u32;
        let mut prev = u64::MAX;
        for &key in &keys {
            let bits = exact(key);
            if bits != prev {
                rank += 1;
                prev = bits;
            }
            out[(key & index_mask) as usize] = rank;
        }
    }
    let mut ranks = Vec::with_capacity(n * n);
    for i in 0..n {
        ranks.extend((0..n).map(|j| by_column[j * n + i]));
    }
    RankMatrix(SquareMatrix { n, data: ranks })
}

/// Centered distances and their ranks for one dataset, ready for local
/// correlation. Built once and relabeled by index under permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRankPair {
    centered: CenteredMatrix,
    ranks: RankMatrix,
    max_rank: u32,
}

impl DistanceRankPair {
    pub fn new(centered: CenteredMatrix, ranks: RankMatrix) -> Result<Self> {
        if centered.n() != ranks.n() {
            return Err(MgcError::DimensionMismatch(format!(
                "centered matrix is {0}x{0} but rank matrix is {1}x{1}",
                centered.n(),
                ranks.n()
            )));
        }
        let max_rank = ranks.as_slice().iter().copied().max().unwrap_or(0);
        Ok(Self {
            centered,
            ranks,
            max_rank,
        })
    }

    pub fn from_distances(dist: &DistanceMatrix) -> Result<Self> {
        Self::new(center_columns(dist)?, compute_ranks(dist))
    }

    pub fn from_data(data: &DataMatrix) -> Result<Self> {
        Self::from_distances(&pairwise_distances(data)?)
    }

    pub fn n(&self) -> usize {
        self.centered.n()
    }

    pub fn centered(&self) -> &CenteredMatrix {
        &self.centered
    }

    pub fn ranks(&self) -> &RankMatrix {
        &self.ranks
    }

    /// Largest rank in any column; truncating at or above it keeps everything.
    pub fn max_rank(&self) -> u32 {
        self.max_rank
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            centered: self.centered.permuted(perm),
            ranks: self.ranks.permuted(perm),
            max_rank: self.max_rank,
        }
    }
}
