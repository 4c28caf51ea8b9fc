//! Permutation testing with reproducible, per-replicate random streams.
//!
//! Replicate `i` of a test draws its permutation from ChaCha8 stream `i`
//! keyed by the master seed, so results do not depend on scheduling or on
//! how many threads run the replicates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{mantel_from_distances, pearson_values};
use crate::data::{check_paired, DataMatrix};
use crate::distances::{center_columns, pairwise_distances, CenteredMatrix, DistanceMatrix, DistanceRankPair};
use crate::error::{MgcError, Result};
use crate::localmap::{full_scale_corr, EpsGuard};
use crate::mgc::{mgc_value, MgcOptions};

/// Default number of permutation replicates.
pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// Stream domains keep independent consumers of one master seed apart.
pub mod domain {
    pub const PERMUTATION: u64 = 0x7065_726d;
    pub const SIMULATION: u64 = 0x7369_6d75;
    pub const ALTERNATIVE: u64 = 0x616c_7465;
    pub const NULL_X: u64 = 0x6e75_6c78;
    pub const NULL_Y: u64 = 0x6e75_6c79;
    pub const JITTER: u64 = 0x6a69_7474;
    pub const REPLICATE: u64 = 0x7265_706c;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded source of independent random streams.
///
/// `stream(domain, index)` is ChaCha8 keyed by four SplitMix64 outputs of
/// `master_seed ^ domain`, with the ChaCha stream id set to `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub const ALGORITHM: &'static str = "chacha8-splitmix64-streams";

    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, domain: u64, index: u64) -> ChaCha8Rng {
        let mut state = self.master_seed ^ domain;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }

    /// A 64-bit seed for a nested consumer, e.g. one simulation replicate.
    pub fn derive_seed(&self, domain: u64, index: u64) -> u64 {
        let mut state = (self.master_seed ^ domain).wrapping_add(index.wrapping_mul(0xd134_2543_de82_ef95));
        splitmix64(&mut state)
    }

    /// Sub-spec for replicate `index`.
    pub fn child(&self, domain: u64, index: u64) -> Self {
        Self::new(self.derive_seed(domain, index))
    }
}

/// A statistic whose per-dataset structures are built once and relabeled by
/// index under permutation.
pub trait PermutationStatistic: Sync {
    type Prepared: Send + Sync;

    fn prepare(&self, data: &DataMatrix) -> Result<Self::Prepared>;

    /// Structures for the dataset whose observation `j` is observation
    /// `perm[j]` of the prepared one.
    fn relabel(&self, prepared: &Self::Prepared, perm: &[usize]) -> Self::Prepared;

    /// Larger values indicate stronger dependence.
    fn evaluate(&self, x: &Self::Prepared, y: &Self::Prepared) -> Result<f64>;

    fn compute(&self, x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
        check_paired(x, y)?;
        self.evaluate(&self.prepare(x)?, &self.prepare(y)?)
    }
}

/// Built-in test statistics. Mantel and Pearson are two-sided, so their
/// test statistic is the absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mgc,
    Dcorr,
    Mantel,
    Pearson,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mgc, Method::Dcorr, Method::Mantel, Method::Pearson];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mgc => "mgc",
            Method::Dcorr => "dcorr",
            Method::Mantel => "mantel",
            Method::Pearson => "pearson",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub enum Prepared {
    Ranked(DistanceRankPair),
    Centered(CenteredMatrix),
    Distances(DistanceMatrix),
    Values(Vec<f64>),
}

impl PermutationStatistic for Method {
    type Prepared = Prepared;

    fn prepare(&self, data: &DataMatrix) -> Result<Prepared> {
        if data.n() < 2 {
            return Err(MgcError::InsufficientSample {
                needed: 2,
                got: data.n(),
            });
        }
        Ok(match self {
            Method::Mgc => Prepared::Ranked(DistanceRankPair::from_data(data)?),
            Method::Dcorr => Prepared::Centered(center_columns(&pairwise_distances(data)?)?),
            Method::Mantel => Prepared::Distances(pairwise_distances(data)?),
            Method::Pearson => {
                if data.p() != 1 {
                    return Err(MgcError::UnsupportedDimension(format!(
                        "Pearson needs univariate data, got {} features",
                        data.p()
                    )));
                }
                if data.n() < 3 {
                    return Err(MgcError::InsufficientSample {
                        needed: 3,
                        got: data.n(),
                    });
                }
                Prepared::Values(data.as_column_major().to_vec())
            }
        })
    }

    fn relabel(&self, prepared: &Prepared, perm: &[usize]) -> Prepared {
        match prepared {
            Prepared::Ranked(p) => Prepared::Ranked(p.permuted(perm)),
            Prepared::Centered(c) => Prepared::Centered(c.permuted(perm)),
            Prepared::Distances(d) => Prepared::Distances(d.permuted(perm)),
            Prepared::Values(v) => Prepared::Values(perm.iter().map(|&i| v[i]).collect()),
        }
    }

    fn evaluate(&self, x: &Prepared, y: &Prepared) -> Result<f64> {
        match (self, x, y) {
            (Method::Mgc, Prepared::Ranked(a), Prepared::Ranked(b)) => mgc_value(a, b, MgcOptions::default()),
            (Method::Dcorr, Prepared::Centered(a), Prepared::Centered(b)) => {
                full_scale_corr(a, b, EpsGuard::Relative)
            }
            (Method::Mantel, Prepared::Distances(a), Prepared::Distances(b)) => {
                Ok(mantel_from_distances(a, b)?.abs())
            }
            (Method::Pearson, Prepared::Values(a), Prepared::Values(b)) => Ok(pearson_values(a, b)?.r.abs()),
            _ => Err(MgcError::InvalidParameter(format!(
                "prepared data does not belong to method {self}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
    pub null_stats: Vec<f64>,
}

impl TestReport {
    /// Mean and sample standard deviation of the permutation null.
    pub fn null_summary(&self) -> (f64, f64) {
        let r = self.null_stats.len() as f64;
        let mean = self.null_stats.iter().sum::<f64>() / r;
        let var = if self.null_stats.len() > 1 {
            self.null_stats.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    }
}

/// Random permutation of `0..n` from replicate stream `index`.
pub fn replicate_permutation(rng: &RngSpec, index: u64, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng.stream(domain::PERMUTATION, index));
    perm
}

/// Permutation test of independence. The p-value uses the add-one rule
/// `(1 + #{null >= observed}) / (r + 1)`.
pub fn permutation_test<S: PermutationStatistic>(
    stat: &S,
    x: &DataMatrix,
    y: &DataMatrix,
    permutations: usize,
    rng: RngSpec,
) -> Result<TestReport> {
    let n = check_paired(x, y)?;
    if permutations == 0 {
        return Err(MgcError::InvalidParameter(
            "at least one permutation is required".into(),
        ));
    }
    let px = stat.prepare(x)?;
    let py = stat.prepare(y)?;
    let observed = stat.evaluate(&px, &py)?;
    let null_stats = (0..permutations as u64)
        .into_par_iter()
        .map(|i| {
            let perm = replicate_permutation(&rng, i, n);
            stat.evaluate(&px, &stat.relabel(&py, &perm))
        })
        .collect::<Result<Vec<f64>>>()?;
    let exceed = null_stats.iter().filter(|&&v| v >= observed).count();
    Ok(TestReport {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (permutations + 1) as f64,
        permutations,
        seed: rng.master_seed,
        null_stats,
    })
}
