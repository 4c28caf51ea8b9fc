//! Multiscale graph correlation (MGC) for testing independence between two
//! paired samples of arbitrary dimension.
//!
//! The pipeline runs pairwise distances, column centering and ranks
//! ([`distances`]), the map of local distance correlations over all
//! neighborhood sizes ([`localmap`]), and the thresholded smoothed maximum
//! of that map ([`mgc`]). [`inference`] turns any statistic into a
//! permutation test, [`baselines`] holds Dcorr, Mantel and Pearson, and
//! [`simgen`] and [`harness`] cover the twenty benchmark simulations and
//! power estimation.
//!
//! ```
//! use mgc_core::{mgc_test_statistic, DataMatrix};
//!
//! let x = DataMatrix::univariate(&[0.0, 1.0, 3.0, 4.0, 7.0]).unwrap();
//! let y = DataMatrix::univariate(&[1.0, 3.0, 7.0, 9.0, 15.0]).unwrap();
//! let result = mgc_test_statistic(&x, &y).unwrap();
//! assert!((result.statistic - 1.0).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod cli;
pub mod data;
pub mod distances;
pub mod error;
pub mod harness;
pub mod inference;
pub mod localmap;
pub mod mgc;
pub mod simgen;
pub mod special;

pub use baselines::{dcorr_global, mantel, pearson, PearsonResult, ScalarStatistic};
pub use data::DataMatrix;
pub use distances::{
    center_columns, compute_ranks, pairwise_distances, CenteredMatrix, DistanceMatrix, DistanceRankPair, RankMatrix,
    SquareMatrix,
};
pub use error::{MgcError, Result};
pub use harness::{estimate_power, runtime_bench, statistic_panel, PowerResult};
pub use inference::{permutation_test, Method, PermutationStatistic, RngSpec, TestReport};
pub use localmap::{local_corr_map, local_map_naive, EpsGuard, LocalCorrMap};
pub use mgc::{mgc_statistic, mgc_test_statistic, threshold_tau, Connectivity, MgcOptions, MgcResult};
pub use simgen::{null_counterpart, simulate, SamplePair, SimSpec, SimType};
