//! Differentiable rank-correlation losses for training quality predictors,
//! with the exact metrics they approximate, two classical baselines, and a
//! memory-bank mechanism that widens batch-level rank optimization toward
//! the whole training set.
//!
//! The pieces:
//!
//! - [`correlation`]: exact PLCC, fractional hard ranks, and Spearman
//!   correlation in two cross-checking formulations.
//! - [`soft_rank`]: the tanh-smoothed rank, its Jacobian, and the
//!   monotonicity loss with a closed-form gradient.
//! - [`baseline`]: pairwise margin ranking loss and the permutahedron
//!   projection soft sort, for comparison.
//! - [`bank`]: per-sample dictionaries of gradient-free past predictions,
//!   assembled with the current batch so the loss sees a global sample set.
//! - [`gradcheck`]: finite-difference audits of every analytic derivative.
//! - [`train`]: a deterministic desk-scale training harness on synthetic
//!   quality data.
//! - [`score_file`], [`bench`], [`cli`]: the file format and drivers for
//!   the `rankcorr` command-line tool.

pub mod bank;
pub mod baseline;
pub mod bench;
pub mod cli;
pub mod correlation;
pub mod error;
pub mod gradcheck;
pub mod score_file;
pub mod soft_rank;
pub mod train;

pub use bank::{BankEntry, MemoryBank};
pub use baseline::{margin_rank_loss, permutahedron_project, MarginOrder, ProjectionConfig};
pub use correlation::{hard_rank, plcc, srocc, srocc_closed_form};
pub use error::{Error, Result};
pub use score_file::ScoreFile;
pub use soft_rank::{
    mono_loss, mono_loss_value, soft_rank, soft_rank_jacobian, GradTaggedScores, LossResult,
    SoftRankConfig,
};
pub use train::{
    gen_synthetic, split_kfold, train, EpochMetrics, LossMode, Predictor, SyntheticDataset,
    TrainConfig, TrainOutcome,
};
