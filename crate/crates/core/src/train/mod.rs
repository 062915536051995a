//! Desk-scale training loop: plain SGD on a composite objective of mean
//! squared error plus a weighted monotonicity loss, optionally widened by
//! the memory bank. Deterministic per seed; one RNG stream drives
//! initialization and batch shuffling regardless of loss mode, so modes are
//! comparable trajectory by trajectory.

mod predictor;
mod synth;

pub use predictor::Predictor;
pub use synth::{gen_synthetic, link, split_kfold, SyntheticDataset};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bank::MemoryBank;
use crate::correlation::{plcc, srocc};
use crate::error::{Error, Result};
use crate::soft_rank::{GradTaggedScores, SoftRankConfig};

/// Which terms the training objective carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    MseOnly,
    MsePlusMono,
    MsePlusMonoBank,
}

impl LossMode {
    pub const ALL: [LossMode; 3] = [
        LossMode::MseOnly,
        LossMode::MsePlusMono,
        LossMode::MsePlusMonoBank,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossMode::MseOnly => "mse_only",
            LossMode::MsePlusMono => "mse_plus_mono",
            LossMode::MsePlusMonoBank => "mse_plus_mono_bank",
        }
    }

    pub fn uses_mono(&self) -> bool {
        !matches!(self, LossMode::MseOnly)
    }

    pub fn uses_bank(&self) -> bool {
        matches!(self, LossMode::MsePlusMonoBank)
    }
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse_only" => Ok(LossMode::MseOnly),
            "mse_plus_mono" => Ok(LossMode::MsePlusMono),
            "mse_plus_mono_bank" => Ok(LossMode::MsePlusMonoBank),
            other => Err(Error::InvalidConfig(format!("unknown loss mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub loss_mode: LossMode,
    /// Weight of the monotonicity term. Zero reduces any mode to plain MSE
    /// bit for bit.
    pub lambda_mono: f64,
    pub soft_rank: SoftRankConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub retention_epochs: u64,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss_mode: LossMode::MseOnly,
            lambda_mono: 1.0,
            soft_rank: SoftRankConfig::default(),
            batch_size: 8,
            epochs: 30,
            learning_rate: 0.5,
            seed: 1,
            retention_epochs: 1,
            hidden_dim: 8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.soft_rank.validate()?;
        if self.loss_mode.uses_mono() && self.batch_size < 2 {
            return Err(Error::InvalidConfig(
                "batch_size must be >= 2 when the objective includes the monotonicity loss".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be finite and positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lambda_mono.is_finite() && self.lambda_mono >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda_mono must be finite and non-negative, got {}",
                self.lambda_mono
            )));
        }
        if self.retention_epochs == 0 {
            return Err(Error::InvalidConfig("retention_epochs must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-epoch record. Test correlations are clamped to 0.0 when the
/// predictor is constant on the test set (degenerate correlation), so the
/// trajectory stays plottable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_plcc: f64,
    pub test_srocc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metrics: Vec<EpochMetrics>,
    pub predictor: Predictor,
}

impl TrainOutcome {
    pub fn final_metrics(&self) -> EpochMetrics {
        *self.metrics.last().expect("at least one epoch")
    }

    /// Test correlations summarized over the last `window` epochs, each as
    /// the median of its per-epoch values. With a fixed learning rate the
    /// trajectory keeps oscillating around its stationary level, so a
    /// single final epoch is a noisy sample of it; the median over a tail
    /// window measures the level itself. Returns `(plcc, srocc)`.
    pub fn tail_metrics(&self, window: usize) -> (f64, f64) {
        let window = window.clamp(1, self.metrics.len());
        let tail = &self.metrics[self.metrics.len() - window..];
        let median = |values: &mut Vec<f64>| -> f64 {
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite metrics"));
            let mid = values.len() / 2;
            if values.len() % 2 == 1 {
                values[mid]
            } else {
                0.5 * (values[mid - 1] + values[mid])
            }
        };
        let mut plccs: Vec<f64> = tail.iter().map(|m| m.test_plcc).collect();
        let mut sroccs: Vec<f64> = tail.iter().map(|m| m.test_srocc).collect();
        (median(&mut plccs), median(&mut sroccs))
    }
}

/// Composite objective value at the current parameters:
/// `mse(batch) + lambda * mono(batch ++ extra)`.
///
/// `extra` is gradient-free context (bank predictions with their labels)
/// appended after the batch. `lambda == 0` skips the monotonicity term
/// entirely — not merely scales it — so a zero-weight run is arithmetically
/// identical to pure MSE. The monotonicity term is also skipped when the
/// union holds fewer than two points.
pub fn objective_value(
    predictor: &Predictor,
    xs: &[Vec<f64>],
    ys: &[f64],
    extra: Option<(&[f64], &[f64])>,
    lambda: f64,
    soft_rank: &SoftRankConfig,
) -> Result<f64> {
    let preds = predictor.predict_batch(xs);
    let mse = mean_squared_error(&preds, ys);
    if lambda == 0.0 {
        return Ok(mse);
    }
    let (union_preds, union_mos) = build_union(&preds, ys, extra);
    if union_preds.len() < 2 {
        return Ok(mse);
    }
    let (mono, _) = crate::soft_rank::mono_loss_value(&union_preds, &union_mos, soft_rank)?;
    Ok(mse + lambda * mono)
}

/// Composite objective with its exact gradient in flat parameter space.
/// Returns `(value, d value / d params, batch predictions)`.
pub fn objective_param_grad(
    predictor: &Predictor,
    xs: &[Vec<f64>],
    ys: &[f64],
    extra: Option<(&[f64], &[f64])>,
    lambda: f64,
    soft_rank: &SoftRankConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let preds = predictor.predict_batch(xs);
    let batch = preds.len() as f64;
    let mse = mean_squared_error(&preds, ys);
    let mut dloss_dy: Vec<f64> = preds
        .iter()
        .zip(ys)
        .map(|(p, y)| 2.0 * (p - y) / batch)
        .collect();
    let mut value = mse;

    if lambda != 0.0 {
        let (union_preds, union_mos) = build_union(&preds, ys, extra);
        if union_preds.len() >= 2 {
            let live = preds.len();
            let mut mask = vec![false; union_preds.len()];
            mask[..live].fill(true);
            let tagged = GradTaggedScores::new(union_preds, mask)?;
            let mono = crate::soft_rank::mono_loss(&tagged, &union_mos, soft_rank)?;
            value += lambda * mono.loss;
            for (slot, g) in dloss_dy.iter_mut().zip(&mono.grad[..live]) {
                *slot += lambda * g;
            }
        }
    }

    let grad = predictor.param_gradient(xs, &dloss_dy);
    Ok((value, grad, preds))
}

fn mean_squared_error(preds: &[f64], ys: &[f64]) -> f64 {
    let n = preds.len() as f64;
    preds
        .iter()
        .zip(ys)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / n
}

fn build_union(
    preds: &[f64],
    ys: &[f64],
    extra: Option<(&[f64], &[f64])>,
) -> (Vec<f64>, Vec<f64>) {
    match extra {
        Some((extra_preds, extra_mos)) => {
            let mut union_preds = preds.to_vec();
            let mut union_mos = ys.to_vec();
            union_preds.extend_from_slice(extra_preds);
            union_mos.extend_from_slice(extra_mos);
            (union_preds, union_mos)
        }
        None => (preds.to_vec(), ys.to_vec()),
    }
}

/// Trains a fresh predictor on `train_set`, reporting test correlations on
/// `test_set` after every epoch.
///
/// Mini-batches are reshuffled each epoch; the optimizer is plain SGD with
/// a fixed learning rate. In bank mode the bank is updated with the batch's
/// detached predictions after each step and evicted at every epoch
/// boundary.
pub fn train(
    train_set: &SyntheticDataset,
    test_set: &SyntheticDataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::InvalidConfig(
            "train and test sets must be non-empty".into(),
        ));
    }
    if train_set.feature_dim() != test_set.feature_dim() {
        return Err(Error::LengthMismatch {
            left: train_set.feature_dim(),
            right: test_set.feature_dim(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut predictor = Predictor::new(train_set.feature_dim(), config.hidden_dim, &mut rng);
    let mut bank = if config.loss_mode.uses_bank() {
        Some(MemoryBank::new(config.retention_epochs)?)
    } else {
        None
    };
    // Zero weight or a mono-free mode: the mono term is skipped outright.
    let lambda = if config.loss_mode.uses_mono() {
        config.lambda_mono
    } else {
        0.0
    };

    let n = train_set.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut metrics = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;

        for chunk in order.chunks(config.batch_size) {
            let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| train_set.features[i].clone()).collect();
            let ys: Vec<f64> = chunk.iter().map(|&i| train_set.mos[i]).collect();
            let ids: Vec<&str> = chunk.iter().map(|&i| train_set.ids[i].as_str()).collect();

            let context = bank
                .as_ref()
                .filter(|_| lambda != 0.0)
                .map(|b| b.context_excluding(&ids));
            let extra = context.as_ref().map(|(p, m)| (p.as_slice(), m.as_slice()));

            let (value, grad, preds) =
                objective_param_grad(&predictor, &xs, &ys, extra, lambda, &config.soft_rank)?;
            if !value.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            predictor.apply_gradient_step(&grad, config.learning_rate);

            if let Some(b) = bank.as_mut() {
                b.update(&ids, &preds, &ys, epoch as u64)?;
            }

            loss_sum += value;
            batches += 1;
        }

        if let Some(b) = bank.as_mut() {
            b.evict(epoch as u64);
        }

        let train_loss = loss_sum / batches as f64;
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }

        let test_preds = predictor.predict_batch(&test_set.features);
        let test_plcc = plcc(&test_set.mos, &test_preds).unwrap_or(0.0);
        let test_srocc = srocc(&test_set.mos, &test_preds).unwrap_or(0.0);
        metrics.push(EpochMetrics {
            epoch,
            train_loss,
            test_plcc,
            test_srocc,
        });
    }

    Ok(TrainOutcome { metrics, predictor })
}
