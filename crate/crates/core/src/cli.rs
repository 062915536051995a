//! Command drivers behind the `rankcorr` binary. Everything here returns
//! serializable reports so the thin binary can render CSV or a JSON run
//! summary uniformly.

use serde::Serialize;

use crate::correlation::{plcc, srocc};
use crate::error::{Error, Result};
use crate::gradcheck::CheckReport;
use crate::score_file::ScoreFile;
use crate::soft_rank::{mono_loss_value, SoftRankConfig};
use crate::train::{gen_synthetic, split_kfold, train, LossMode, TrainConfig};

/// Process exit codes, one per documented failure class.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const GENERAL: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const INVALID_CONFIG: i32 = 4;
    /// A gradient check ran to completion and failed its tolerance.
    pub const CHECK_FAILED: i32 = 5;
}

pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Parse { .. } | Error::DuplicateId { .. } => exit_code::PARSE,
        Error::DegenerateVariance { .. } => exit_code::DEGENERATE,
        Error::InvalidConfig(_) => exit_code::INVALID_CONFIG,
        _ => exit_code::GENERAL,
    }
}

/// Uniform machine-readable envelope for every command.
pub fn run_summary(
    command: &str,
    config: serde_json::Value,
    results: serde_json::Value,
    wall_seconds: f64,
) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "config": config,
        "results": results,
        "wall_seconds": wall_seconds,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

// ---------------------------------------------------------------------------
// corr
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CorrReport {
    pub plcc: f64,
    pub srocc: f64,
    /// Negated monotonicity loss at the requested steepness: the smooth
    /// Spearman surrogate.
    pub soft_srocc: f64,
    pub n: usize,
    pub k: f64,
}

impl CorrReport {
    pub fn to_csv(&self) -> String {
        format!(
            "plcc,srocc,soft_srocc,n,k\n{},{},{},{},{}\n",
            self.plcc, self.srocc, self.soft_srocc, self.n, self.k
        )
    }
}

pub fn run_corr(scores: &ScoreFile, steepness: f64) -> Result<CorrReport> {
    if scores.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: scores.len(),
        });
    }
    let cfg = SoftRankConfig::new(steepness)?;
    let pearson = plcc(&scores.mos, &scores.preds)?;
    let spearman = srocc(&scores.mos, &scores.preds)?;
    let (loss, degenerate) = mono_loss_value(&scores.preds, &scores.mos, &cfg)?;
    Ok(CorrReport {
        plcc: pearson,
        srocc: spearman,
        soft_srocc: if degenerate { 0.0 } else { -loss },
        n: scores.len(),
        k: steepness,
    })
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

pub fn gradcheck_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

pub fn gradcheck_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("name,passed,trials,comparisons,worst_rel_err,tolerance\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{:e},{:e}\n",
            r.name, r.passed, r.trials, r.comparisons, r.worst_rel_err, r.tolerance
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

/// Configuration of the synthetic ablation sweep: the task, the split, the
/// shared training hyperparameters, and the seed list. Parsed from a flat
/// `key = value` text file; unknown keys are rejected by name.
#[derive(Debug, Clone, Serialize)]
pub struct AblationConfig {
    pub n: usize,
    pub d: usize,
    pub noise_sigma: f64,
    pub heteroscedastic: bool,
    pub folds: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden_dim: usize,
    pub lambda: f64,
    pub steepness: f64,
    pub retention: u64,
    /// Epochs in the per-run tail window whose median is reported;
    /// 0 means a quarter of the trajectory.
    pub summary_window: usize,
    pub seeds: Vec<u64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            n: 240,
            d: 8,
            noise_sigma: 0.5,
            heteroscedastic: true,
            folds: 5,
            batch_size: 8,
            epochs: 30,
            learning_rate: 0.5,
            hidden_dim: 8,
            lambda: 1.0,
            steepness: SoftRankConfig::DEFAULT_STEEPNESS,
            retention: 1,
            summary_window: 0,
            seeds: (1..=12).collect(),
        }
    }
}

impl AblationConfig {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, keys not listed keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (offset, raw) in text.lines().enumerate() {
            let line_no = offset + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got {raw:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |field: &str| {
                Error::InvalidConfig(format!("field {field}: cannot parse value {value:?}"))
            };
            match key {
                "n" => config.n = value.parse().map_err(|_| bad("n"))?,
                "d" => config.d = value.parse().map_err(|_| bad("d"))?,
                "noise_sigma" => {
                    config.noise_sigma = value.parse().map_err(|_| bad("noise_sigma"))?
                }
                "heteroscedastic" => {
                    config.heteroscedastic =
                        value.parse().map_err(|_| bad("heteroscedastic"))?
                }
                "folds" => config.folds = value.parse().map_err(|_| bad("folds"))?,
                "batch_size" => config.batch_size = value.parse().map_err(|_| bad("batch_size"))?,
                "epochs" => config.epochs = value.parse().map_err(|_| bad("epochs"))?,
                "learning_rate" => {
                    config.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
                }
                "hidden" => config.hidden_dim = value.parse().map_err(|_| bad("hidden"))?,
                "lambda" => config.lambda = value.parse().map_err(|_| bad("lambda"))?,
                "k" => config.steepness = value.parse().map_err(|_| bad("k"))?,
                "retention" => config.retention = value.parse().map_err(|_| bad("retention"))?,
                "summary_window" => {
                    config.summary_window =
                        value.parse().map_err(|_| bad("summary_window"))?
                }
                "seeds" => {
                    config.seeds = value
                        .split(',')
                        .map(|s| s.trim().parse().map_err(|_| bad("seeds")))
                        .collect::<Result<Vec<u64>>>()?;
                }
                other => {
                    return Err(Error::InvalidConfig(format!("unknown field {other:?}")));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("field seeds: list is empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::InvalidConfig(
                "field seeds: duplicate seeds".into(),
            ));
        }
        Ok(())
    }

    fn train_config(&self, mode: LossMode, seed: u64) -> TrainConfig {
        TrainConfig {
            loss_mode: mode,
            lambda_mono: self.lambda,
            soft_rank: SoftRankConfig {
                steepness: self.steepness,
                eps: SoftRankConfig::DEFAULT_EPS,
            },
            batch_size: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
            retention_epochs: self.retention,
            hidden_dim: self.hidden_dim,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRun {
    pub mode: LossMode,
    pub seed: u64,
    pub status: String,
    pub test_plcc: Option<f64>,
    pub test_srocc: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationSummary {
    pub mode: LossMode,
    pub runs_ok: usize,
    pub plcc_mean: f64,
    pub plcc_std: f64,
    pub srocc_mean: f64,
    pub srocc_std: f64,
}

/// One-sided paired comparison computed by exact sign-flip enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct PairedComparison {
    pub baseline: LossMode,
    pub candidate: LossMode,
    pub mean_diff_srocc: f64,
    /// Probability, under random sign flips of the paired differences, of a
    /// mean at least as large as observed.
    pub p_one_sided: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub runs: Vec<AblationRun>,
    pub summaries: Vec<AblationSummary>,
    pub comparisons: Vec<PairedComparison>,
}

impl AblationReport {
    /// Per-run rows, a blank line, then the per-mode summary table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,seed,status,test_plcc,test_srocc\n");
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                run.mode,
                run.seed,
                run.status,
                fmt(run.test_plcc),
                fmt(run.test_srocc)
            ));
        }
        out.push('\n');
        out.push_str("mode,runs_ok,plcc_mean,plcc_std,srocc_mean,srocc_std\n");
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.mode, s.runs_ok, s.plcc_mean, s.plcc_std, s.srocc_mean, s.srocc_std
            ));
        }
        out
    }

    pub fn summary_for(&self, mode: LossMode) -> Option<&AblationSummary> {
        self.summaries.iter().find(|s| s.mode == mode)
    }
}

/// Exact one-sided p-value of the paired mean under sign flips.
///
/// Enumerates all `2^m` sign assignments for `m <= 20` and counts those
/// whose mean reaches the observed one; falls back to a seeded Monte Carlo
/// estimate (100k flips) for longer lists.
pub fn paired_one_sided_p(diffs: &[f64]) -> f64 {
    use rand::prelude::*;

    let m = diffs.len();
    if m == 0 {
        return 1.0;
    }
    let observed: f64 = diffs.iter().sum();
    // Counting on sums avoids dividing by m in the inner loop.
    let hits_at_least = |signed_sum: f64| signed_sum >= observed - 1e-12;

    if m <= 20 {
        let total = 1u64 << m;
        let mut hits = 0u64;
        for pattern in 0..total {
            let mut sum = 0.0;
            for (bit, &d) in diffs.iter().enumerate() {
                if pattern & (1 << bit) == 0 {
                    sum += d;
                } else {
                    sum -= d;
                }
            }
            if hits_at_least(sum) {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let trials = 100_000;
        let mut hits = 0u64;
        for _ in 0..trials {
            let sum: f64 = diffs
                .iter()
                .map(|&d| if rng.random::<bool>() { d } else { -d })
                .sum();
            if hits_at_least(sum) {
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs all three loss modes over the seed list, paired: every (mode, seed)
/// run sees the identical dataset, split and initialization. Each run
/// reports the tail-window median of its test correlations (see
/// [`crate::train::TrainOutcome::tail_metrics`]). A diverged run is
/// recorded and skipped in the summaries; it does not abort the sweep.
pub fn run_ablation(config: &AblationConfig) -> Result<AblationReport> {
    config.validate()?;
    let window = if config.summary_window == 0 {
        (config.epochs / 4).max(1)
    } else {
        config.summary_window
    };

    let mut runs = Vec::new();
    let mut finals: std::collections::BTreeMap<(usize, u64), (f64, f64)> =
        std::collections::BTreeMap::new();

    for (mode_idx, &mode) in LossMode::ALL.iter().enumerate() {
        for &seed in &config.seeds {
            let dataset =
                gen_synthetic(seed, config.n, config.d, config.noise_sigma, config.heteroscedastic)?;
            let (train_set, test_set) = split_kfold(&dataset, config.folds, 0, seed)?;
            let train_config = config.train_config(mode, seed);
            match train(&train_set, &test_set, &train_config) {
                Ok(outcome) => {
                    let (tail_plcc, tail_srocc) = outcome.tail_metrics(window);
                    finals.insert((mode_idx, seed), (tail_plcc, tail_srocc));
                    runs.push(AblationRun {
                        mode,
                        seed,
                        status: "ok".into(),
                        test_plcc: Some(tail_plcc),
                        test_srocc: Some(tail_srocc),
                    });
                }
                Err(Error::Divergence { epoch }) => {
                    runs.push(AblationRun {
                        mode,
                        seed,
                        status: format!("diverged at epoch {epoch}"),
                        test_plcc: None,
                        test_srocc: None,
                    });
                }
                Err(other) => return Err(other),
            }
        }
    }

    let mut summaries = Vec::new();
    for (mode_idx, &mode) in LossMode::ALL.iter().enumerate() {
        let plccs: Vec<f64> = config
            .seeds
            .iter()
            .filter_map(|&s| finals.get(&(mode_idx, s)).map(|&(p, _)| p))
            .collect();
        let sroccs: Vec<f64> = config
            .seeds
            .iter()
            .filter_map(|&s| finals.get(&(mode_idx, s)).map(|&(_, r)| r))
            .collect();
        let (plcc_mean, plcc_std) = mean_std(&plccs);
        let (srocc_mean, srocc_std) = mean_std(&sroccs);
        summaries.push(AblationSummary {
            mode,
            runs_ok: sroccs.len(),
            plcc_mean,
            plcc_std,
            srocc_mean,
            srocc_std,
        });
    }

    // Paired comparisons on seeds where both runs finished.
    let mut comparisons = Vec::new();
    for (baseline, candidate) in [
        (LossMode::MseOnly, LossMode::MsePlusMono),
        (LossMode::MsePlusMono, LossMode::MsePlusMonoBank),
        (LossMode::MseOnly, LossMode::MsePlusMonoBank),
    ] {
        let base_idx = LossMode::ALL.iter().position(|&m| m == baseline).unwrap();
        let cand_idx = LossMode::ALL.iter().position(|&m| m == candidate).unwrap();
        let diffs: Vec<f64> = config
            .seeds
            .iter()
            .filter_map(|&s| {
                match (finals.get(&(base_idx, s)), finals.get(&(cand_idx, s))) {
                    (Some(&(_, base)), Some(&(_, cand))) => Some(cand - base),
                    _ => None,
                }
            })
            .collect();
        let mean_diff = if diffs.is_empty() {
            f64::NAN
        } else {
            diffs.iter().sum::<f64>() / diffs.len() as f64
        };
        comparisons.push(PairedComparison {
            baseline,
            candidate,
            mean_diff_srocc: mean_diff,
            p_one_sided: paired_one_sided_p(&diffs),
        });
    }

    Ok(AblationReport {
        runs,
        summaries,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corr_report_on_identity_and_negation() {
        let file = ScoreFile::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let report = run_corr(&file, 10.0).unwrap();
        assert_eq!(report.plcc, 1.0);
        assert_eq!(report.srocc, 1.0);
        assert!(report.soft_srocc > 0.9);

        let file = ScoreFile::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 2.0, 3.0],
            vec![-1.0, -2.0, -3.0],
        )
        .unwrap();
        let report = run_corr(&file, 10.0).unwrap();
        assert_eq!(report.plcc, -1.0);
        assert_eq!(report.srocc, -1.0);
        assert!(report.soft_srocc < -0.9);
    }

    #[test]
    fn corr_matches_spec_hand_case() {
        let file = ScoreFile::new(
            (1..=5).map(|i| format!("s{i}")).collect(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![1.0, 2.0, 3.0, 5.0, 4.0],
        )
        .unwrap();
        let report = run_corr(&file, 10.0).unwrap();
        assert!((report.srocc - 0.9).abs() < 1e-12);
    }

    #[test]
    fn config_parsing_and_unknown_fields() {
        let config = AblationConfig::parse(
            "n = 60\nd = 3\nlambda = 0.5\nseeds = 1, 2, 3\n# comment\nepochs = 4\n",
        )
        .unwrap();
        assert_eq!(config.n, 60);
        assert_eq!(config.seeds, vec![1, 2, 3]);
        assert_eq!(config.epochs, 4);
        assert_eq!(config.folds, AblationConfig::default().folds);

        let err = AblationConfig::parse("typo_field = 1\n").unwrap_err();
        match err {
            Error::InvalidConfig(message) => assert!(message.contains("typo_field")),
            other => panic!("unexpected {other:?}"),
        }

        let err = AblationConfig::parse("epochs = banana\n").unwrap_err();
        match err {
            Error::InvalidConfig(message) => assert!(message.contains("epochs")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn permutation_test_hand_cases() {
        // All-positive differences: only the identity assignment reaches
        // the observed mean.
        let p = paired_one_sided_p(&[1.0, 1.0, 1.0]);
        assert!((p - 1.0 / 8.0).abs() < 1e-12, "{p}");

        // Perfectly balanced: {++, +-, -+} have mean >= 0.
        let p = paired_one_sided_p(&[1.0, -1.0]);
        assert!((p - 0.75).abs() < 1e-12, "{p}");

        assert_eq!(paired_one_sided_p(&[]), 1.0);
    }

    #[test]
    fn zero_lambda_ablation_rows_match() {
        let config = AblationConfig {
            n: 60,
            d: 3,
            epochs: 4,
            lambda: 0.0,
            seeds: vec![1, 2],
            ..AblationConfig::default()
        };
        let report = run_ablation(&config).unwrap();
        for &seed in &config.seeds {
            let by = |mode: LossMode| {
                report
                    .runs
                    .iter()
                    .find(|r| r.mode == mode && r.seed == seed)
                    .unwrap()
            };
            let mse = by(LossMode::MseOnly);
            let mono = by(LossMode::MsePlusMono);
            assert_eq!(
                mse.test_srocc.unwrap().to_bits(),
                mono.test_srocc.unwrap().to_bits()
            );
        }
    }

    #[test]
    fn summaries_stay_in_bounds() {
        let config = AblationConfig {
            n: 60,
            d: 3,
            epochs: 4,
            seeds: vec![1, 2, 3],
            ..AblationConfig::default()
        };
        let report = run_ablation(&config).unwrap();
        assert_eq!(report.summaries.len(), 3);
        for s in &report.summaries {
            assert!((-1.0..=1.0).contains(&s.srocc_mean), "{s:?}");
        }
        let csv = report.to_csv();
        assert!(csv.starts_with("mode,seed,status"));
        assert!(csv.contains("srocc_mean"));
    }
}
