//! Wall-clock complexity measurement of the two pairwise losses, with a
//! log-log slope fit. The report states the advertised complexities next
//! to the measured ones and lets the numbers speak.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseline::{margin_loss_cost, margin_rank_loss};
use crate::error::{Error, Result};
use crate::soft_rank::{mono_loss, mono_loss_cost, GradTaggedScores, SoftRankConfig};

/// The advertised scaling this benchmark puts to the test: the
/// monotonicity loss is described as O(K) against the pairwise margin
/// loss's O(K^2), while both are built from sums over all sample pairs.
pub const ADVERTISED_COMPLEXITY: &str =
    "advertised: mono_loss O(K), margin_rank_loss O(K^2); measured slopes below";

/// One measured size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchSample {
    pub n: usize,
    pub wall_ns_mono: u64,
    pub wall_ns_margin: u64,
    pub pair_count_mono: u64,
    pub pair_count_margin: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub samples: Vec<BenchSample>,
    pub reps: usize,
    /// Fitted log-log wall-time exponent of the monotonicity loss.
    pub mono_slope: f64,
    /// Fitted log-log wall-time exponent of the margin loss.
    pub margin_slope: f64,
    pub advertised: &'static str,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,wall_ns_mono,wall_ns_margin,pair_count_mono,pair_count_margin\n",
        );
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.n, s.wall_ns_mono, s.wall_ns_margin, s.pair_count_mono, s.pair_count_margin
            ));
        }
        out.push_str(&format!(
            "# mono_slope={:.3} margin_slope={:.3} reps={}\n# {}\n",
            self.mono_slope, self.margin_slope, self.reps, self.advertised
        ));
        out
    }
}

/// Ordinary least squares slope of `ln(t)` against `ln(n)`.
pub fn fit_loglog_slope(sizes: &[usize], wall_ns: &[u64]) -> f64 {
    debug_assert_eq!(sizes.len(), wall_ns.len());
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = wall_ns.iter().map(|&t| (t.max(1) as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    sxy / sxx
}

fn median_ns(mut runs: Vec<u64>) -> u64 {
    runs.sort_unstable();
    runs[runs.len() / 2]
}

/// Times both losses across `sizes`, taking the median of `reps`
/// repetitions per size, and fits the scaling exponents.
pub fn run_bench(sizes: &[usize], reps: usize, steepness: f64, seed: u64) -> Result<BenchReport> {
    if sizes.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least 2 sizes to fit a slope".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "sizes must be strictly increasing".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let cfg = SoftRankConfig::new(steepness)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut samples = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let qhat: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let tagged = GradTaggedScores::all_live(qhat.clone())?;

        let mut mono_runs = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            let result = mono_loss(&tagged, &q, &cfg)?;
            std::hint::black_box(result.loss);
            mono_runs.push(start.elapsed().as_nanos() as u64);
        }

        let mut margin_runs = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            let result = margin_rank_loss(&tagged, &q)?;
            std::hint::black_box(result.loss);
            margin_runs.push(start.elapsed().as_nanos() as u64);
        }

        samples.push(BenchSample {
            n,
            wall_ns_mono: median_ns(mono_runs),
            wall_ns_margin: median_ns(margin_runs),
            pair_count_mono: mono_loss_cost(n),
            pair_count_margin: margin_loss_cost(n),
        });
    }

    let ns: Vec<usize> = samples.iter().map(|s| s.n).collect();
    let mono_times: Vec<u64> = samples.iter().map(|s| s.wall_ns_mono).collect();
    let margin_times: Vec<u64> = samples.iter().map(|s| s.wall_ns_margin).collect();

    Ok(BenchReport {
        mono_slope: fit_loglog_slope(&ns, &mono_times),
        margin_slope: fit_loglog_slope(&ns, &margin_times),
        samples,
        reps,
        advertised: ADVERTISED_COMPLEXITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_exact_powers() {
        let sizes = [64usize, 128, 256, 512];
        let quadratic: Vec<u64> = sizes.iter().map(|&n| (n * n) as u64).collect();
        let slope = fit_loglog_slope(&sizes, &quadratic);
        assert!((slope - 2.0).abs() < 1e-9, "{slope}");

        let linear: Vec<u64> = sizes.iter().map(|&n| (7 * n) as u64).collect();
        let slope = fit_loglog_slope(&sizes, &linear);
        assert!((slope - 1.0).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn single_size_is_rejected() {
        assert!(matches!(
            run_bench(&[16], 3, 10.0, 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn non_increasing_sizes_are_rejected() {
        assert!(run_bench(&[64, 64], 3, 10.0, 1).is_err());
        assert!(run_bench(&[128, 64], 3, 10.0, 1).is_err());
    }

    #[test]
    fn small_bench_produces_consistent_report() {
        let report = run_bench(&[32, 64, 128], 3, 10.0, 1).unwrap();
        assert_eq!(report.samples.len(), 3);
        assert_eq!(report.samples[0].pair_count_mono, 1024);
        assert_eq!(report.samples[2].pair_count_margin, 16384);
        let csv = report.to_csv();
        assert!(csv.starts_with("n,wall_ns_mono"));
        assert!(csv.contains("mono_slope="));
    }
}
