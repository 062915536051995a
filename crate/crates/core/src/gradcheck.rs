//! Finite-difference verification of every analytic derivative in the
//! library. The checks re-derive gradients from loss *values* only, so they
//! are independent of the closed-form gradient paths they test.
//!
//! Tolerances are pinned here with their rationale rather than scattered
//! through call sites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::soft_rank::{mono_loss, mono_loss_value, soft_rank, soft_rank_jacobian, GradTaggedScores, SoftRankConfig};
use crate::train::{objective_param_grad, objective_value, Predictor};

/// Analytic vs central-difference agreement for the rank Jacobian and the
/// monotonicity-loss gradient at moderate steepness. Central differences
/// carry O(h^2 k^3) truncation error; with the k-adaptive step below this
/// leaves five clean digits.
pub const GRAD_TOLERANCE: f64 = 1e-5;

/// Looser bound for very sharp ranking (k around 1000): the surrogate's
/// third derivative grows as k^3, and no step size buys back the lost
/// truncation accuracy.
pub const GRAD_TOLERANCE_SHARP: f64 = 1e-4;

/// Steepness above which [`GRAD_TOLERANCE_SHARP`] applies.
pub const SHARP_STEEPNESS: f64 = 100.0;

/// Jacobian entries are plain smooth functions of one pair difference, so
/// they check tighter than the chained loss gradient.
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;

/// Whole-objective audit (squared error + weighted monotonicity term,
/// differentiated through the perceptron): chained truncation and roundoff
/// from two nonlinear layers.
pub const COMPOSITE_TOLERANCE: f64 = 1e-4;

/// Central-difference step. Balances truncation (grows with k^3 h^2)
/// against roundoff (shrinks with 1/h); near-optimal for unit-scale loss
/// values.
pub fn fd_step(steepness: f64) -> f64 {
    (1e-5 / steepness.max(1.0)).max(1e-9)
}

/// Default tolerance for a given steepness.
pub fn tolerance_for(steepness: f64) -> f64 {
    if steepness > SHARP_STEEPNESS {
        GRAD_TOLERANCE_SHARP
    } else {
        GRAD_TOLERANCE
    }
}

/// Relative error with a unit floor: `|a - b| / max(1, |a|, |b|)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Symmetric difference quotient along coordinate `i`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    i: usize,
    step: f64,
) -> f64 {
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[i] += step;
    lo[i] -= step;
    (f(&hi) - f(&lo)) / (2.0 * step)
}

/// Outcome of one finite-difference suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// Individual coordinate comparisons performed.
    pub comparisons: usize,
    pub worst_rel_err: f64,
    /// Where the worst comparison happened, for the report.
    pub worst_case: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            comparisons: 0,
            worst_rel_err: 0.0,
            worst_case: String::new(),
            tolerance,
            passed: true,
        }
    }

    fn record(&mut self, rel_err: f64, detail: impl FnOnce() -> String) {
        self.comparisons += 1;
        if rel_err > self.worst_rel_err {
            self.worst_rel_err = rel_err;
            self.worst_case = detail();
        }
        if rel_err > self.tolerance {
            self.passed = false;
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} | trials {} | comparisons {} | worst rel err {:.3e} (tolerance {:.0e}) {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.trials,
            self.comparisons,
            self.worst_rel_err,
            self.tolerance,
            if self.worst_case.is_empty() {
                String::new()
            } else {
                format!("| worst at {}", self.worst_case)
            }
        )
    }
}

fn uniform_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Checks every entry of the soft-rank Jacobian against central
/// differences of the rank vector.
pub fn check_soft_rank_jacobian(
    n: usize,
    steepness: f64,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let cfg = SoftRankConfig::new(steepness)?;
    let mut report = CheckReport::new(
        format!("soft_rank_jacobian (n={n}, k={steepness})"),
        JACOBIAN_TOLERANCE,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = fd_step(steepness);

    for trial in 0..trials {
        let x = uniform_vec(&mut rng, n);
        let jac = soft_rank_jacobian(&x, &cfg)?;
        for i in 0..n {
            for j in 0..n {
                let fd = central_difference(
                    |v| soft_rank(v, &cfg).expect("valid input")[i],
                    &x,
                    j,
                    step,
                );
                let err = relative_error(jac[i][j], fd);
                report.record(err, || format!("trial {trial}, entry ({i},{j})"));
            }
        }
        report.trials += 1;
    }
    Ok(report)
}

/// Checks the analytic monotonicity-loss gradient on random instances,
/// coordinate by coordinate.
pub fn check_mono_loss_gradient(
    n: usize,
    steepness: f64,
    trials: usize,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<CheckReport> {
    let cfg = SoftRankConfig::new(steepness)?;
    let tolerance = tolerance.unwrap_or_else(|| tolerance_for(steepness));
    let mut report = CheckReport::new(
        format!("mono_loss_gradient (n={n}, k={steepness})"),
        tolerance,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = fd_step(steepness);

    for trial in 0..trials {
        let q = uniform_vec(&mut rng, n);
        let qhat = uniform_vec(&mut rng, n);
        let tagged = GradTaggedScores::all_live(qhat.clone())?;
        let result = mono_loss(&tagged, &q, &cfg)?;
        if result.degenerate {
            continue;
        }
        for j in 0..n {
            let fd = central_difference(
                |v| mono_loss_value(v, &q, &cfg).expect("valid input").0,
                &qhat,
                j,
                step,
            );
            let err = relative_error(result.grad[j], fd);
            report.record(err, || format!("trial {trial}, coordinate {j}"));
        }
        report.trials += 1;
    }
    Ok(report)
}

/// Audits the full training objective — squared error plus the weighted
/// monotonicity term with gradient-free context — through the perceptron's
/// manual backpropagation.
pub fn check_composite_objective(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("composite_objective_param_grad", COMPOSITE_TOLERANCE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SoftRankConfig::default();
    let lambda = 0.7;
    let input_dim = 4;
    let batch = 6;

    for trial in 0..trials {
        let predictor = Predictor::new(input_dim, 5, &mut rng);
        let xs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..input_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys = uniform_vec(&mut rng, batch);
        let extra_preds = uniform_vec(&mut rng, 4);
        let extra_mos = uniform_vec(&mut rng, 4);
        let extra = Some((extra_preds.as_slice(), extra_mos.as_slice()));

        let (_, analytic, _) = objective_param_grad(&predictor, &xs, &ys, extra, lambda, &cfg)?;
        let theta = predictor.params();
        let step = 1e-6;
        for i in 0..theta.len() {
            let fd = central_difference(
                |flat| {
                    let mut p = predictor.clone();
                    p.set_params(flat).expect("matching length");
                    objective_value(&p, &xs, &ys, extra, lambda, &cfg).expect("valid input")
                },
                &theta,
                i,
                step,
            );
            let err = relative_error(analytic[i], fd);
            report.record(err, || format!("trial {trial}, parameter {i}"));
        }
        report.trials += 1;
    }
    Ok(report)
}

/// The full battery behind the `gradcheck` command: rank Jacobian,
/// monotonicity-loss gradient, and the composite training objective.
/// With `trials == 0` every suite passes vacuously.
pub fn run_suite(n: usize, steepness: f64, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    // The Jacobian and composite checks are O(n^2) comparisons per trial;
    // capping their trial count keeps the command interactive.
    let capped = trials.min(25);
    Ok(vec![
        check_soft_rank_jacobian(n.min(12), steepness, capped, seed)?,
        check_mono_loss_gradient(n, steepness, trials, seed.wrapping_add(1), None)?,
        check_composite_objective(capped, seed.wrapping_add(2))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        for report in run_suite(8, 10.0, 20, 42).unwrap() {
            assert!(report.passed, "{}", report.summary_line());
            assert!(report.worst_rel_err < report.tolerance);
        }
    }

    #[test]
    fn sharp_steepness_passes_with_documented_tolerance() {
        let report = check_mono_loss_gradient(16, 1000.0, 10, 7, None).unwrap();
        assert_eq!(report.tolerance, GRAD_TOLERANCE_SHARP);
        assert!(report.passed, "{}", report.summary_line());
    }

    #[test]
    fn zero_trials_is_a_vacuous_pass() {
        for report in run_suite(8, 10.0, 0, 1).unwrap() {
            assert!(report.passed);
            assert_eq!(report.comparisons, 0);
        }
    }

    #[test]
    fn relative_error_floors_at_unit_scale() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1e-9, 2e-9) - 1e-9).abs() < 1e-24);
        assert!((relative_error(200.0, 100.0) - 0.5).abs() < 1e-15);
    }
}
