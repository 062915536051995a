//! Smooth, differentiable ranking and the monotonicity loss built on it.
//!
//! The rank of an element is written as a sum of step comparisons against
//! every element (itself included), and the step is replaced by the smooth
//! surrogate `(1 + tanh(k * d)) / 2`. A steepness `k` trades sharpness
//! against gradient magnitude:
//!
//! ```text
//! rank_i = sum_j (1 + tanh(k * (x_i - x_j))) / 2
//! ```
//!
//! As `k` grows the soft rank converges elementwise to
//! [`crate::correlation::hard_rank`]; as `k` shrinks every rank collapses to
//! `n / 2`. The monotonicity loss [`mono_loss`] is the negated Pearson
//! correlation of the soft ranks of ground truth and prediction, so
//! minimizing it maximizes a smooth Spearman surrogate. Its gradient is
//! assembled in closed form: the correlation gradient chained through the
//! soft-rank Jacobian.
//!
//! All functions here are pure and single-threaded; pairwise sums run in
//! ascending index order, so results are deterministic for identical inputs.

use crate::error::{ensure_finite, ensure_min_len, ensure_same_len, Error, Result};

/// Parameters of the smoothed ranking.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SoftRankConfig {
    /// Steepness `k` of the tanh surrogate. Larger values track the hard
    /// rank more closely but concentrate the gradient near ties.
    pub steepness: f64,
    /// Guard threshold for the centered soft-rank norms in [`mono_loss`];
    /// below it the loss reports a degenerate result instead of dividing.
    pub eps: f64,
}

impl SoftRankConfig {
    /// Default guard threshold.
    pub const DEFAULT_EPS: f64 = 1e-12;

    /// Default steepness, calibrated for scores normalized to `[0, 1]`.
    pub const DEFAULT_STEEPNESS: f64 = 10.0;

    pub fn new(steepness: f64) -> Result<Self> {
        Self::with_eps(steepness, Self::DEFAULT_EPS)
    }

    pub fn with_eps(steepness: f64, eps: f64) -> Result<Self> {
        let cfg = Self { steepness, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.steepness.is_finite() && self.steepness > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "steepness must be finite and positive, got {}",
                self.steepness
            )));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must be finite and positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

impl Default for SoftRankConfig {
    fn default() -> Self {
        Self {
            steepness: Self::DEFAULT_STEEPNESS,
            eps: Self::DEFAULT_EPS,
        }
    }
}

/// Scores paired with a mask marking which entries are live optimization
/// variables. Masked-off entries still shape every soft rank; they simply
/// receive no gradient. This is how scores replayed from a memory bank are
/// folded into the loss as constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GradTaggedScores {
    values: Vec<f64>,
    grad_mask: Vec<bool>,
    ids: Option<Vec<String>>,
}

impl GradTaggedScores {
    pub fn new(values: Vec<f64>, grad_mask: Vec<bool>) -> Result<Self> {
        ensure_same_len(values.len(), grad_mask.len())?;
        ensure_min_len(values.len(), 1)?;
        Ok(Self {
            values,
            grad_mask,
            ids: None,
        })
    }

    /// All entries live; the common case for plain batch training.
    pub fn all_live(values: Vec<f64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::new(values, mask)
    }

    pub fn with_ids(values: Vec<f64>, grad_mask: Vec<bool>, ids: Vec<String>) -> Result<Self> {
        ensure_same_len(values.len(), ids.len())?;
        let mut tagged = Self::new(values, grad_mask)?;
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId { id: id.clone() });
            }
        }
        tagged.ids = Some(ids);
        Ok(tagged)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grad_mask(&self) -> &[bool] {
        &self.grad_mask
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn live_count(&self) -> usize {
        self.grad_mask.iter().filter(|&&m| m).count()
    }
}

/// A loss value with its gradient over the tagged scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub loss: f64,
    /// One entry per tagged score; exactly `0.0` at masked-off positions.
    pub grad: Vec<f64>,
    /// True when a degenerate denominator was guarded: the loss is then 0
    /// with a zero gradient rather than NaN.
    pub degenerate: bool,
}

/// Smoothed rank vector of `x`.
///
/// The self comparison contributes exactly 1/2 per element (`tanh(0) = 0`),
/// and the sum of all ranks is `n^2 / 2` up to summation rounding because
/// the two orientations of each pair share one tanh evaluation.
pub fn soft_rank(x: &[f64], cfg: &SoftRankConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    ensure_min_len(x.len(), 1)?;
    ensure_finite("soft rank input", x)?;

    let n = x.len();
    let k = cfg.steepness;
    let mut ranks = vec![0.5; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let t = (k * (x[i] - x[j])).tanh();
            ranks[i] += 0.5 * (1.0 + t);
            ranks[j] += 0.5 * (1.0 - t);
        }
    }
    Ok(ranks)
}

/// Dense Jacobian of [`soft_rank`]: `out[i][j]` is the derivative of rank
/// `i` with respect to `x[j]`.
///
/// The matrix is symmetric, and each diagonal entry is defined as minus the
/// sum of its row's off-diagonal entries, so every row sums to zero — the
/// rank vector is translation invariant. Quadratic in memory; the loss
/// gradient below never materializes it.
pub fn soft_rank_jacobian(x: &[f64], cfg: &SoftRankConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    ensure_min_len(x.len(), 1)?;
    ensure_finite("jacobian input", x)?;

    let n = x.len();
    let k = cfg.steepness;
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let t = (k * (x[i] - x[j])).tanh();
            let coupling = 0.5 * k * (1.0 - t * t);
            jac[i][j] = -coupling;
            jac[j][i] = -coupling;
        }
    }
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                diag -= jac[i][j];
            }
        }
        jac[i][i] = diag;
    }
    Ok(jac)
}

/// Monotonicity loss: negated Pearson correlation between the soft ranks of
/// the ground-truth scores and of the predicted scores, with the exact
/// analytic gradient with respect to every live predicted score.
///
/// When the centered soft-rank norm of either side falls below `cfg.eps`
/// (an all-tie batch, or a predictor collapsed to a constant) the result is
/// `loss = 0`, a zero gradient and `degenerate = true`, so training never
/// sees NaN.
pub fn mono_loss(qhat: &GradTaggedScores, q: &[f64], cfg: &SoftRankConfig) -> Result<LossResult> {
    ensure_same_len(qhat.len(), q.len())?;
    ensure_min_len(q.len(), 2)?;

    let x = qhat.values();
    let (loss, degenerate, dloss_drank) = mono_forward(x, q, cfg)?;
    if degenerate {
        return Ok(LossResult {
            loss,
            grad: vec![0.0; x.len()],
            degenerate,
        });
    }

    // Chain through the soft-rank coupling without building the Jacobian:
    // grad_j = (k/2) * sum_{i != j} sech^2(k (x_j - x_i)) * (g_j - g_i).
    let n = x.len();
    let k = cfg.steepness;
    let g = &dloss_drank;
    let mut grad = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let t = (k * (x[i] - x[j])).tanh();
            let w = 0.5 * k * (1.0 - t * t) * (g[i] - g[j]);
            grad[i] += w;
            grad[j] -= w;
        }
    }
    for (slot, &live) in grad.iter_mut().zip(qhat.grad_mask()) {
        if !live {
            *slot = 0.0;
        }
    }

    Ok(LossResult {
        loss,
        grad,
        degenerate,
    })
}

/// Loss value only — used by finite-difference checks and by callers that
/// only need the smooth Spearman surrogate (`-value`). Returns the value
/// and the degenerate flag.
pub fn mono_loss_value(qhat_values: &[f64], q: &[f64], cfg: &SoftRankConfig) -> Result<(f64, bool)> {
    ensure_same_len(qhat_values.len(), q.len())?;
    ensure_min_len(q.len(), 2)?;
    let (loss, degenerate, _) = mono_forward(qhat_values, q, cfg)?;
    Ok((loss, degenerate))
}

/// Forward pass shared by value and gradient: soft ranks of both sides,
/// the correlation, and the derivative of the loss with respect to each
/// predicted soft rank.
fn mono_forward(
    qhat_values: &[f64],
    q: &[f64],
    cfg: &SoftRankConfig,
) -> Result<(f64, bool, Vec<f64>)> {
    let r = soft_rank(q, cfg)?;
    let rh = soft_rank(qhat_values, cfg)?;

    let n = r.len() as f64;
    let mean_r = r.iter().sum::<f64>() / n;
    let mean_rh = rh.iter().sum::<f64>() / n;

    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in r.iter().zip(&rh) {
        let da = a - mean_r;
        let db = b - mean_rh;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let norm_r = sxx.sqrt();
    let norm_rh = syy.sqrt();
    if norm_r <= cfg.eps || norm_rh <= cfg.eps {
        return Ok((0.0, true, Vec::new()));
    }

    let p = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    // d(-p)/d(rh_i) = -(centered_r_i / (|r||rh|) - p * centered_rh_i / |rh|^2)
    let dloss_drank: Vec<f64> = r
        .iter()
        .zip(&rh)
        .map(|(&a, &b)| {
            let da = a - mean_r;
            let db = b - mean_rh;
            -(da / (norm_r * norm_rh) - p * db / syy)
        })
        .collect();

    Ok((-p, false, dloss_drank))
}

/// Analytic cost model of [`mono_loss`]: the number of ordered pairwise
/// tanh comparisons behind a full rank vector, `n^2` (self terms included).
/// The implementation shares each symmetric pair, which halves the constant
/// but not the quadratic scaling. Consumed by the complexity benchmark.
pub fn mono_loss_cost(n: usize) -> u64 {
    let n = n as u64;
    n * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::hard_rank;

    fn cfg(k: f64) -> SoftRankConfig {
        SoftRankConfig::new(k).unwrap()
    }

    fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += h;
        lo[i] -= h;
        (f(&hi) - f(&lo)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    /// Deterministic pseudo-random values in (0, 1) without pulling an RNG
    /// into unit tests.
    fn lcg_values(seed: u64, n: usize) -> Vec<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64) / ((1u64 << 53) as f64)
            })
            .collect()
    }

    #[test]
    fn sharp_soft_rank_matches_hard_rank() {
        let x = [0.3, 0.1, 0.2];
        let soft = soft_rank(&x, &cfg(1000.0)).unwrap();
        let hard = hard_rank(&x).unwrap();
        for (s, h) in soft.iter().zip(&hard) {
            assert!((s - h).abs() < 1e-6, "{s} vs {h}");
        }
    }

    #[test]
    fn flat_limit_gives_half_n() {
        let soft = soft_rank(&[1.0, 2.0, 3.0], &cfg(1e-9)).unwrap();
        for s in soft {
            assert!((s - 1.5).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn singleton_rank_is_half() {
        assert_eq!(soft_rank(&[42.0], &cfg(3.0)).unwrap(), vec![0.5]);
    }

    #[test]
    fn rank_sum_conserved() {
        for (seed, n, k) in [(1u64, 5usize, 1.0), (2, 17, 10.0), (3, 64, 1000.0)] {
            let x = lcg_values(seed, n);
            let sum: f64 = soft_rank(&x, &cfg(k)).unwrap().iter().sum();
            let expect = (n * n) as f64 / 2.0;
            assert!(
                (sum - expect).abs() <= 1e-9 * (n * n) as f64,
                "n={n} k={k}: {sum} vs {expect}"
            );
        }
    }

    #[test]
    fn translation_invariance_is_exact() {
        let x = [0.25, -1.5, 3.0, 0.125];
        let shifted: Vec<f64> = x.iter().map(|v| v + 2.5).collect();
        assert_eq!(
            soft_rank(&x, &cfg(7.0)).unwrap(),
            soft_rank(&shifted, &cfg(7.0)).unwrap()
        );
    }

    #[test]
    fn scale_steepness_duality_is_exact() {
        // Powers of two keep the products alpha*x and (alpha*k)*d exact.
        let x = [0.25, -1.5, 3.0, 0.125];
        let alpha = 4.0;
        let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        assert_eq!(
            soft_rank(&scaled, &cfg(2.0)).unwrap(),
            soft_rank(&x, &cfg(alpha * 2.0)).unwrap()
        );
    }

    #[test]
    fn jacobian_hand_case() {
        let jac = soft_rank_jacobian(&[0.0, 0.0], &cfg(1.0)).unwrap();
        assert_eq!(jac, vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);
    }

    #[test]
    fn jacobian_singleton_is_zero() {
        assert_eq!(soft_rank_jacobian(&[3.5], &cfg(2.0)).unwrap(), vec![vec![0.0]]);
    }

    #[test]
    fn jacobian_symmetric_with_zero_row_sums() {
        let x = lcg_values(7, 9);
        let jac = soft_rank_jacobian(&x, &cfg(25.0)).unwrap();
        for i in 0..x.len() {
            let row_sum: f64 = jac[i].iter().sum();
            assert!(row_sum.abs() <= 1e-12, "row {i} sums to {row_sum}");
            for j in 0..x.len() {
                assert_eq!(jac[i][j], jac[j][i], "asymmetry at ({i},{j})");
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let x = lcg_values(11, 5);
        let k = 10.0;
        let jac = soft_rank_jacobian(&x, &cfg(k)).unwrap();
        for i in 0..x.len() {
            for j in 0..x.len() {
                let fd = central_diff(
                    |v| soft_rank(v, &cfg(k)).unwrap()[i],
                    &x,
                    j,
                    1e-5,
                );
                assert!(
                    rel_err(jac[i][j], fd) < 1e-6,
                    "({i},{j}): analytic {} vs fd {}",
                    jac[i][j],
                    fd
                );
            }
        }
    }

    #[test]
    fn aligned_orders_reach_minus_one() {
        let q: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let qhat: Vec<f64> = q.iter().map(|v| 2.0 * v + 3.0).collect();
        let result = mono_loss(
            &GradTaggedScores::all_live(qhat).unwrap(),
            &q,
            &cfg(100.0),
        )
        .unwrap();
        assert!(!result.degenerate);
        assert!((result.loss + 1.0).abs() < 1e-6, "loss = {}", result.loss);
    }

    #[test]
    fn reversed_orders_reach_plus_one() {
        let q: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let qhat: Vec<f64> = q.iter().rev().copied().collect();
        let result = mono_loss(
            &GradTaggedScores::all_live(qhat).unwrap(),
            &q,
            &cfg(100.0),
        )
        .unwrap();
        assert!((result.loss - 1.0).abs() < 1e-6, "loss = {}", result.loss);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = 5.0;
        let q = lcg_values(21, 8);
        let qhat = lcg_values(22, 8);
        let tagged = GradTaggedScores::all_live(qhat.clone()).unwrap();
        let result = mono_loss(&tagged, &q, &cfg(k)).unwrap();
        for j in 0..qhat.len() {
            let fd = central_diff(
                |v| mono_loss_value(v, &q, &cfg(k)).unwrap().0,
                &qhat,
                j,
                1e-6,
            );
            assert!(
                rel_err(result.grad[j], fd) < 1e-5,
                "coord {j}: analytic {} vs fd {}",
                result.grad[j],
                fd
            );
        }
    }

    #[test]
    fn masked_entries_get_zero_gradient_but_shape_ranks() {
        let q = [0.1, 0.5, 0.9, 0.3];
        let qhat = vec![0.2, 0.6, 0.8, 0.4];
        let mask = vec![true, false, true, false];
        let tagged = GradTaggedScores::new(qhat.clone(), mask).unwrap();
        let result = mono_loss(&tagged, &q, &cfg(10.0)).unwrap();
        assert_eq!(result.grad[1], 0.0);
        assert_eq!(result.grad[3], 0.0);
        assert!(result.grad[0] != 0.0 && result.grad[2] != 0.0);

        // Perturbing a masked value must change the loss: constants still
        // participate in every rank.
        let mut bumped = qhat;
        bumped[1] = 0.05;
        let tagged_b = GradTaggedScores::new(bumped, vec![true, false, true, false]).unwrap();
        let moved = mono_loss(&tagged_b, &q, &cfg(10.0)).unwrap();
        assert!((moved.loss - result.loss).abs() > 1e-9);
    }

    #[test]
    fn degenerate_batch_flags_instead_of_nan() {
        let q = [1.0, 1.0, 1.0];
        let qhat = GradTaggedScores::all_live(vec![0.1, 0.5, 0.9]).unwrap();
        let result = mono_loss(&qhat, &q, &cfg(10.0)).unwrap();
        assert!(result.degenerate);
        assert_eq!(result.loss, 0.0);
        assert!(result.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_agrees_with_exact_srocc_in_sharp_limit() {
        let q = lcg_values(31, 12);
        // Spread to a minimum gap of ~0.1 by ranking, then compare at
        // k = 1000 against the exact Spearman correlation.
        let spread: Vec<f64> = hard_rank(&q).unwrap().iter().map(|r| r * 0.1).collect();
        let qhat = lcg_values(32, 12);
        let spread_hat: Vec<f64> = hard_rank(&qhat).unwrap().iter().map(|r| r * 0.1).collect();
        let (loss, degenerate) =
            mono_loss_value(&spread_hat, &spread, &cfg(1000.0)).unwrap();
        assert!(!degenerate);
        let exact = crate::correlation::srocc(&spread, &spread_hat).unwrap();
        assert!((-loss - exact).abs() < 1e-4, "{} vs {exact}", -loss);
    }

    #[test]
    fn cost_model_is_quadratic() {
        assert_eq!(mono_loss_cost(1), 1);
        assert_eq!(mono_loss_cost(100), 10_000);
    }

    #[test]
    fn invalid_config_is_rejected() {
        assert!(SoftRankConfig::new(0.0).is_err());
        assert!(SoftRankConfig::new(-3.0).is_err());
        assert!(SoftRankConfig::with_eps(1.0, 0.0).is_err());
        let bad = SoftRankConfig {
            steepness: f64::NAN,
            eps: 1e-12,
        };
        assert!(matches!(
            soft_rank(&[1.0, 2.0], &bad),
            Err(Error::InvalidConfig(_))
        ));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn value_vec(len: std::ops::Range<usize>) -> BoxedStrategy<Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, len).boxed()
    }

    proptest! {
        #[test]
        fn soft_rank_sum_conserved(
            x in value_vec(1..40),
            k in prop::sample::select(vec![0.1f64, 1.0, 10.0, 250.0]),
        ) {
            let cfg = SoftRankConfig::new(k).unwrap();
            let sum: f64 = soft_rank(&x, &cfg).unwrap().iter().sum();
            let n2 = (x.len() * x.len()) as f64;
            prop_assert!((sum - n2 / 2.0).abs() <= 1e-9 * n2);
        }

        #[test]
        fn loss_is_bounded(
            pair in value_vec(2..16).prop_flat_map(|a| {
                let n = a.len();
                (Just(a), value_vec(n..n + 1))
            }),
            k in prop::sample::select(vec![0.5f64, 5.0, 50.0]),
        ) {
            let (q, qhat) = pair;
            let cfg = SoftRankConfig::new(k).unwrap();
            let tagged = GradTaggedScores::all_live(qhat).unwrap();
            let result = mono_loss(&tagged, &q, &cfg).unwrap();
            prop_assert!((-1.0..=1.0).contains(&result.loss));
            prop_assert!(result.grad.iter().all(|g| g.is_finite()));
        }
    }
}
