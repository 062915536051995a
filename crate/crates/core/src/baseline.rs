//! Prior approaches kept as comparison baselines: the pairwise margin
//! ranking loss and the linear-programming style soft sort via Euclidean
//! projection onto the permutahedron.

use crate::error::{ensure_finite, ensure_min_len, ensure_same_len, Error, Result};
use crate::soft_rank::{GradTaggedScores, LossResult};

/// Regularization strength of the projection-based soft sort.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProjectionConfig {
    pub beta: f64,
}

impl ProjectionConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let cfg = Self { beta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "beta must be finite and positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Which vector decides the comparison sign `e` inside the margin loss.
///
/// The canonical form derives `e` from the *predicted* order, which makes
/// the hinge self-referential; much of the literature uses the ground-truth
/// order instead. Both are available, predicted order being the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginOrder {
    Predicted,
    GroundTruth,
}

/// Pairwise margin ranking loss with its subgradient.
///
/// Double sum over all ordered pairs `(i, j)` of
/// `max(0, |qhat_i - qhat_j| - e(i, j) * (q_i - q_j))`, where `e` is `+1`
/// when the ordering vector puts `i` at or above `j` and `-1` otherwise
/// (the `i = j` terms are identically zero). `e` is treated as a constant
/// sign, the hinge subgradient is 0 at the kink, and `e = +1` at equality.
pub fn margin_rank_loss(qhat: &GradTaggedScores, q: &[f64]) -> Result<LossResult> {
    margin_rank_loss_with(qhat, q, MarginOrder::Predicted)
}

/// [`margin_rank_loss`] with an explicit choice of ordering vector for `e`.
pub fn margin_rank_loss_with(
    qhat: &GradTaggedScores,
    q: &[f64],
    order: MarginOrder,
) -> Result<LossResult> {
    ensure_same_len(qhat.len(), q.len())?;
    ensure_min_len(q.len(), 1)?;
    let x = qhat.values();
    ensure_finite("predicted scores", x)?;
    ensure_finite("ground-truth scores", q)?;

    let n = x.len();
    let mut loss = 0.0;
    let mut grad = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // sign of the predicted difference, +1 at equality
            let s = if x[i] >= x[j] { 1.0 } else { -1.0 };
            let e = match order {
                MarginOrder::Predicted => s,
                MarginOrder::GroundTruth => {
                    if q[i] >= q[j] {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let term = s * (x[i] - x[j]) - e * (q[i] - q[j]);
            if term > 0.0 {
                loss += term;
                grad[i] += s;
                grad[j] -= s;
            }
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
        degenerate: false,
    })
}

/// Analytic cost model of the margin loss: ordered-pair evaluations, `n^2`.
pub fn margin_loss_cost(n: usize) -> u64 {
    let n = n as u64;
    n * n
}

/// Euclidean projection of `-x / beta` onto the permutahedron of
/// `{1, .., n}` (the convex hull of all permutations of `(1, .., n)`).
///
/// The minimized objective is `||z + x/beta||^2 / 2`, hence the sign of the
/// projected point. Solved exactly by reduction to isotonic regression with
/// pool-adjacent-violators: sort the point descending, regress against the
/// sorted vertex `(n, .., 1)`, subtract, unsort. The output always lies on
/// the hyperplane `sum(z) = n(n+1)/2`, and for distinct `x` with
/// `beta -> 0+` it approaches the vector of descending ranks of `x` (rank 1
/// at the largest element).
pub fn permutahedron_project(x: &[f64], cfg: &ProjectionConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    ensure_min_len(x.len(), 1)?;
    ensure_finite("projection input", x)?;

    let n = x.len();
    let point: Vec<f64> = x.iter().map(|v| -v / cfg.beta).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| point[j].partial_cmp(&point[i]).expect("finite values"));

    // In sorted coordinates, projection = s - v where v is the decreasing
    // isotonic regression of s minus the sorted vertex (n, n-1, .., 1).
    let shifted: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(pos, &idx)| point[idx] - (n - pos) as f64)
        .collect();
    let fitted = isotonic_decreasing(&shifted);

    let mut out = vec![0.0; n];
    for (pos, &idx) in order.iter().enumerate() {
        out[idx] = point[idx] - fitted[pos];
    }
    Ok(out)
}

/// Decreasing isotonic regression (unit weights) by pool-adjacent-violators.
fn isotonic_decreasing(t: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); a violation is a block mean below its
    // successor's, which the decreasing constraint forbids.
    let mut sums: Vec<f64> = Vec::with_capacity(t.len());
    let mut counts: Vec<usize> = Vec::with_capacity(t.len());
    for &value in t {
        sums.push(value);
        counts.push(1);
        while sums.len() >= 2 {
            let last = sums.len() - 1;
            let mean_prev = sums[last - 1] / counts[last - 1] as f64;
            let mean_last = sums[last] / counts[last] as f64;
            if mean_prev >= mean_last {
                break;
            }
            let s = sums.pop().expect("non-empty");
            let c = counts.pop().expect("non-empty");
            sums[last - 1] += s;
            counts[last - 1] += c;
        }
    }

    let mut out = Vec::with_capacity(t.len());
    for (s, c) in sums.iter().zip(&counts) {
        let mean = s / *c as f64;
        out.extend(std::iter::repeat(mean).take(*c));
    }
    out
}
