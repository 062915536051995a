//! Exact (non-differentiable) correlation and ranking primitives.
//!
//! These are the ground-truth counterparts of the smooth operators in
//! [`crate::soft_rank`]: Pearson linear correlation, a fractional hard rank
//! built from cumulative step comparisons, and Spearman rank-order
//! correlation in two algebraically equivalent formulations.

use crate::error::{ensure_finite, ensure_min_len, ensure_same_len, Error, Result};

/// Pearson linear correlation coefficient of two equal-length vectors.
///
/// Symmetric in its arguments and invariant under positive affine maps of
/// either one. Returns [`Error::DegenerateVariance`] when either vector is
/// constant instead of silently producing NaN, so a flat predictor is the
/// caller's problem to handle.
pub fn plcc(a: &[f64], b: &[f64]) -> Result<f64> {
    ensure_same_len(a.len(), b.len())?;
    ensure_min_len(a.len(), 2)?;
    ensure_finite("first vector", a)?;
    ensure_finite("second vector", b)?;

    if is_constant(a) {
        return Err(Error::DegenerateVariance {
            what: "first vector",
        });
    }
    if is_constant(b) {
        return Err(Error::DegenerateVariance {
            what: "second vector",
        });
    }

    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;

    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }

    // Backstop for values so close that the centered sums underflow to zero
    // even though the vector is not literally constant.
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::DegenerateVariance {
            what: "centered norm",
        });
    }

    // Single square root keeps perfectly linear inputs at exactly +/-1.
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Fractional rank of every element: the count of elements it exceeds, with
/// each comparison against an equal value (including the element itself)
/// contributing 1/2.
///
/// For tie-free input this is the 0-based competition rank plus 1/2; tied
/// elements share the average of the ranks they would occupy. The offset
/// convention makes `hard_rank` the exact pointwise limit of
/// [`crate::soft_rank::soft_rank`] as the steepness grows, and the sum of
/// ranks is exactly `n^2 / 2` for every input.
pub fn hard_rank(x: &[f64]) -> Result<Vec<f64>> {
    ensure_min_len(x.len(), 1)?;
    ensure_finite("rank input", x)?;

    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // `start` elements are strictly smaller; `end - start` are equal
        // (self included) and each contributes 1/2.
        let rank = start as f64 + (end - start) as f64 * 0.5;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    Ok(ranks)
}

/// Spearman rank-order correlation, computed as the Pearson correlation of
/// the fractional hard ranks. Handles ties through the average-rank
/// behavior of [`hard_rank`].
pub fn srocc(q: &[f64], qhat: &[f64]) -> Result<f64> {
    ensure_same_len(q.len(), qhat.len())?;
    ensure_min_len(q.len(), 2)?;
    plcc(&hard_rank(q)?, &hard_rank(qhat)?)
}

/// Closed-form Spearman correlation from squared rank differences,
/// `1 - 6 * sum(d^2) / (n * (n^2 - 1))`.
///
/// Valid only for tie-free vectors; kept as an independent cross-check for
/// [`srocc`]. Returns [`Error::TiesPresent`] when either vector has ties.
pub fn srocc_closed_form(q: &[f64], qhat: &[f64]) -> Result<f64> {
    ensure_same_len(q.len(), qhat.len())?;
    ensure_min_len(q.len(), 2)?;

    if has_ties(q) || has_ties(qhat) {
        return Err(Error::TiesPresent);
    }

    let rq = hard_rank(q)?;
    let rqh = hard_rank(qhat)?;
    // The shared +1/2 offset cancels in the differences, so these are the
    // usual integer rank differences.
    let sum_d2: f64 = rq
        .iter()
        .zip(&rqh)
        .map(|(&m, &n)| (m - n) * (m - n))
        .sum();

    let n = q.len() as f64;
    Ok(1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0)))
}

fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

fn has_ties(x: &[f64]) -> bool {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    sorted.windows(2).any(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: count pairwise exceedances one comparison at a
    /// time, with the 1/2 convention for equality.
    fn brute_force_rank(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&xi| {
                x.iter()
                    .map(|&xj| {
                        if xi > xj {
                            1.0
                        } else if xi == xj {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn plcc_perfect_positive() {
        assert_eq!(plcc(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn plcc_perfect_negative() {
        assert_eq!(plcc(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn plcc_hand_case() {
        // Exact rational evaluation: deviations (-1.5,-0.5,0.5,1.5) and
        // (-1.5,0.5,-0.5,1.5) give covariance 4 and both squared sums 5,
        // so the coefficient is 4/5 exactly.
        let r = plcc(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn plcc_rejects_constant_input() {
        assert!(matches!(
            plcc(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateVariance { .. })
        ));
        // A constant vector whose mean is not exactly representable must
        // still be detected.
        assert!(matches!(
            plcc(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn plcc_rejects_bad_shapes() {
        assert!(matches!(
            plcc(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            plcc(&[1.0], &[1.0]),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            plcc(&[1.0, f64::NAN], &[1.0, 2.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn hard_rank_hand_cases() {
        assert_eq!(hard_rank(&[0.3, 0.1, 0.2]).unwrap(), vec![2.5, 0.5, 1.5]);
        assert_eq!(hard_rank(&[5.0]).unwrap(), vec![0.5]);
        assert_eq!(hard_rank(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn hard_rank_matches_brute_force() {
        let cases: Vec<Vec<f64>> = vec![
            vec![0.3, 0.1, 0.2],
            vec![1.0, 1.0, 2.0, -3.0],
            vec![2.0, 2.0, 2.0],
            vec![-1.5, 4.0, 4.0, 0.0, 4.0, -1.5],
        ];
        for x in cases {
            assert_eq!(hard_rank(&x).unwrap(), brute_force_rank(&x), "x = {x:?}");
        }
    }

    #[test]
    fn rank_sum_is_half_n_squared_exactly() {
        let cases: Vec<Vec<f64>> = vec![
            vec![0.25],
            vec![1.0, 1.0],
            vec![0.3, 0.1, 0.2, 0.1],
            vec![7.0; 9],
            (0..31).map(|i| ((i * 13) % 7) as f64).collect(),
        ];
        for x in cases {
            let n = x.len() as f64;
            let sum: f64 = hard_rank(&x).unwrap().iter().sum();
            assert_eq!(sum, n * n / 2.0, "x = {x:?}");
        }
    }

    #[test]
    fn srocc_hand_cases() {
        let q = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(srocc(&q, &[10.0, 20.0, 30.0, 40.0, 50.0]).unwrap(), 1.0);
        assert_eq!(srocc(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);

        // Swapping the last two ranks gives d^2 = {0,0,0,1,1}:
        // 1 - 6*2/(5*24) = 0.9.
        let r = srocc(&q, &[1.0, 2.0, 3.0, 5.0, 4.0]).unwrap();
        assert!((r - 0.9).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn srocc_all_ties_is_degenerate() {
        assert!(matches!(
            srocc(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn closed_form_rejects_ties() {
        assert!(matches!(
            srocc_closed_form(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::TiesPresent)
        ));
    }

    #[test]
    fn closed_form_agrees_with_plcc_of_ranks() {
        let q = [0.9, 0.1, 0.4, 0.7, 0.2];
        let qh = [0.3, 0.8, 0.2, 0.5, 0.9];
        let a = srocc(&q, &qh).unwrap();
        let b = srocc_closed_form(&q, &qh).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Values on a dyadic grid so that adding a grid constant is exact and
    /// cannot collapse distinct values into ties.
    fn grid_vec(len: std::ops::Range<usize>) -> BoxedStrategy<Vec<f64>> {
        proptest::collection::vec((-4096i32..4096).prop_map(|v| v as f64 / 16.0), len).boxed()
    }

    /// Applies a strictly increasing map by replacing each distinct value
    /// with a strictly increasing sequence of outputs.
    fn monotone_map(x: &[f64], steps: &[f64]) -> Vec<f64> {
        let mut distinct: Vec<f64> = x.to_vec();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        let mut out_value = std::collections::HashMap::new();
        let mut acc = -3.0;
        for (i, v) in distinct.iter().enumerate() {
            acc += 0.5 + steps[i % steps.len()].abs();
            out_value.insert(v.to_bits(), acc);
        }
        x.iter().map(|v| out_value[&v.to_bits()]).collect()
    }

    proptest! {
        #[test]
        fn hard_rank_translation_invariant(
            x in grid_vec(1..24),
            c in (-4096i32..4096).prop_map(|v| v as f64 / 16.0),
        ) {
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            prop_assert_eq!(hard_rank(&x).unwrap(), hard_rank(&shifted).unwrap());
        }

        #[test]
        fn hard_rank_monotone_map_invariant(
            x in grid_vec(1..24),
            steps in proptest::collection::vec(0.0f64..2.0, 1..8),
        ) {
            let mapped = monotone_map(&x, &steps);
            prop_assert_eq!(hard_rank(&x).unwrap(), hard_rank(&mapped).unwrap());
        }

        #[test]
        fn rank_sum_conserved(x in grid_vec(1..32)) {
            let n = x.len() as f64;
            let sum: f64 = hard_rank(&x).unwrap().iter().sum();
            prop_assert_eq!(sum, n * n / 2.0);
        }

        #[test]
        fn plcc_symmetric(
            pair in grid_vec(2..24).prop_flat_map(|a| {
                let n = a.len();
                (Just(a), grid_vec(n..n + 1))
            })
        ) {
            let (a, b) = pair;
            let (b, _) = (b, ());
            match (plcc(&a, &b), plcc(&b, &a)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "symmetry broke on error paths"),
            }
        }

        #[test]
        fn plcc_affine_invariant(
            pair in grid_vec(2..24).prop_flat_map(|a| {
                let n = a.len();
                (Just(a), grid_vec(n..n + 1))
            }),
            alpha in prop::sample::select(vec![-3.0f64, -0.5, 0.25, 1.0, 8.0]),
            beta in -10.0f64..10.0,
        ) {
            let (a, b) = pair;
            let scaled: Vec<f64> = a.iter().map(|v| alpha * v + beta).collect();
            if let (Ok(base), Ok(mapped)) = (plcc(&a, &b), plcc(&scaled, &b)) {
                prop_assert!((mapped - alpha.signum() * base).abs() < 1e-9,
                    "base {base}, mapped {mapped}, alpha {alpha}");
            }
        }

        #[test]
        fn srocc_monotone_transform_invariant(
            pair in grid_vec(2..20).prop_flat_map(|a| {
                let n = a.len();
                (Just(a), grid_vec(n..n + 1))
            }),
            steps in proptest::collection::vec(0.0f64..2.0, 1..8),
        ) {
            let (q, qh) = pair;
            let mapped = monotone_map(&qh, &steps);
            match (srocc(&q, &qh), srocc(&q, &mapped)) {
                (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "invariance broke on error paths"),
            }
        }
    }
}
