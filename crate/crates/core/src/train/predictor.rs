//! A two-layer perceptron with manual backpropagation. Small enough that
//! exact hand-written gradients stay auditable against finite differences.

use rand::Rng;

use crate::error::{Error, Result};

/// `input -> hidden (tanh) -> scalar`. Parameters are stored flat-friendly:
/// first-layer weights row by row, first-layer biases, output weights,
/// output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    input_dim: usize,
    hidden_dim: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Predictor {
    pub fn new<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let bound1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let bound2 = (6.0 / (hidden_dim + 1) as f64).sqrt();
        Self {
            input_dim,
            hidden_dim,
            w1: (0..input_dim * hidden_dim)
                .map(|_| rng.random_range(-bound1..bound1))
                .collect(),
            b1: vec![0.0; hidden_dim],
            w2: (0..hidden_dim)
                .map(|_| rng.random_range(-bound2..bound2))
                .collect(),
            b2: 0.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn param_count(&self) -> usize {
        self.input_dim * self.hidden_dim + self.hidden_dim + self.hidden_dim + 1
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim);
        (0..self.hidden_dim)
            .map(|h| {
                let row = &self.w1[h * self.input_dim..(h + 1) * self.input_dim];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h];
                z.tanh()
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let hidden = self.hidden(x);
        hidden.iter().zip(&self.w2).map(|(h, w)| h * w).sum::<f64>() + self.b2
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.forward(x)).collect()
    }

    /// Flat parameter vector in storage order.
    pub fn params(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(&self.w1);
        flat.extend_from_slice(&self.b1);
        flat.extend_from_slice(&self.w2);
        flat.push(self.b2);
        flat
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                left: flat.len(),
                right: self.param_count(),
            });
        }
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = b2[0];
        Ok(())
    }

    /// Backpropagates per-sample output sensitivities into a flat parameter
    /// gradient: `grad = sum_b dloss_dy[b] * d y_b / d params`.
    pub fn param_gradient(&self, xs: &[Vec<f64>], dloss_dy: &[f64]) -> Vec<f64> {
        debug_assert_eq!(xs.len(), dloss_dy.len());
        let mut gw1 = vec![0.0; self.w1.len()];
        let mut gb1 = vec![0.0; self.b1.len()];
        let mut gw2 = vec![0.0; self.w2.len()];
        let mut gb2 = 0.0;

        for (x, &upstream) in xs.iter().zip(dloss_dy) {
            let hidden = self.hidden(x);
            gb2 += upstream;
            for h in 0..self.hidden_dim {
                gw2[h] += upstream * hidden[h];
                // d tanh(z) / dz = 1 - tanh(z)^2
                let dz = upstream * self.w2[h] * (1.0 - hidden[h] * hidden[h]);
                gb1[h] += dz;
                let row = &mut gw1[h * self.input_dim..(h + 1) * self.input_dim];
                for (slot, &v) in row.iter_mut().zip(x) {
                    *slot += dz * v;
                }
            }
        }

        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(&gw1);
        flat.extend_from_slice(&gb1);
        flat.extend_from_slice(&gw2);
        flat.push(gb2);
        flat
    }

    /// One plain gradient-descent step: `p -= lr * g`.
    pub fn apply_gradient_step(&mut self, grad: &[f64], learning_rate: f64) {
        debug_assert_eq!(grad.len(), self.param_count());
        let mut offset = 0;
        for w in &mut self.w1 {
            *w -= learning_rate * grad[offset];
            offset += 1;
        }
        for b in &mut self.b1 {
            *b -= learning_rate * grad[offset];
            offset += 1;
        }
        for w in &mut self.w2 {
            *w -= learning_rate * grad[offset];
            offset += 1;
        }
        self.b2 -= learning_rate * grad[offset];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (Predictor, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let predictor = Predictor::new(3, 4, &mut rng);
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        (predictor, xs)
    }

    #[test]
    fn params_round_trip() {
        let (mut predictor, _) = fixture();
        let flat = predictor.params();
        assert_eq!(flat.len(), predictor.param_count());
        let mut bumped = flat.clone();
        bumped[2] += 1.0;
        predictor.set_params(&bumped).unwrap();
        assert_eq!(predictor.params(), bumped);
        assert!(predictor.set_params(&flat[..3]).is_err());
    }

    #[test]
    fn forward_is_finite() {
        let (predictor, xs) = fixture();
        for y in predictor.predict_batch(&xs) {
            assert!(y.is_finite());
        }
    }

    #[test]
    fn backprop_matches_finite_differences() {
        // Check d(sum of weighted outputs)/d(params) coordinate by
        // coordinate against central differences.
        let (predictor, xs) = fixture();
        let weights: Vec<f64> = (0..xs.len()).map(|i| 0.3 + 0.1 * i as f64).collect();
        let analytic = predictor.param_gradient(&xs, &weights);

        let theta = predictor.params();
        let objective = |flat: &[f64]| -> f64 {
            let mut p = predictor.clone();
            p.set_params(flat).unwrap();
            p.predict_batch(&xs)
                .iter()
                .zip(&weights)
                .map(|(y, w)| y * w)
                .sum()
        };

        let h = 1e-6;
        for i in 0..theta.len() {
            let mut hi = theta.clone();
            let mut lo = theta.clone();
            hi[i] += h;
            lo[i] -= h;
            let fd = (objective(&hi) - objective(&lo)) / (2.0 * h);
            let denom = analytic[i].abs().max(fd.abs()).max(1.0);
            assert!(
                (analytic[i] - fd).abs() / denom < 1e-5,
                "param {i}: analytic {} vs fd {fd}",
                analytic[i]
            );
        }
    }

    #[test]
    fn gradient_step_moves_against_gradient() {
        let (mut predictor, xs) = fixture();
        let before = predictor.forward(&xs[0]);
        // Gradient of y itself; stepping must reduce y.
        let grad = predictor.param_gradient(&[xs[0].clone()], &[1.0]);
        predictor.apply_gradient_step(&grad, 0.05);
        assert!(predictor.forward(&xs[0]) < before);
    }
}
