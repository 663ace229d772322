//! Minimal feed-forward network: masked input, one hidden layer of 10
//! logistic-sigmoid neurons, one sigmoid output.
//!
//! Training is full-batch gradient descent on binary cross-entropy,
//! deterministic for a given seed (weights initialize uniform in
//! `[-0.5, 0.5]` from a counter-based RNG). These hyperparameters are
//! deliberately the smallest defensible set for a network this size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::FeatureMask;
use crate::models::{LabeledDataset, Prediction};
use crate::scalar::Real;

pub const HIDDEN_NEURONS: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MlpModel<T> {
    pub input_dim: usize,
    /// Hidden weights, `HIDDEN_NEURONS` rows of `input_dim` entries.
    pub w1: Vec<Vec<T>>,
    pub b1: Vec<T>,
    /// Output weights, one entry per hidden neuron.
    pub w2: Vec<T>,
    pub b2: T,
}

#[derive(Debug, Clone, Copy)]
pub struct MlpTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> MlpModel<T> {
    /// Seeded initialization: weights and biases uniform in [-0.5, 0.5].
    pub fn init(input_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::ModelParameter("MLP needs at least one input".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || T::of(rng.gen_range(-0.5..0.5));
        let w1 = (0..HIDDEN_NEURONS)
            .map(|_| (0..input_dim).map(|_| draw()).collect())
            .collect();
        let b1 = (0..HIDDEN_NEURONS).map(|_| draw()).collect();
        let w2 = (0..HIDDEN_NEURONS).map(|_| draw()).collect();
        let b2 = draw();
        Ok(Self {
            input_dim,
            w1,
            b1,
            w2,
            b2,
        })
    }

    /// Forward pass returning (hidden activations, output score).
    fn forward(&self, x: &[T]) -> (Vec<T>, T) {
        let hidden: Vec<T> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(row, &b)| {
                let z = row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi);
                sigmoid(z)
            })
            .collect();
        let z_out = self
            .w2
            .iter()
            .zip(&hidden)
            .fold(self.b2, |acc, (&w, &h)| acc + w * h);
        (hidden, sigmoid(z_out))
    }

    /// Mean binary cross-entropy over the masked rows; scores are clamped
    /// away from 0 and 1 so the loss stays finite.
    pub fn loss(&self, rows: &[(Vec<T>, bool)]) -> T {
        let eps = T::of(1e-12);
        let n = T::of(rows.len() as f64);
        rows.iter()
            .map(|(x, label)| {
                let (_, s) = self.forward(x);
                let s = s.clamp(eps, T::one() - eps);
                if *label {
                    -s.ln()
                } else {
                    -(T::one() - s).ln()
                }
            })
            .fold(T::zero(), |acc, l| acc + l)
            / n
    }

    /// Analytic gradient of the mean BCE loss, flattened in the same order
    /// as [`Self::parameters`].
    pub fn gradient(&self, rows: &[(Vec<T>, bool)]) -> Vec<T> {
        let n = T::of(rows.len() as f64);
        let mut grad_w1 = vec![vec![T::zero(); self.input_dim]; HIDDEN_NEURONS];
        let mut grad_b1 = vec![T::zero(); HIDDEN_NEURONS];
        let mut grad_w2 = vec![T::zero(); HIDDEN_NEURONS];
        let mut grad_b2 = T::zero();

        for (x, label) in rows {
            let (hidden, score) = self.forward(x);
            let y = if *label { T::one() } else { T::zero() };
            // dL/dz_out for BCE with a sigmoid output.
            let dz_out = (score - y) / n;
            for (j, &h) in hidden.iter().enumerate() {
                grad_w2[j] += dz_out * h;
                let dh = dz_out * self.w2[j] * h * (T::one() - h);
                for (i, &xi) in x.iter().enumerate() {
                    grad_w1[j][i] += dh * xi;
                }
                grad_b1[j] += dh;
            }
            grad_b2 += dz_out;
        }

        let mut flat = Vec::with_capacity(self.parameter_count());
        for row in &grad_w1 {
            flat.extend_from_slice(row);
        }
        flat.extend_from_slice(&grad_b1);
        flat.extend_from_slice(&grad_w2);
        flat.push(grad_b2);
        flat
    }

    pub fn parameter_count(&self) -> usize {
        HIDDEN_NEURONS * self.input_dim + HIDDEN_NEURONS + HIDDEN_NEURONS + 1
    }

    /// Flat view of all parameters: w1 row-major, b1, w2, b2.
    pub fn parameters(&self) -> Vec<T> {
        let mut flat = Vec::with_capacity(self.parameter_count());
        for row in &self.w1 {
            flat.extend_from_slice(row);
        }
        flat.extend_from_slice(&self.b1);
        flat.extend_from_slice(&self.w2);
        flat.push(self.b2);
        flat
    }

    /// Write back a flat parameter vector.
    pub fn set_parameters(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::InputShape(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        let mut it = flat.iter().copied();
        for row in &mut self.w1 {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in &mut self.b1 {
            *b = it.next().unwrap();
        }
        for w in &mut self.w2 {
            *w = it.next().unwrap();
        }
        self.b2 = it.next().unwrap();
        Ok(())
    }
}

/// Train on the masked dataset with full-batch gradient descent.
///
/// Fails when only one class is present or when the loss stops being
/// finite (divergence).
pub fn mlp_train<T: Real>(
    data: &LabeledDataset<T>,
    mask: &FeatureMask,
    config: &MlpTrainConfig,
) -> Result<MlpModel<T>> {
    if !data.has_both_classes() {
        return Err(Error::Training(
            "training data must contain both classes".into(),
        ));
    }
    let rows: Vec<(Vec<T>, bool)> = data
        .rows
        .iter()
        .map(|(fv, label)| (mask.apply(fv), *label))
        .collect();
    let mut model = MlpModel::init(mask.dim(), config.seed)?;
    let lr = T::of(config.learning_rate);

    for epoch in 0..config.epochs {
        let grad = model.gradient(&rows);
        let mut params = model.parameters();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= lr * *g;
        }
        model.set_parameters(&params)?;
        if !params.iter().all(|p| p.is_finite()) {
            return Err(Error::Training(format!(
                "training diverged at epoch {epoch}: non-finite parameters \
                 (learning rate {}, {} rows)",
                config.learning_rate,
                rows.len()
            )));
        }
    }
    let final_loss = model.loss(&rows);
    if !final_loss.is_finite() {
        return Err(Error::Training(format!(
            "training diverged: loss = {}",
            final_loss.as_f64()
        )));
    }
    Ok(model)
}

/// Score a masked input; the label thresholds the score at 0.5.
pub fn mlp_predict<T: Real>(model: &MlpModel<T>, query: &[T]) -> Result<Prediction<T>> {
    if query.len() != model.input_dim {
        return Err(Error::InputShape(format!(
            "query has {} features, model expects {}",
            query.len(),
            model.input_dim
        )));
    }
    let (_, score) = model.forward(query);
    Ok(Prediction {
        label: score >= T::of(0.5),
        score,
    })
}
