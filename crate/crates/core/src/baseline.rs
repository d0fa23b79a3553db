//! Feature-only discriminative check: a small MLP (one hidden layer of 32
//! rectifier units, softmax output) trained with mini-batch gradient descent
//! on either numerical or one-hot encodings of the five features, plus a
//! Monte-Carlo random-guess baseline.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::rngs::SmallRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::describe::CategorizedFeatures;
use crate::thresholds::{FeatureRow, FEATURE_COUNT};

pub const DEFAULT_HIDDEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineError {
    SchemeMismatch { expected: u8, got: usize },
    DegenerateData,
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::SchemeMismatch { expected, got } => {
                write!(f, "level index {got} outside {expected}-class scheme")
            }
            BaselineError::DegenerateData => write!(f, "training data has fewer than 2 classes"),
            BaselineError::DimensionMismatch { expected, got } => {
                write!(f, "vector length {got}, model expects {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Numerical,
    Onehot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub encoding: Encoding,
    /// True when absent pitch was filled in (numerical: standardized mean 0;
    /// one-hot: the middle class).
    pub imputed_pitch: bool,
}

/// Standardized 5-vector; absent pitch imputes the standardized mean (0).
pub fn encode_numerical(row: &FeatureRow) -> FeatureVector {
    let imputed = row.values[2].is_none() || row.values[3].is_none();
    FeatureVector {
        values: row.values.iter().map(|v| v.unwrap_or(0.0)).collect(),
        encoding: Encoding::Numerical,
        imputed_pitch: imputed,
    }
}

/// Concatenated per-feature indicator blocks in canonical order; exactly
/// five ones. Absent pitch imputes the middle class.
pub fn encode_onehot(cf: &CategorizedFeatures, num_classes: u8) -> Result<FeatureVector, BaselineError> {
    let k = num_classes as usize;
    let middle = (k - 1) / 2;
    let mut imputed = false;
    let indices = [
        Some(cf.avg_volume.level.index),
        Some(cf.volume_variation.level.index),
        cf.avg_pitch.as_ref().map(|c| c.level.index),
        cf.pitch_variation.as_ref().map(|c| c.level.index),
        Some(cf.speaking_rate.level.index),
    ];
    let mut values = vec![0.0; FEATURE_COUNT * k];
    for (feat, idx) in indices.into_iter().enumerate() {
        let idx = match idx {
            Some(i) => {
                if i >= k {
                    return Err(BaselineError::SchemeMismatch { expected: num_classes, got: i });
                }
                i
            }
            None => {
                imputed = true;
                middle
            }
        };
        values[feat * k + idx] = 1.0;
    }
    Ok(FeatureVector { values, encoding: Encoding::Onehot, imputed_pitch: imputed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.05, epochs: 200, batch_size: 32, seed: 0, l2: 1e-4 }
    }
}

/// input -> hidden (rectifier) -> softmax. Weights are row-major
/// `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub labels: Vec<String>,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ClassifierModel {
    pub fn output_dim(&self) -> usize {
        self.labels.len()
    }

    fn init(labels: &[String], input_dim: usize, hidden_dim: usize, rng: &mut SmallRng) -> Self {
        let out = labels.len();
        let lim1 = libm::sqrt(6.0 / (input_dim + hidden_dim) as f64);
        let lim2 = libm::sqrt(6.0 / (hidden_dim + out) as f64);
        ClassifierModel {
            labels: labels.to_vec(),
            input_dim,
            hidden_dim,
            w1: (0..hidden_dim * input_dim).map(|_| rng.gen_range(-lim1..lim1)).collect(),
            b1: vec![0.0; hidden_dim],
            w2: (0..out * hidden_dim).map(|_| rng.gen_range(-lim2..lim2)).collect(),
            b2: vec![0.0; out],
        }
    }

    /// Flattened parameters (w1, b1, w2, b2), row-major. Used for
    /// serialization and finite-difference checks.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.extend_from_slice(&self.b2);
        v
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for p in self
            .w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
        {
            *p = *it.next().expect("flat parameter vector too short");
        }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hidden: Vec<f64> = (0..self.hidden_dim)
            .map(|h| {
                let z: f64 = self.w1[h * self.input_dim..(h + 1) * self.input_dim]
                    .iter()
                    .zip(x)
                    .map(|(w, xi)| w * xi)
                    .sum::<f64>()
                    + self.b1[h];
                z.max(0.0)
            })
            .collect();
        let logits: Vec<f64> = (0..self.output_dim())
            .map(|o| {
                self.w2[o * self.hidden_dim..(o + 1) * self.hidden_dim]
                    .iter()
                    .zip(&hidden)
                    .map(|(w, h)| w * h)
                    .sum::<f64>()
                    + self.b2[o]
            })
            .collect();
        (hidden, logits)
    }

    /// Softmax probabilities for one input.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if x.len() != self.input_dim {
            return Err(BaselineError::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        let (_, logits) = self.forward(x);
        Ok(softmax(&logits))
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Mean cross-entropy plus the L2 penalty, over a dataset.
pub fn average_loss(model: &ClassifierModel, xs: &[Vec<f64>], ys: &[usize], l2: f64) -> f64 {
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let (_, logits) = model.forward(x);
        let probs = softmax(&logits);
        loss -= libm::log(probs[y].max(1e-300));
    }
    let sq: f64 = model.w1.iter().chain(&model.w2).map(|w| w * w).sum();
    loss / xs.len() as f64 + 0.5 * l2 * sq
}

/// Analytic gradient of `average_loss` over a batch, flattened like
/// `ClassifierModel::flatten`.
pub fn batch_gradient(model: &ClassifierModel, xs: &[Vec<f64>], ys: &[usize], l2: f64) -> Vec<f64> {
    let out = model.output_dim();
    let mut gw1 = vec![0.0; model.w1.len()];
    let mut gb1 = vec![0.0; model.b1.len()];
    let mut gw2 = vec![0.0; model.w2.len()];
    let mut gb2 = vec![0.0; model.b2.len()];
    let n = xs.len() as f64;

    for (x, &y) in xs.iter().zip(ys) {
        let (hidden, logits) = model.forward(x);
        let probs = softmax(&logits);
        // d loss / d logit_o = p_o - [o == y]
        let dlogits: Vec<f64> = (0..out)
            .map(|o| (probs[o] - if o == y { 1.0 } else { 0.0 }) / n)
            .collect();
        for o in 0..out {
            gb2[o] += dlogits[o];
            for h in 0..model.hidden_dim {
                gw2[o * model.hidden_dim + h] += dlogits[o] * hidden[h];
            }
        }
        for h in 0..model.hidden_dim {
            if hidden[h] <= 0.0 {
                continue; // rectifier gate
            }
            let dh: f64 = (0..out)
                .map(|o| dlogits[o] * model.w2[o * model.hidden_dim + h])
                .sum();
            gb1[h] += dh;
            for (i, xi) in x.iter().enumerate() {
                gw1[h * model.input_dim + i] += dh * xi;
            }
        }
    }
    for (g, w) in gw1.iter_mut().zip(&model.w1) {
        *g += l2 * w;
    }
    for (g, w) in gw2.iter_mut().zip(&model.w2) {
        *g += l2 * w;
    }

    let mut flat = gw1;
    flat.extend_from_slice(&gb1);
    flat.extend_from_slice(&gw2);
    flat.extend_from_slice(&gb2);
    flat
}

/// Train by mini-batch gradient descent on softmax cross-entropy with an L2
/// penalty. Deterministic given the seed.
pub fn train(
    xs: &[Vec<f64>],
    ys: &[usize],
    labels: &[String],
    config: &TrainConfig,
) -> Result<ClassifierModel, BaselineError> {
    assert_eq!(xs.len(), ys.len());
    let input_dim = xs.first().map(|x| x.len()).unwrap_or(0);
    for x in xs {
        if x.len() != input_dim {
            return Err(BaselineError::DimensionMismatch { expected: input_dim, got: x.len() });
        }
    }
    let mut seen = vec![false; labels.len()];
    for &y in ys {
        seen[y] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(BaselineError::DegenerateData);
    }

    let mut rng = SmallRng::seed_from_u64(config.seed);
    let mut model = ClassifierModel::init(labels, input_dim, DEFAULT_HIDDEN, &mut rng);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| xs[i].clone()).collect();
            let by: Vec<usize> = batch.iter().map(|&i| ys[i]).collect();
            let grad = batch_gradient(&model, &bx, &by, config.l2);
            let mut params = model.flatten();
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= config.learning_rate * g;
            }
            model.unflatten(&params);
        }
    }
    Ok(model)
}

/// Argmax prediction; ties break to the lowest label index.
pub fn predict(model: &ClassifierModel, xs: &[Vec<f64>]) -> Result<Vec<(usize, Vec<f64>)>, BaselineError> {
    xs.iter()
        .map(|x| {
            let probs = model.probabilities(x)?;
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = i;
                }
            }
            Ok((best, probs))
        })
        .collect()
}

/// Weighted F1 over index labels; shared by the Monte-Carlo baseline.
fn weighted_f1_indices(gold: &[usize], pred: &[usize], k: usize) -> f64 {
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut support = vec![0usize; k];
    for (&g, &p) in gold.iter().zip(pred) {
        support[g] += 1;
        if g == p {
            tp[g] += 1;
        } else {
            fp[p] += 1;
        }
    }
    let total: usize = support.iter().sum();
    let mut acc = 0.0;
    for c in 0..k {
        let pd = tp[c] + fp[c];
        let p = if pd == 0 { 0.0 } else { tp[c] as f64 / pd as f64 };
        let r = if support[c] == 0 { 0.0 } else { tp[c] as f64 / support[c] as f64 };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        acc += support[c] as f64 * f1;
    }
    acc / total as f64
}

/// Monte-Carlo estimate of the weighted F1 a uniform-random guesser attains
/// against gold labels drawn from `label_distribution` (which must sum
/// to 1). Returned as a fraction in [0, 1].
pub fn expected_random_f1(label_distribution: &[f64], num_trials: usize, seed: u64) -> f64 {
    const SAMPLES_PER_TRIAL: usize = 600;
    let k = label_distribution.len();
    if k == 1 {
        return 1.0;
    }
    let mut cdf = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &p in label_distribution {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut gold = vec![0usize; SAMPLES_PER_TRIAL];
    let mut pred = vec![0usize; SAMPLES_PER_TRIAL];
    for _ in 0..num_trials {
        for i in 0..SAMPLES_PER_TRIAL {
            let u: f64 = rng.gen();
            gold[i] = cdf.iter().position(|&c| u <= c).unwrap_or(k - 1);
            pred[i] = rng.gen_range(0..k);
        }
        total += weighted_f1_indices(&gold, &pred, k);
    }
    total / num_trials as f64
}
