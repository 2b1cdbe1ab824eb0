//! Minimal recurrent baseline.
//!
//! One latent state per class: the activation is
//! `a[t][c] = sigmoid(w_u[c] . x_t + w_p[y_hat[t-1]][c])` where `y_hat[t-1]`
//! is the hard argmax of the previous activations; the first frame has no
//! recurrent term. Trained on squared error against one-hot targets, with
//! the hard recurrence treated as constant (no backpropagation through time).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framewise::FeatureSequence;
use crate::math;
use crate::types::{LabelSequence, ScoreMatrix};

/// Unary (`C x F`) and recurrent (`C x C`) weights of the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnWeights {
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Row-major `C x F`.
    pub unary: Vec<f64>,
    /// Row-major `C x C`; entry `[prev][c]` feeds class `c` after `prev`.
    pub pairwise: Vec<f64>,
}

impl RnnWeights {
    pub fn zeros(num_classes: usize, feature_dim: usize) -> Self {
        RnnWeights {
            num_classes,
            feature_dim,
            unary: vec![0.0; num_classes * feature_dim],
            pairwise: vec![0.0; num_classes * num_classes],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 || self.feature_dim == 0 {
            return Err(Error::InvalidParameter {
                what: "recurrent baseline needs C >= 2 and F >= 1",
            });
        }
        if self.unary.len() != self.num_classes * self.feature_dim {
            return Err(Error::DimensionMismatch {
                what: "unary weights",
                expected: self.num_classes * self.feature_dim,
                found: self.unary.len(),
            });
        }
        if self.pairwise.len() != self.num_classes * self.num_classes {
            return Err(Error::DimensionMismatch {
                what: "pairwise weights",
                expected: self.num_classes * self.num_classes,
                found: self.pairwise.len(),
            });
        }
        if !self.unary.iter().chain(&self.pairwise).all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "recurrent baseline weights",
            });
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

/// Forward pass: per-frame activations and the greedy label sequence.
///
/// Labels are the per-frame argmax of the activations, ties to the lowest
/// class index.
pub fn rnn_forward(
    weights: &RnnWeights,
    x: &FeatureSequence,
) -> Result<(ScoreMatrix, LabelSequence)> {
    weights.validate()?;
    if x.feature_dim() != weights.feature_dim {
        return Err(Error::DimensionMismatch {
            what: "feature dimension",
            expected: weights.feature_dim,
            found: x.feature_dim(),
        });
    }
    let (frames, classes, dim) = (x.num_frames(), weights.num_classes, weights.feature_dim);
    let mut activations = vec![0.0; frames * classes];
    let mut labels = Vec::with_capacity(frames);
    let mut prev: Option<usize> = None;
    for t in 0..frames {
        let features = x.frame(t);
        let mut best = 0;
        for c in 0..classes {
            let mut z: f64 = weights.unary[c * dim..(c + 1) * dim]
                .iter()
                .zip(features)
                .map(|(w, v)| w * v)
                .sum();
            if let Some(p) = prev {
                z += weights.pairwise[p * classes + c];
            }
            let a = sigmoid(z);
            activations[t * classes + c] = a;
            if a > activations[t * classes + best] {
                best = c;
            }
        }
        labels.push(best);
        prev = Some(best);
    }
    Ok((
        ScoreMatrix::new(frames, classes, activations)?,
        LabelSequence::new(labels),
    ))
}

/// Which gradient expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnnGradientVariant {
    /// `sum_t e_t x_tᵀ` with `e_t = y*_t - a_t` — the plain delta rule,
    /// which drops the sigmoid derivative.
    DeltaRule,
    /// True gradient of `sum_t ½ (y*_t - a_t)²` with the recurrence frozen:
    /// includes the `a (1 - a)` factor and the descent sign.
    SigmoidCorrected,
}

/// Gradients of the squared-error objective with respect to the unary and
/// pairwise weights, holding the hard argmax recurrence fixed. Targets are
/// the one-hot encoding of `targets`.
pub fn rnn_gradients(
    weights: &RnnWeights,
    x: &FeatureSequence,
    targets: &LabelSequence,
    variant: RnnGradientVariant,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (activations, predicted) = rnn_forward(weights, x)?;
    if targets.len() != x.num_frames() {
        return Err(Error::LengthMismatch {
            left: x.num_frames(),
            right: targets.len(),
        });
    }
    targets.validate(weights.num_classes)?;

    let (frames, classes, dim) = (x.num_frames(), weights.num_classes, weights.feature_dim);
    let mut grad_unary = vec![0.0; classes * dim];
    let mut grad_pair = vec![0.0; classes * classes];
    for t in 0..frames {
        let features = x.frame(t);
        for c in 0..classes {
            let a = activations.score(t, c);
            let target = if targets.label(t) == c { 1.0 } else { 0.0 };
            let err = target - a;
            let factor = match variant {
                RnnGradientVariant::DeltaRule => err,
                RnnGradientVariant::SigmoidCorrected => -err * a * (1.0 - a),
            };
            for f in 0..dim {
                grad_unary[c * dim + f] += factor * features[f];
            }
            if t > 0 {
                grad_pair[predicted.label(t - 1) * classes + c] += factor;
            }
        }
    }
    Ok((grad_unary, grad_pair))
}
