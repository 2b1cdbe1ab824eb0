//! Max-margin training of the frame-wise model.
//!
//! Weights minimize a regularized structured hinge: for every training
//! sequence the loss-augmented decoding `ŷ = argmax_y E(x, y) + Δ(y*, y)`
//! yields the subgradient `reg'(w) + (C/N) Σ (Ψ(x, ŷ) - Ψ(x, y*))`, and
//! steps are scaled per coordinate by Adagrad. Regularizer gradients: none
//! `0`, L2 `w` (the gradient of `½‖w‖²`), L1 `sign(w)` with `sign(0) = 0`,
//! nuclear `U·Vᵀ` from the per-block SVD with singular values below `1e-10`
//! skipped.
//!
//! Also here: the task losses themselves and a minimal recurrent baseline
//! whose latent state count equals the class count.

mod rnn;
mod svd;

pub use rnn::{rnn_forward, rnn_gradients, RnnGradientVariant, RnnWeights};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framewise::{
    framewise_decode, joint_features, FeatureSequence, LossAugment, LossKind, PotentialConfig,
    WeightSet,
};
use crate::math;
use crate::rng::Rng;
use crate::types::{labels_to_segments, LabelSequence, Segmentation};

/// Cutoff below which singular values do not contribute to the nuclear
/// gradient.
const NUCLEAR_CUTOFF: f64 = 1e-10;

/// Norm placed on the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularizer {
    None,
    #[default]
    L2,
    L1,
    Nuclear,
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    /// Trade-off constant multiplying the hinge term.
    pub c_reg: f64,
    /// Base Adagrad step size.
    pub eta: f64,
    pub epochs: usize,
    pub regularizer: Regularizer,
    pub loss: LossKind,
    pub adagrad_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c_reg: 1.0,
            eta: 0.5,
            epochs: 50,
            regularizer: Regularizer::L2,
            loss: LossKind::Hamming,
            adagrad_epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c_reg > 0.0
            && self.c_reg.is_finite()
            && self.eta > 0.0
            && self.eta.is_finite()
            && self.epochs > 0
            && self.adagrad_epsilon > 0.0;
        match ok {
            true => Ok(()),
            false => Err(Error::InvalidParameter {
                what: "train config requires positive c_reg, eta, epochs, adagrad_epsilon",
            }),
        }
    }
}

/// Number of frames where the two labelings disagree.
pub fn hamming_loss(reference: &LabelSequence, hypothesis: &LabelSequence) -> Result<usize> {
    if reference.len() != hypothesis.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: hypothesis.len(),
        });
    }
    Ok(reference
        .labels()
        .iter()
        .zip(hypothesis.labels())
        .filter(|(a, b)| a != b)
        .count())
}

/// Sum over ground-truth segments of the fraction of their frames labeled
/// with a different class. Zero for a perfect prediction; higher is worse.
pub fn overlap_loss(ground_truth: &Segmentation, hypothesis: &LabelSequence) -> Result<f64> {
    if ground_truth.total_frames() != hypothesis.len() {
        return Err(Error::LengthMismatch {
            left: ground_truth.total_frames(),
            right: hypothesis.len(),
        });
    }
    let mut loss = 0.0;
    for seg in ground_truth.segments() {
        let hits = (seg.start..seg.end())
            .filter(|&t| hypothesis.label(t) == seg.label)
            .count();
        loss += 1.0 - hits as f64 / seg.duration as f64;
    }
    Ok(loss)
}

fn task_loss(kind: LossKind, reference: &LabelSequence, hypothesis: &LabelSequence) -> Result<f64> {
    match kind {
        LossKind::Hamming => Ok(hamming_loss(reference, hypothesis)? as f64),
        LossKind::Overlap => overlap_loss(&labels_to_segments(reference), hypothesis),
    }
}

/// Gradient of the regularizer at `w`. The configuration supplies the matrix
/// shape of each weight block for the nuclear norm.
pub fn reg_grad(weights: &WeightSet, kind: Regularizer, cfg: &PotentialConfig) -> Result<WeightSet> {
    weights.matches(cfg)?;
    let mut grad = WeightSet::zeros(cfg);
    match kind {
        Regularizer::None => {}
        Regularizer::L2 => grad.add_scaled(weights, 1.0),
        Regularizer::L1 => {
            for (g, w) in grad.blocks_mut().into_iter().zip(weights.blocks()) {
                for (gi, wi) in g.iter_mut().zip(w.iter()) {
                    *gi = if *wi > 0.0 {
                        1.0
                    } else if *wi < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
        }
        Regularizer::Nuclear => {
            let shapes = block_shapes(cfg);
            let grad_blocks = grad.blocks_mut();
            for (i, w) in weights.blocks().into_iter().enumerate() {
                if w.is_empty() {
                    continue;
                }
                let (rows, cols) = shapes[i];
                *grad_blocks[i] = svd::polar_factor(w, rows, cols, NUCLEAR_CUTOFF);
            }
        }
    }
    Ok(grad)
}

/// Value of the regularizer at `w`, consistent with [`reg_grad`] (so the L2
/// term is `½‖w‖²`).
pub fn reg_value(weights: &WeightSet, kind: Regularizer, cfg: &PotentialConfig) -> Result<f64> {
    weights.matches(cfg)?;
    Ok(match kind {
        Regularizer::None => 0.0,
        Regularizer::L2 => 0.5 * weights.squared_l2(),
        Regularizer::L1 => weights.l1(),
        Regularizer::Nuclear => {
            let shapes = block_shapes(cfg);
            let mut total = 0.0;
            for (i, w) in weights.blocks().into_iter().enumerate() {
                if w.is_empty() {
                    continue;
                }
                let (rows, cols) = shapes[i];
                total += svd::singular_values(w, rows, cols).iter().sum::<f64>();
            }
            total
        }
    })
}

/// Matrix shape of each weight block, in [`WeightSet::blocks`] order.
fn block_shapes(cfg: &PotentialConfig) -> [(usize, usize); 7] {
    let (c, f) = (cfg.num_classes, cfg.feature_dim);
    [
        (c, f),                      // data
        (c, c),                      // pair_class
        (c, c * f),                  // pair_data, unfolded per origin class
        (1, c),                      // class_prior
        (1, c),                      // boundary_start
        (1, c),                      // boundary_end
        (cfg.canonical_length, c),   // temporal_prior
    ]
}

/// Per-coordinate accumulated squared gradients.
#[derive(Debug, Clone)]
pub struct AdagradState {
    accumulated: WeightSet,
}

impl AdagradState {
    pub fn new(cfg: &PotentialConfig) -> Self {
        AdagradState {
            accumulated: WeightSet::zeros(cfg),
        }
    }

    pub fn accumulated(&self) -> &WeightSet {
        &self.accumulated
    }
}

/// One Adagrad update in place: the accumulator gains `g²` and each weight
/// moves by `-eta · g / (√accum + eps)`.
pub fn adagrad_step(
    state: &mut AdagradState,
    weights: &mut WeightSet,
    gradient: &WeightSet,
    eta: f64,
    eps: f64,
) {
    let acc_blocks = state.accumulated.blocks_mut();
    let w_blocks = weights.blocks_mut();
    for ((acc, w), g) in acc_blocks.into_iter().zip(w_blocks).zip(gradient.blocks()) {
        for ((a, wi), gi) in acc.iter_mut().zip(w.iter_mut()).zip(g.iter()) {
            *a += gi * gi;
            if *gi != 0.0 {
                *wi -= eta * gi / (math::sqrt(*a) + eps);
            }
        }
    }
}

/// Subgradient of the regularized hinge over a batch: each sample
/// contributes `(C/N)·(Ψ(x, ŷ) - Ψ(x, y*))` with `ŷ` the loss-augmented
/// decoding under the current weights.
pub fn ssvm_subgradient(
    weights: &WeightSet,
    batch: &[(FeatureSequence, LabelSequence)],
    cfg: &PotentialConfig,
    tc: &TrainConfig,
) -> Result<WeightSet> {
    tc.validate()?;
    if batch.is_empty() {
        return Err(Error::Empty {
            what: "subgradient batch",
        });
    }
    let mut grad = reg_grad(weights, tc.regularizer, cfg)?;
    let scale = tc.c_reg / batch.len() as f64;
    for (x, reference) in batch {
        let augmented = framewise_decode(
            weights,
            x,
            cfg,
            Some(LossAugment {
                target: reference,
                loss: tc.loss,
            }),
        )?;
        let psi_augmented = joint_features(x, &augmented, cfg)?;
        let psi_reference = joint_features(x, reference, cfg)?;
        grad.add_scaled(&psi_augmented, scale);
        grad.add_scaled(&psi_reference, -scale);
    }
    Ok(grad)
}

/// Regularized hinge objective over a dataset, decoding `ŷ` fresh under the
/// given weights. Each hinge term is non-negative by definition of the
/// loss-augmented argmax.
pub fn ssvm_objective(
    weights: &WeightSet,
    dataset: &[(FeatureSequence, LabelSequence)],
    cfg: &PotentialConfig,
    tc: &TrainConfig,
) -> Result<f64> {
    let mut total = reg_value(weights, tc.regularizer, cfg)?;
    let scale = tc.c_reg / dataset.len() as f64;
    for (x, reference) in dataset {
        let augmented = framewise_decode(
            weights,
            x,
            cfg,
            Some(LossAugment {
                target: reference,
                loss: tc.loss,
            }),
        )?;
        let delta = task_loss(tc.loss, reference, &augmented)?;
        let psi_augmented = joint_features(x, &augmented, cfg)?;
        let psi_reference = joint_features(x, reference, cfg)?;
        let margin = weights.dot(&psi_augmented) - weights.dot(&psi_reference);
        total += scale * (delta + margin);
    }
    Ok(total)
}

/// Stochastic subgradient training: weights start at zero, samples are
/// visited in a seed-shuffled order with batch size one, and steps use
/// Adagrad. Returns the final weights and the objective after each epoch.
pub fn train_ssvm(
    dataset: &[(FeatureSequence, LabelSequence)],
    cfg: &PotentialConfig,
    tc: &TrainConfig,
) -> Result<(WeightSet, Vec<f64>)> {
    tc.validate()?;
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty { what: "dataset" });
    }
    for (x, y) in dataset {
        if x.feature_dim() != cfg.feature_dim {
            return Err(Error::DimensionMismatch {
                what: "dataset feature dimension",
                expected: cfg.feature_dim,
                found: x.feature_dim(),
            });
        }
        if y.len() != x.num_frames() {
            return Err(Error::LengthMismatch {
                left: x.num_frames(),
                right: y.len(),
            });
        }
        y.validate(cfg.num_classes)?;
    }

    let mut weights = WeightSet::zeros(cfg);
    let mut state = AdagradState::new(cfg);
    let mut rng = Rng::new(tc.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut trace = Vec::with_capacity(tc.epochs);

    for _ in 0..tc.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let sample = &dataset[i..i + 1];
            let grad = ssvm_subgradient(&weights, sample, cfg, tc)?;
            adagrad_step(&mut state, &mut weights, &grad, tc.eta, tc.adagrad_epsilon);
        }
        trace.push(ssvm_objective(&weights, dataset, cfg, tc)?);
    }
    Ok((weights, trace))
}
