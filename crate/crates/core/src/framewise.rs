//! Frame-wise linear model.
//!
//! The energy of a labeling is a sum over frames of weighted potentials:
//! a data term `w_c . x_t`, a skip-frame pairwise class term coupling `y_{t-d}`
//! and `y_t`, a pairwise data term on the feature difference `x_t - x_{t-d}`,
//! a class prior, start/end boundary priors over the first and last `d`
//! frames, and a temporal prior over a canonical time axis of `T'` bins.
//!
//! Equivalently, the energy is the inner product of a [`WeightSet`] with the
//! sufficient statistics accumulated by [`joint_features`]; both computation
//! paths are implemented and tested against each other. [`framewise_decode`]
//! maximizes the energy exactly: the skip-`d` pairwise terms split the frames
//! into `d` independent chains (one per offset mod `d`), each solved by
//! Viterbi in `O(T·C²)` total. Optionally the decoder augments the energy
//! with a task loss against a reference labeling, which is what max-margin
//! training needs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{labels_to_segments, LabelSequence};

/// Per-frame feature vectors, `T x F` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    num_frames: usize,
    feature_dim: usize,
    values: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(num_frames: usize, feature_dim: usize, values: Vec<f64>) -> Result<Self> {
        if num_frames == 0 || feature_dim == 0 {
            return Err(Error::InvalidParameter {
                what: "feature sequence needs at least one frame and one feature",
            });
        }
        if values.len() != num_frames * feature_dim {
            return Err(Error::DimensionMismatch {
                what: "feature entries",
                expected: num_frames * feature_dim,
                found: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "feature entries",
            });
        }
        Ok(FeatureSequence {
            num_frames,
            feature_dim,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_frames = rows.len();
        let feature_dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(num_frames * feature_dim);
        for row in rows {
            if row.len() != feature_dim {
                return Err(Error::DimensionMismatch {
                    what: "feature row",
                    expected: feature_dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        FeatureSequence::new(num_frames, feature_dim, values)
    }

    #[inline]
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    #[inline]
    pub fn frame(&self, t: usize) -> &[f64] {
        let base = t * self.feature_dim;
        &self.values[base..base + self.feature_dim]
    }
}

/// Which potentials are active, plus their shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotentialConfig {
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Skip length `d` of the pairwise terms; also the width of the
    /// boundary-prior windows.
    pub skip: usize,
    /// Canonical sequence length `T'` of the temporal prior.
    pub canonical_length: usize,
    pub data: bool,
    pub pair_class: bool,
    pub pair_data: bool,
    pub class_prior: bool,
    pub boundary_start: bool,
    pub boundary_end: bool,
    pub temporal_prior: bool,
}

impl PotentialConfig {
    /// All potentials disabled; enable the ones you need.
    pub fn new(num_classes: usize, feature_dim: usize) -> Self {
        PotentialConfig {
            num_classes,
            feature_dim,
            skip: 1,
            canonical_length: 1,
            data: false,
            pair_class: false,
            pair_data: false,
            class_prior: false,
            boundary_start: false,
            boundary_end: false,
            temporal_prior: false,
        }
    }

    /// Data term only — a plain per-frame linear classifier.
    pub fn data_only(num_classes: usize, feature_dim: usize) -> Self {
        PotentialConfig {
            data: true,
            ..PotentialConfig::new(num_classes, feature_dim)
        }
    }

    pub fn has_pairwise(&self) -> bool {
        self.pair_class || self.pair_data
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidParameter {
                what: "potential config needs at least two classes",
            });
        }
        if self.feature_dim == 0 || self.skip == 0 || self.canonical_length == 0 {
            return Err(Error::InvalidParameter {
                what: "feature_dim, skip, and canonical_length must be positive",
            });
        }
        Ok(())
    }

    /// Maps a frame index onto the canonical time axis.
    #[inline]
    fn canonical_bin(&self, t: usize, num_frames: usize) -> usize {
        (t * self.canonical_length / num_frames).min(self.canonical_length - 1)
    }
}

/// One weight (or sufficient-statistic) array per enabled potential.
///
/// Shapes: data `C x F`, pair_class `C x C`, pair_data `C x C x F`,
/// class_prior / boundary_start / boundary_end `C`, temporal_prior `T' x C`.
/// Disabled potentials hold empty arrays. [`joint_features`] returns the
/// same type, so weights and feature maps share all arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub data: Vec<f64>,
    pub pair_class: Vec<f64>,
    pub pair_data: Vec<f64>,
    pub class_prior: Vec<f64>,
    pub boundary_start: Vec<f64>,
    pub boundary_end: Vec<f64>,
    pub temporal_prior: Vec<f64>,
}

impl WeightSet {
    pub fn zeros(cfg: &PotentialConfig) -> Self {
        let (c, f) = (cfg.num_classes, cfg.feature_dim);
        let size = |on: bool, n: usize| if on { vec![0.0; n] } else { Vec::new() };
        WeightSet {
            data: size(cfg.data, c * f),
            pair_class: size(cfg.pair_class, c * c),
            pair_data: size(cfg.pair_data, c * c * f),
            class_prior: size(cfg.class_prior, c),
            boundary_start: size(cfg.boundary_start, c),
            boundary_end: size(cfg.boundary_end, c),
            temporal_prior: size(cfg.temporal_prior, cfg.canonical_length * c),
        }
    }

    /// Checks that the block sizes match the configuration.
    pub fn matches(&self, cfg: &PotentialConfig) -> Result<()> {
        let expect = WeightSet::zeros(cfg);
        let pairs = [
            (self.data.len(), expect.data.len()),
            (self.pair_class.len(), expect.pair_class.len()),
            (self.pair_data.len(), expect.pair_data.len()),
            (self.class_prior.len(), expect.class_prior.len()),
            (self.boundary_start.len(), expect.boundary_start.len()),
            (self.boundary_end.len(), expect.boundary_end.len()),
            (self.temporal_prior.len(), expect.temporal_prior.len()),
        ];
        for (found, expected) in pairs {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    what: "weight block",
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> [&Vec<f64>; 7] {
        [
            &self.data,
            &self.pair_class,
            &self.pair_data,
            &self.class_prior,
            &self.boundary_start,
            &self.boundary_end,
            &self.temporal_prior,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Vec<f64>; 7] {
        [
            &mut self.data,
            &mut self.pair_class,
            &mut self.pair_data,
            &mut self.class_prior,
            &mut self.boundary_start,
            &mut self.boundary_end,
            &mut self.temporal_prior,
        ]
    }

    pub fn dot(&self, other: &WeightSet) -> f64 {
        let mut total = 0.0;
        for (a, b) in self.blocks().into_iter().zip(other.blocks()) {
            debug_assert_eq!(a.len(), b.len());
            total += a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
        }
        total
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &WeightSet, factor: f64) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            debug_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += factor * y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for block in self.blocks_mut() {
            for x in block.iter_mut() {
                *x *= factor;
            }
        }
    }

    pub fn squared_l2(&self) -> f64 {
        self.blocks()
            .into_iter()
            .flat_map(|b| b.iter())
            .map(|x| x * x)
            .sum()
    }

    pub fn l1(&self) -> f64 {
        self.blocks()
            .into_iter()
            .flat_map(|b| b.iter())
            .map(|x| x.abs())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks()
            .into_iter()
            .flat_map(|b| b.iter())
            .all(|x| x.is_finite())
    }

    pub fn len(&self) -> usize {
        self.blocks().into_iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_instance(
    x: &FeatureSequence,
    labels: Option<&LabelSequence>,
    cfg: &PotentialConfig,
) -> Result<()> {
    cfg.validate()?;
    if x.feature_dim() != cfg.feature_dim {
        return Err(Error::DimensionMismatch {
            what: "feature dimension",
            expected: cfg.feature_dim,
            found: x.feature_dim(),
        });
    }
    if let Some(y) = labels {
        if y.len() != x.num_frames() {
            return Err(Error::LengthMismatch {
                left: x.num_frames(),
                right: y.len(),
            });
        }
        y.validate(cfg.num_classes)?;
    }
    if cfg.has_pairwise() && x.num_frames() <= cfg.skip {
        return Err(Error::InvalidParameter {
            what: "pairwise potentials need more frames than the skip length",
        });
    }
    Ok(())
}

/// Accumulates the sufficient statistics of each enabled potential for the
/// labeling `y`. The inner product of the result with a weight set equals
/// [`framewise_energy`].
pub fn joint_features(
    x: &FeatureSequence,
    y: &LabelSequence,
    cfg: &PotentialConfig,
) -> Result<WeightSet> {
    check_instance(x, Some(y), cfg)?;
    let mut psi = WeightSet::zeros(cfg);
    let frames = x.num_frames();
    let (classes, dim, skip) = (cfg.num_classes, cfg.feature_dim, cfg.skip);

    for t in 0..frames {
        let c = y.label(t);
        if cfg.data {
            let row = &mut psi.data[c * dim..(c + 1) * dim];
            for (acc, v) in row.iter_mut().zip(x.frame(t)) {
                *acc += v;
            }
        }
        if cfg.class_prior {
            psi.class_prior[c] += 1.0;
        }
        if cfg.boundary_start && t < skip {
            psi.boundary_start[c] += 1.0;
        }
        if cfg.boundary_end && t + skip >= frames {
            psi.boundary_end[c] += 1.0;
        }
        if cfg.temporal_prior {
            psi.temporal_prior[cfg.canonical_bin(t, frames) * classes + c] += 1.0;
        }
        if t >= skip {
            let prev = y.label(t - skip);
            if cfg.pair_class {
                psi.pair_class[prev * classes + c] += 1.0;
            }
            if cfg.pair_data {
                let base = (prev * classes + c) * dim;
                let (now, before) = (x.frame(t), x.frame(t - skip));
                for f in 0..dim {
                    psi.pair_data[base + f] += now[f] - before[f];
                }
            }
        }
    }
    Ok(psi)
}

/// Energy of a labeling, accumulated frame by frame.
///
/// Computed directly rather than through [`joint_features`]; the two paths
/// agree to floating-point accumulation error.
pub fn framewise_energy(
    weights: &WeightSet,
    x: &FeatureSequence,
    y: &LabelSequence,
    cfg: &PotentialConfig,
) -> Result<f64> {
    check_instance(x, Some(y), cfg)?;
    weights.matches(cfg)?;
    let frames = x.num_frames();
    let (classes, dim, skip) = (cfg.num_classes, cfg.feature_dim, cfg.skip);

    let mut energy = 0.0;
    for t in 0..frames {
        let c = y.label(t);
        if cfg.data {
            let row = &weights.data[c * dim..(c + 1) * dim];
            energy += dot(row, x.frame(t));
        }
        if cfg.class_prior {
            energy += weights.class_prior[c];
        }
        if cfg.boundary_start && t < skip {
            energy += weights.boundary_start[c];
        }
        if cfg.boundary_end && t + skip >= frames {
            energy += weights.boundary_end[c];
        }
        if cfg.temporal_prior {
            energy += weights.temporal_prior[cfg.canonical_bin(t, frames) * classes + c];
        }
        if t >= skip {
            let prev = y.label(t - skip);
            if cfg.pair_class {
                energy += weights.pair_class[prev * classes + c];
            }
            if cfg.pair_data {
                let row = &weights.pair_data[(prev * classes + c) * dim..][..dim];
                let (now, before) = (x.frame(t), x.frame(t - skip));
                for f in 0..dim {
                    energy += row[f] * (now[f] - before[f]);
                }
            }
        }
    }
    Ok(energy)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Task loss used for loss-augmented decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    /// One per disagreeing frame.
    #[default]
    Hamming,
    /// Per ground-truth segment, the fraction of its frames labeled with a
    /// different class; decomposes as `1 / |segment|` per wrong frame.
    Overlap,
}

/// Reference labeling and loss for augmented decoding.
#[derive(Debug, Clone, Copy)]
pub struct LossAugment<'a> {
    pub target: &'a LabelSequence,
    pub loss: LossKind,
}

/// Exact argmax of the energy (optionally plus a task loss) over all
/// labelings.
///
/// Unary-type potentials score each frame independently; the skip-`d`
/// pairwise terms couple only frames whose indices agree mod `d`, so the
/// problem splits into `d` independent chains solved by Viterbi. Argmax ties
/// resolve to the lowest class index.
pub fn framewise_decode(
    weights: &WeightSet,
    x: &FeatureSequence,
    cfg: &PotentialConfig,
    augment: Option<LossAugment<'_>>,
) -> Result<LabelSequence> {
    check_instance(x, None, cfg)?;
    weights.matches(cfg)?;
    let frames = x.num_frames();
    let (classes, dim, skip) = (cfg.num_classes, cfg.feature_dim, cfg.skip);

    // per-frame bonus for labels disagreeing with the augmentation target
    let loss_bonus: Option<Vec<f64>> = match augment {
        None => None,
        Some(aug) => {
            if aug.target.len() != frames {
                return Err(Error::LengthMismatch {
                    left: frames,
                    right: aug.target.len(),
                });
            }
            aug.target.validate(classes)?;
            Some(match aug.loss {
                LossKind::Hamming => vec![1.0; frames],
                LossKind::Overlap => {
                    let mut per_frame = vec![0.0; frames];
                    for seg in labels_to_segments(aug.target).segments() {
                        for slot in &mut per_frame[seg.start..seg.end()] {
                            *slot = 1.0 / seg.duration as f64;
                        }
                    }
                    per_frame
                }
            })
        }
    };

    let unary = |t: usize, c: usize| -> f64 {
        let mut v = 0.0;
        if cfg.data {
            v += dot(&weights.data[c * dim..(c + 1) * dim], x.frame(t));
        }
        if cfg.class_prior {
            v += weights.class_prior[c];
        }
        if cfg.boundary_start && t < skip {
            v += weights.boundary_start[c];
        }
        if cfg.boundary_end && t + skip >= frames {
            v += weights.boundary_end[c];
        }
        if cfg.temporal_prior {
            v += weights.temporal_prior[cfg.canonical_bin(t, frames) * classes + c];
        }
        if let Some(bonus) = &loss_bonus {
            if augment.map(|a| a.target.label(t)) != Some(c) {
                v += bonus[t];
            }
        }
        v
    };

    let mut labels = vec![0usize; frames];
    if !cfg.has_pairwise() {
        for (t, slot) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_value = unary(t, 0);
            for c in 1..classes {
                let v = unary(t, c);
                if v > best_value {
                    best_value = v;
                    best = c;
                }
            }
            *slot = best;
        }
        return Ok(LabelSequence::new(labels));
    }

    let pairwise = |t: usize, prev: usize, c: usize| -> f64 {
        let mut v = 0.0;
        if cfg.pair_class {
            v += weights.pair_class[prev * classes + c];
        }
        if cfg.pair_data {
            let row = &weights.pair_data[(prev * classes + c) * dim..][..dim];
            let (now, before) = (x.frame(t), x.frame(t - skip));
            for f in 0..dim {
                v += row[f] * (now[f] - before[f]);
            }
        }
        v
    };

    // one Viterbi chain per offset mod skip
    let mut values = Vec::new();
    let mut parents = Vec::new();
    for offset in 0..skip.min(frames) {
        let chain: Vec<usize> = (offset..frames).step_by(skip).collect();
        values.clear();
        values.resize(chain.len() * classes, 0.0);
        parents.clear();
        parents.resize(chain.len() * classes, 0usize);

        for (c, slot) in values.iter_mut().enumerate().take(classes) {
            *slot = unary(chain[0], c);
        }
        for i in 1..chain.len() {
            let t = chain[i];
            for c in 0..classes {
                let mut best_prev = 0;
                let mut best_value = values[(i - 1) * classes] + pairwise(t, 0, c);
                for prev in 1..classes {
                    let v = values[(i - 1) * classes + prev] + pairwise(t, prev, c);
                    if v > best_value {
                        best_value = v;
                        best_prev = prev;
                    }
                }
                values[i * classes + c] = best_value + unary(t, c);
                parents[i * classes + c] = best_prev;
            }
        }

        let last = chain.len() - 1;
        let mut c = 0;
        for candidate in 1..classes {
            if values[last * classes + candidate] > values[last * classes + c] {
                c = candidate;
            }
        }
        for i in (0..chain.len()).rev() {
            labels[chain[i]] = c;
            if i > 0 {
                c = parents[i * classes + c];
            }
        }
    }
    Ok(LabelSequence::new(labels))
}
