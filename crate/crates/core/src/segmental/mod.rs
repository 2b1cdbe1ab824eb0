//! Segment-level model and decoders.
//!
//! A labeling is scored segment-wise: segment `j` with label `y_j`, start
//! `t_j`, and duration `d_j` contributes
//!
//! ```text
//! f(j) = A[y_{j-1}][y_j] + base(y_j, t_j, d_j) + w_dur . gamma(d_j)
//! ```
//!
//! where `A` is the log-transition matrix (no incoming term for the first
//! segment), `base` is either the plain sum of frame scores or a
//! duration-normalized mean plus a class log prior, and `gamma` is an
//! optional duration feature. Self-transitions are forbidden: adjacent
//! segments always differ in label.
//!
//! Two exact-inference strategies are provided. [`viterbi_decode`] bounds the
//! longest segment duration by `D` and runs in `O(T·D·C²)`;
//! [`constrained_decode`] bounds the number of segments by `K` and runs in
//! `O(K·T·C²)`, a factor [`theoretical_speedup`]`= D/K` cheaper whenever
//! `K < D`. [`brute_force_decode`] enumerates every strict segmentation of a
//! short sequence and anchors the test suites.

mod brute;
mod constrained;
mod viterbi;

pub use brute::{brute_force_decode, DecodeConstraint, BRUTE_FORCE_FRAME_LIMIT};
pub use constrained::constrained_decode;
pub use viterbi::viterbi_decode;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::types::{ScoreMatrix, Segmentation, TransitionModel};

/// How the data term of a segment is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegmentScoring {
    /// Sum of frame scores over the segment.
    #[default]
    Sum,
    /// Duration-normalized mean of frame scores plus the class log prior.
    MeanPlusPrior,
}

/// Optional per-segment duration feature `gamma(d)` with learned weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DurationModel {
    /// No duration term.
    #[default]
    None,
    /// `gamma(d) = [d]`.
    Discrete { weight: f64 },
    /// `gamma(d) = [d, d^2]`.
    Quadratic { linear: f64, quadratic: f64 },
}

impl DurationModel {
    /// Weighted duration score for a segment of `duration` frames.
    #[inline]
    pub fn score(&self, duration: usize) -> f64 {
        let d = duration as f64;
        match *self {
            DurationModel::None => 0.0,
            DurationModel::Discrete { weight } => weight * d,
            DurationModel::Quadratic { linear, quadratic } => linear * d + quadratic * d * d,
        }
    }

    /// Increment when a segment grows from `duration - 1` to `duration`
    /// frames. For `[d, d^2]` this is `w1 + w2·(2d - 1)`.
    #[inline]
    pub(crate) fn step(&self, duration: usize) -> f64 {
        let d = duration as f64;
        match *self {
            DurationModel::None => 0.0,
            DurationModel::Discrete { weight } => weight,
            DurationModel::Quadratic { linear, quadratic } => {
                linear + quadratic * (2.0 * d - 1.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            DurationModel::None => true,
            DurationModel::Discrete { weight } => weight.is_finite(),
            DurationModel::Quadratic { linear, quadratic } => {
                linear.is_finite() && quadratic.is_finite()
            }
        };
        match finite {
            true => Ok(()),
            false => Err(Error::NonFinite {
                what: "duration weights",
            }),
        }
    }
}

fn check_decode_inputs(scores: &ScoreMatrix, model: &TransitionModel) -> Result<()> {
    if model.num_classes() != scores.num_classes() {
        return Err(Error::DimensionMismatch {
            what: "transition model classes",
            expected: scores.num_classes(),
            found: model.num_classes(),
        });
    }
    Ok(())
}

/// Total energy of a strict segmentation under the segment model.
///
/// The first segment has no incoming transition term. Returns negative
/// infinity when the segmentation crosses a forbidden transition.
pub fn segment_energy(
    scores: &ScoreMatrix,
    segmentation: &Segmentation,
    model: &TransitionModel,
    scoring: SegmentScoring,
    duration: &DurationModel,
) -> Result<f64> {
    check_decode_inputs(scores, model)?;
    duration.validate()?;
    if segmentation.total_frames() != scores.num_frames() {
        return Err(Error::DimensionMismatch {
            what: "segmentation frames",
            expected: scores.num_frames(),
            found: segmentation.total_frames(),
        });
    }
    if !segmentation.is_strict() {
        return Err(Error::NotStrict);
    }

    let mut energy = 0.0;
    let mut prev: Option<usize> = None;
    for seg in segmentation.segments() {
        if seg.label >= scores.num_classes() {
            return Err(Error::InvalidParameter {
                what: "segment label out of class range",
            });
        }
        if let Some(p) = prev {
            let a = model.transition(p, seg.label);
            if TransitionModel::is_forbidden(a) {
                return Ok(f64::NEG_INFINITY);
            }
            energy += a;
        }
        let mut sum = 0.0;
        for t in seg.start..seg.end() {
            sum += scores.score(t, seg.label);
        }
        energy += match scoring {
            SegmentScoring::Sum => sum,
            SegmentScoring::MeanPlusPrior => {
                let p = model.prior(seg.label);
                if TransitionModel::is_forbidden(p) {
                    return Ok(f64::NEG_INFINITY);
                }
                p + sum / seg.duration as f64
            }
        };
        energy += duration.score(seg.duration);
        prev = Some(seg.label);
    }
    Ok(energy)
}

/// Estimates the log-transition matrix and log prior from training
/// segmentations with additive-epsilon smoothing.
///
/// Off-diagonal entries are `log((count(a->b) + eps) / sum_{b' != a}
/// (count(a->b') + eps))`; self-transitions are forbidden. The prior is the
/// smoothed frequency of segment labels. With `epsilon = 0`, pairs that were
/// never observed become forbidden.
pub fn estimate_transitions(
    train: &[Segmentation],
    num_classes: usize,
    epsilon: f64,
) -> Result<TransitionModel> {
    if num_classes < 2 {
        return Err(Error::InvalidParameter {
            what: "transition estimation needs at least two classes",
        });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            what: "epsilon must be a finite non-negative real",
        });
    }

    let mut pair_counts = vec![0.0f64; num_classes * num_classes];
    let mut seg_counts = vec![0.0f64; num_classes];
    for segmentation in train {
        if !segmentation.is_strict() {
            return Err(Error::NotStrict);
        }
        let mut prev: Option<usize> = None;
        for seg in segmentation.segments() {
            if seg.label >= num_classes {
                return Err(Error::InvalidParameter {
                    what: "training label out of class range",
                });
            }
            seg_counts[seg.label] += 1.0;
            if let Some(p) = prev {
                pair_counts[p * num_classes + seg.label] += 1.0;
            }
            prev = Some(seg.label);
        }
    }

    let mut log_transition = vec![TransitionModel::FORBIDDEN; num_classes * num_classes];
    for a in 0..num_classes {
        let denom: f64 = (0..num_classes)
            .filter(|&b| b != a)
            .map(|b| pair_counts[a * num_classes + b] + epsilon)
            .sum();
        if denom <= 0.0 {
            continue; // nothing ever leaves class `a`
        }
        for b in 0..num_classes {
            if b == a {
                continue;
            }
            let num = pair_counts[a * num_classes + b] + epsilon;
            if num > 0.0 {
                log_transition[a * num_classes + b] = math::ln(num / denom);
            }
        }
    }

    let prior_denom: f64 = seg_counts.iter().map(|&c| c + epsilon).sum();
    let mut log_prior = vec![TransitionModel::FORBIDDEN; num_classes];
    if prior_denom > 0.0 {
        for c in 0..num_classes {
            let num = seg_counts[c] + epsilon;
            if num > 0.0 {
                log_prior[c] = math::ln(num / prior_denom);
            }
        }
    }

    TransitionModel::new(num_classes, log_transition, log_prior)
}

/// Operation-count ratio `D / K` between the duration-bounded and the
/// segment-count-bounded decoders.
pub fn theoretical_speedup(max_duration: usize, max_segments: usize) -> f64 {
    max_duration as f64 / max_segments as f64
}

/// Frame-score sums per class, `prefix[t][c] = sum_{t' < t} s[t'][c]`, shared
/// by the duration-bounded decoder and the oracle.
pub(crate) struct PrefixSums {
    num_classes: usize,
    sums: Vec<f64>,
}

impl PrefixSums {
    pub(crate) fn new(scores: &ScoreMatrix) -> Self {
        let (frames, classes) = (scores.num_frames(), scores.num_classes());
        let mut sums = vec![0.0; (frames + 1) * classes];
        for t in 0..frames {
            for c in 0..classes {
                sums[(t + 1) * classes + c] = sums[t * classes + c] + scores.score(t, c);
            }
        }
        PrefixSums {
            num_classes: classes,
            sums,
        }
    }

    /// Sum of `s[t][class]` over `start..end`.
    #[inline]
    pub(crate) fn class_sum(&self, class: usize, start: usize, end: usize) -> f64 {
        self.sums[end * self.num_classes + class] - self.sums[start * self.num_classes + class]
    }
}

/// Data-plus-prior-plus-duration score of one segment, excluding the
/// incoming transition.
#[inline]
pub(crate) fn open_segment_score(
    prefix: &PrefixSums,
    model: &TransitionModel,
    scoring: SegmentScoring,
    duration_model: &DurationModel,
    label: usize,
    start: usize,
    duration: usize,
) -> f64 {
    let sum = prefix.class_sum(label, start, start + duration);
    let base = match scoring {
        SegmentScoring::Sum => sum,
        SegmentScoring::MeanPlusPrior => model.prior(label) + sum / duration as f64,
    };
    base + duration_model.score(duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Segmentation;

    fn matrix(rows: &[&[f64]]) -> ScoreMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        ScoreMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn energy_zero_scores() {
        let scores = matrix(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let model = TransitionModel::neutral(2).unwrap();
        let seg = Segmentation::from_runs(&[(0, 3)]).unwrap();
        let e = segment_energy(
            &scores,
            &seg,
            &model,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn energy_direct_sum() {
        let scores = matrix(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]]);
        let model = TransitionModel::neutral(2).unwrap();
        let seg = Segmentation::from_runs(&[(0, 2), (1, 1)]).unwrap();
        let e = segment_energy(
            &scores,
            &seg,
            &model,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        assert_eq!(e, 4.0);
    }

    #[test]
    fn energy_matches_framewise_resummation() {
        // independent oracle: expand to labels, sum frame scores of the
        // labeled class, then add transition terms between runs
        let mut rng = crate::rng::Rng::new(42);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.range_f64(-2.0, 2.0)).collect())
                .collect();
            let scores = ScoreMatrix::from_rows(&rows).unwrap();
            let mut runs = Vec::new();
            let mut left = 6;
            let mut prev = usize::MAX;
            while left > 0 {
                let d = 1 + rng.below(left);
                let mut label = rng.below(3);
                if label == prev {
                    label = (label + 1) % 3;
                }
                runs.push((label, d));
                prev = label;
                left -= d;
            }
            let seg = Segmentation::from_runs(&runs).unwrap();
            let model = TransitionModel::neutral(3).unwrap();

            let labels = crate::types::segments_to_labels(&seg);
            let mut expected = 0.0;
            for t in 0..6 {
                expected += scores.score(t, labels.label(t));
            }
            for pair in seg.segments().windows(2) {
                expected += model.transition(pair[0].label, pair[1].label);
            }

            let e = segment_energy(
                &scores,
                &seg,
                &model,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            assert!((e - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_rejects_bad_inputs() {
        let scores = matrix(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let model = TransitionModel::neutral(2).unwrap();
        // frame count mismatch
        let seg = Segmentation::from_runs(&[(0, 3)]).unwrap();
        assert!(segment_energy(
            &scores,
            &seg,
            &model,
            SegmentScoring::Sum,
            &DurationModel::None
        )
        .is_err());
        // non-strict
        let seg = Segmentation::from_runs(&[(0, 1), (0, 1)]).unwrap();
        assert_eq!(
            segment_energy(
                &scores,
                &seg,
                &model,
                SegmentScoring::Sum,
                &DurationModel::None
            ),
            Err(Error::NotStrict)
        );
    }

    #[test]
    fn energy_forbidden_transition_is_sentinel() {
        let scores = matrix(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let model = TransitionModel::new(
            2,
            vec![
                TransitionModel::FORBIDDEN,
                TransitionModel::FORBIDDEN,
                0.0,
                TransitionModel::FORBIDDEN,
            ],
            vec![0.0, 0.0],
        )
        .unwrap();
        let seg = Segmentation::from_runs(&[(0, 1), (1, 1)]).unwrap();
        let e = segment_energy(
            &scores,
            &seg,
            &model,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        assert_eq!(e, f64::NEG_INFINITY);
    }

    #[test]
    fn duration_models() {
        let quad = DurationModel::Quadratic {
            linear: 0.5,
            quadratic: -0.25,
        };
        assert_eq!(quad.score(4), 0.5 * 4.0 - 0.25 * 16.0);
        // incremental steps reconstruct the total
        let mut acc = 0.0;
        for d in 1..=7 {
            acc += quad.step(d);
        }
        assert!((acc - quad.score(7)).abs() < 1e-12);

        let disc = DurationModel::Discrete { weight: 2.0 };
        assert_eq!(disc.score(5), 10.0);
        assert!(DurationModel::Quadratic {
            linear: f64::NAN,
            quadratic: 0.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn transition_estimation_single_observation() {
        let train = vec![Segmentation::from_runs(&[(0, 1), (1, 1)]).unwrap()];
        let model = estimate_transitions(&train, 2, 1e-12).unwrap();
        assert!((math::exp(model.transition(0, 1)) - 1.0).abs() < 1e-9);
        assert!(TransitionModel::is_forbidden(model.transition(0, 0)));
        assert!(TransitionModel::is_forbidden(model.transition(1, 1)));
    }

    #[test]
    fn transition_estimation_count_normalization() {
        // transitions 0->1 three times, 0->2 once, epsilon = 0
        let train = vec![
            Segmentation::from_runs(&[(0, 1), (1, 1)]).unwrap(),
            Segmentation::from_runs(&[(0, 1), (1, 1)]).unwrap(),
            Segmentation::from_runs(&[(0, 1), (1, 1)]).unwrap(),
            Segmentation::from_runs(&[(0, 1), (2, 1)]).unwrap(),
        ];
        let model = estimate_transitions(&train, 3, 0.0).unwrap();
        assert!((math::exp(model.transition(0, 1)) - 0.75).abs() < 1e-12);
        assert!((math::exp(model.transition(0, 2)) - 0.25).abs() < 1e-12);
        // 2->anything was never observed and epsilon is zero
        assert!(TransitionModel::is_forbidden(model.transition(2, 0)));
    }

    #[test]
    fn transition_estimation_laplace_only() {
        let model = estimate_transitions(&[], 3, 1.0).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    assert!(TransitionModel::is_forbidden(model.transition(a, b)));
                } else {
                    assert!((math::exp(model.transition(a, b)) - 0.5).abs() < 1e-12);
                }
            }
        }
        for c in 0..3 {
            assert!((math::exp(model.prior(c)) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_rows_normalize() {
        let mut rng = crate::rng::Rng::new(9);
        let mut train = Vec::new();
        for _ in 0..10 {
            let mut runs = Vec::new();
            let mut prev = usize::MAX;
            for _ in 0..6 {
                let mut label = rng.below(4);
                if label == prev {
                    label = (label + 1) % 4;
                }
                runs.push((label, 1 + rng.below(3)));
                prev = label;
            }
            train.push(Segmentation::from_runs(&runs).unwrap());
        }
        let model = estimate_transitions(&train, 4, 1e-2).unwrap();
        for a in 0..4 {
            let row: f64 = (0..4)
                .filter(|&b| b != a)
                .map(|b| math::exp(model.transition(a, b)))
                .sum();
            assert!((row - 1.0).abs() < 1e-9, "row {a} sums to {row}");
        }
        let prior: f64 = (0..4).map(|c| math::exp(model.prior(c))).sum();
        assert!((prior - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimation_rejects_bad_inputs() {
        assert!(estimate_transitions(&[], 1, 0.1).is_err());
        assert!(estimate_transitions(&[], 2, -0.1).is_err());
        let loose = Segmentation::from_runs(&[(0, 1), (0, 1)]).unwrap();
        assert_eq!(
            estimate_transitions(&[loose], 2, 0.1),
            Err(Error::NotStrict)
        );
    }

    #[test]
    fn speedup_table() {
        assert!((theoretical_speedup(2289, 65) - 35.2).abs() < 0.1);
        assert!((theoretical_speedup(11423, 6) - 1903.8).abs() < 0.1);
        assert!((theoretical_speedup(1107, 37) - 29.9).abs() < 0.1);
    }
}
