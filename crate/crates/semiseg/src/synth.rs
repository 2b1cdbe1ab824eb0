//! Synthetic data: the two-sine-wave toy experiment and random benchmark
//! instances for the decoder speed comparison.

use std::f64::consts::PI;

use semiseg_core::framewise::FeatureSequence;
use semiseg_core::metrics::frame_accuracy;
use semiseg_core::rng::Rng;
use semiseg_core::segmental::{
    estimate_transitions, viterbi_decode, DurationModel, SegmentScoring,
};
use semiseg_core::{
    labels_to_segments, LabelSequence, ScoreMatrix, Segmentation, TransitionModel,
};

use crate::error::DataError;

type Result<T> = std::result::Result<T, DataError>;

const TRANSITION_EPSILON: f64 = 1e-2;

/// One labeled sequence.
pub type ToyInstance = (FeatureSequence, LabelSequence);

/// Parameters of the toy generator.
///
/// Class 0 instances are one sine cycle per segment; class 1 instances are
/// the same wave phase-shifted and offset, so per-frame classification is
/// ambiguous wherever the two waves overlap. The test sequence is two
/// back-to-back class-1 instances.
#[derive(Debug, Clone, Copy)]
pub struct ToyConfig {
    pub segment_length: usize,
    pub phase_shift: f64,
    pub offset: f64,
    pub cycles_per_segment: f64,
    pub noise_sd: f64,
    /// Training instances generated per class.
    pub num_train_instances: usize,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            segment_length: 50,
            phase_shift: PI / 2.0,
            offset: 1.0,
            cycles_per_segment: 1.0,
            noise_sd: 0.05,
            num_train_instances: 20,
            seed: 1,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_length < 2 {
            return Err(DataError::invalid("segment_length must be at least 2"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(DataError::invalid("noise_sd must be finite and non-negative"));
        }
        if self.num_train_instances == 0 {
            return Err(DataError::invalid("need at least one training instance"));
        }
        if !(self.phase_shift.is_finite()
            && self.offset.is_finite()
            && self.cycles_per_segment > 0.0
            && self.cycles_per_segment.is_finite())
        {
            return Err(DataError::invalid("toy wave parameters must be finite"));
        }
        Ok(())
    }
}

/// Generates the toy training set (single-action sequences, alternating
/// classes) and the test sequence (two consecutive class-1 instances).
pub fn generate_toy(cfg: &ToyConfig) -> Result<(Vec<ToyInstance>, ToyInstance)> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let length = cfg.segment_length;

    let wave = |class: usize, rng: &mut Rng| -> Vec<Vec<f64>> {
        (0..length)
            .map(|t| {
                let angle = 2.0 * PI * cfg.cycles_per_segment * t as f64 / length as f64;
                let clean = match class {
                    0 => angle.sin(),
                    _ => (angle + cfg.phase_shift).sin() + cfg.offset,
                };
                vec![clean + cfg.noise_sd * rng.normal()]
            })
            .collect()
    };

    let mut train = Vec::with_capacity(2 * cfg.num_train_instances);
    for _ in 0..cfg.num_train_instances {
        for class in 0..2 {
            let rows = wave(class, &mut rng);
            train.push((
                FeatureSequence::from_rows(&rows)?,
                LabelSequence::new(vec![class; length]),
            ));
        }
    }

    let mut test_rows = wave(1, &mut rng);
    test_rows.extend(wave(1, &mut rng));
    let test = (
        FeatureSequence::from_rows(&test_rows)?,
        LabelSequence::new(vec![1; 2 * length]),
    );
    Ok((train, test))
}

/// Gaussian class-conditional frame scores with a shared diagonal variance.
///
/// The per-class log likelihood is `l[t][c] = sum_f (mu[c][f] * x[t][f] -
/// mu[c][f]^2 / 2) / var[f]`; the emitted score is `l[t][c]` centered by the
/// class average, so scores sum to zero at every frame. For two classes this
/// is a single shared discriminant split symmetrically: positive margin for
/// one class, negative for the other.
#[derive(Debug, Clone)]
pub struct MeanScoreModel {
    num_classes: usize,
    feature_dim: usize,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl MeanScoreModel {
    /// Fits class means and a pooled variance on labeled training sequences.
    pub fn fit(train: &[ToyInstance], num_classes: usize) -> Result<MeanScoreModel> {
        let feature_dim = train
            .first()
            .map(|(x, _)| x.feature_dim())
            .ok_or_else(|| DataError::invalid("mean-score model needs training data"))?;
        let mut means = vec![0.0; num_classes * feature_dim];
        let mut counts = vec![0usize; num_classes];
        for (x, y) in train {
            for t in 0..x.num_frames() {
                let c = y.label(t);
                counts[c] += 1;
                for (f, v) in x.frame(t).iter().enumerate() {
                    means[c * feature_dim + f] += v;
                }
            }
        }
        for c in 0..num_classes {
            if counts[c] == 0 {
                return Err(DataError::invalid(format!("class {c} has no training frames")));
            }
            for f in 0..feature_dim {
                means[c * feature_dim + f] /= counts[c] as f64;
            }
        }
        let mut variances = vec![0.0; feature_dim];
        let total: usize = counts.iter().sum();
        for (x, y) in train {
            for t in 0..x.num_frames() {
                let c = y.label(t);
                for (f, v) in x.frame(t).iter().enumerate() {
                    let d = v - means[c * feature_dim + f];
                    variances[f] += d * d;
                }
            }
        }
        for v in variances.iter_mut() {
            *v = (*v / total as f64).max(1e-9);
        }
        Ok(MeanScoreModel {
            num_classes,
            feature_dim,
            means,
            variances,
        })
    }

    /// Per-frame class scores for a sequence.
    pub fn score(&self, x: &FeatureSequence) -> Result<ScoreMatrix> {
        if x.feature_dim() != self.feature_dim {
            return Err(DataError::invalid("feature dimension mismatch"));
        }
        let frames = x.num_frames();
        let mut values = Vec::with_capacity(frames * self.num_classes);
        let mut row = vec![0.0; self.num_classes];
        for t in 0..frames {
            let features = x.frame(t);
            for (c, slot) in row.iter_mut().enumerate() {
                let mut loglik = 0.0;
                for (f, &x) in features.iter().enumerate() {
                    let mu = self.means[c * self.feature_dim + f];
                    loglik += (mu * x - 0.5 * mu * mu) / self.variances[f];
                }
                *slot = loglik;
            }
            let center = row.iter().sum::<f64>() / self.num_classes as f64;
            values.extend(row.iter().map(|l| l - center));
        }
        Ok(ScoreMatrix::new(frames, self.num_classes, values)?)
    }
}

/// Fits `[d, d^2]` duration weights by least squares against a reference
/// profile over `d = 1..=2 * mean_duration`.
///
/// The profile grows quadratically and crosses zero at 60% of the mean
/// training duration, so segments shorter than that are penalized and longer
/// ones rewarded — the length bias that stops duration-normalized scores
/// from shredding segments.
pub fn fit_duration_weights(mean_duration: f64, scale: f64) -> (f64, f64) {
    let horizon = (2.0 * mean_duration).round().max(2.0) as usize;
    let crossing = 0.6 * mean_duration;
    let target = |d: f64| scale * d * (d - crossing) / (mean_duration * mean_duration);

    // normal equations for the 2-parameter least squares on [d, d^2]
    let (mut s2, mut s3, mut s4, mut td, mut td2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for d in 1..=horizon {
        let d = d as f64;
        let t = target(d);
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
        td += t * d;
        td2 += t * d * d;
    }
    let det = s2 * s4 - s3 * s3;
    let linear = (td * s4 - td2 * s3) / det;
    let quadratic = (td2 * s2 - td * s3) / det;
    (linear, quadratic)
}

/// Outcome of the toy experiment, with everything the plot file needs.
#[derive(Debug, Clone)]
pub struct ToyOutcome {
    /// Frame accuracy of the per-frame classifier, the model's quality
    /// before any duration term helps.
    pub accuracy_without_duration: f64,
    /// Frame accuracy of the segmental decode with the fitted duration term.
    pub accuracy_with_duration: f64,
    pub duration_weights: (f64, f64),
    pub test_features: FeatureSequence,
    pub test_labels: LabelSequence,
    pub test_scores: ScoreMatrix,
    /// Per-frame argmax of the classifier scores.
    pub classifier_labels: LabelSequence,
    /// Segmental decode without the duration term; duration-normalized
    /// scores shred it into short opportunistic fragments.
    pub prediction_without: Segmentation,
    /// Segmental decode with the duration term.
    pub prediction_with: Segmentation,
}

/// Trains mean-score weights on the toy training set and decodes the test
/// sequence with duration-normalized segment scores, once without and once
/// with the fitted quadratic duration term.
///
/// The mean is not submodular: splitting a segment can only add score, so
/// without a duration term the decode collapses into very short fragments
/// whose accuracy falls below even the plain per-frame classifier. The
/// reported no-duration accuracy is that classifier baseline; the quadratic
/// duration term makes long segments pay and recovers the sequence exactly.
pub fn run_toy_experiment(cfg: &ToyConfig) -> Result<ToyOutcome> {
    let (train, (test_x, test_y)) = generate_toy(cfg)?;
    let model = MeanScoreModel::fit(&train, 2)?;
    let scores = model.score(&test_x)?;

    let train_segmentations: Vec<Segmentation> =
        train.iter().map(|(_, y)| labels_to_segments(y)).collect();
    let transitions = estimate_transitions(&train_segmentations, 2, TRANSITION_EPSILON)?;

    let durations: Vec<usize> = train_segmentations
        .iter()
        .flat_map(|s| s.segments().iter().map(|seg| seg.duration))
        .collect();
    let mean_duration = durations.iter().sum::<usize>() as f64 / durations.len() as f64;
    let (linear, quadratic) = fit_duration_weights(mean_duration, 40.0);

    let frames = scores.num_frames();
    let classifier_labels = LabelSequence::new(
        (0..frames)
            .map(|t| {
                let row = scores.frame(t);
                let mut best = 0;
                for (c, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect(),
    );
    let (without, _) = viterbi_decode(
        &scores,
        &transitions,
        frames,
        SegmentScoring::MeanPlusPrior,
        &DurationModel::None,
    )?;
    let (with, _) = viterbi_decode(
        &scores,
        &transitions,
        frames,
        SegmentScoring::MeanPlusPrior,
        &DurationModel::Quadratic { linear, quadratic },
    )?;

    let accuracy_without_duration = frame_accuracy(&test_y, &classifier_labels)?;
    let accuracy_with_duration =
        frame_accuracy(&test_y, &semiseg_core::segments_to_labels(&with))?;

    Ok(ToyOutcome {
        accuracy_without_duration,
        accuracy_with_duration,
        duration_weights: (linear, quadratic),
        test_features: test_x,
        test_labels: test_y,
        test_scores: scores,
        classifier_labels,
        prediction_without: without,
        prediction_with: with,
    })
}

/// Random benchmark instance: a strict ground-truth segmentation with
/// `true_segments` segments over `num_frames` frames, scores that are the
/// one-hot truth scaled by `score_snr` plus unit Gaussian noise, and a
/// transition model estimated from the truth.
pub fn generate_benchmark(
    num_frames: usize,
    num_classes: usize,
    true_segments: usize,
    score_snr: f64,
    seed: u64,
) -> Result<(ScoreMatrix, Segmentation, TransitionModel)> {
    if num_classes < 2 {
        return Err(DataError::invalid("benchmark needs at least two classes"));
    }
    if true_segments == 0 || true_segments > num_frames {
        return Err(DataError::invalid(
            "true segment count must satisfy 1 <= K <= T",
        ));
    }
    if !(score_snr >= 0.0 && score_snr.is_finite()) {
        return Err(DataError::invalid("score_snr must be finite and non-negative"));
    }
    let mut rng = Rng::new(seed);

    // distinct interior breakpoints
    let mut interior: Vec<usize> = (1..num_frames).collect();
    rng.shuffle(&mut interior);
    let mut cuts: Vec<usize> = interior[..true_segments - 1].to_vec();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(num_frames);

    let mut runs = Vec::with_capacity(true_segments);
    let mut prev = usize::MAX;
    for pair in cuts.windows(2) {
        let label = if prev == usize::MAX {
            rng.below(num_classes)
        } else {
            // uniform over the other classes
            let pick = rng.below(num_classes - 1);
            if pick >= prev {
                pick + 1
            } else {
                pick
            }
        };
        runs.push((label, pair[1] - pair[0]));
        prev = label;
    }
    let truth = Segmentation::from_runs(&runs)?;

    let labels = semiseg_core::segments_to_labels(&truth);
    let mut values = Vec::with_capacity(num_frames * num_classes);
    for t in 0..num_frames {
        for c in 0..num_classes {
            let signal = if labels.label(t) == c { score_snr } else { 0.0 };
            values.push(signal + rng.normal());
        }
    }
    let scores = ScoreMatrix::new(num_frames, num_classes, values)?;
    let transitions = estimate_transitions(std::slice::from_ref(&truth), num_classes, TRANSITION_EPSILON)?;
    Ok((scores, truth, transitions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use semiseg_core::segmental::constrained_decode;

    #[test]
    fn toy_class_means_without_noise() {
        let cfg = ToyConfig {
            noise_sd: 0.0,
            num_train_instances: 1,
            ..ToyConfig::default()
        };
        let (train, (test_x, test_y)) = generate_toy(&cfg).unwrap();
        assert_eq!(train.len(), 2);
        // full sine cycles average to zero; class 1 sits at the offset
        for (x, y) in &train {
            let mean: f64 =
                (0..x.num_frames()).map(|t| x.frame(t)[0]).sum::<f64>() / x.num_frames() as f64;
            match y.label(0) {
                0 => assert!(mean.abs() < 1e-9, "class 0 mean {mean}"),
                _ => assert!((mean - 1.0).abs() < 1e-9, "class 1 mean {mean}"),
            }
        }
        assert_eq!(test_x.num_frames(), 100);
        assert_eq!(test_y.labels(), &vec![1usize; 100][..]);
    }

    #[test]
    fn toy_is_deterministic() {
        let cfg = ToyConfig::default();
        let a = generate_toy(&cfg).unwrap();
        let b = generate_toy(&cfg).unwrap();
        assert_eq!(a.0.len(), b.0.len());
        for ((xa, ya), (xb, yb)) in a.0.iter().zip(&b.0) {
            assert_eq!(xa, xb);
            assert_eq!(ya, yb);
        }
        assert_eq!(a.1 .0, b.1 .0);
    }

    #[test]
    fn duration_fit_crosses_at_sixty_percent() {
        let (linear, quadratic) = fit_duration_weights(50.0, 40.0);
        assert!(quadratic > 0.0);
        let value = |d: f64| linear * d + quadratic * d * d;
        // penalized below the crossing, rewarded above
        assert!(value(10.0) < 0.0);
        assert!(value(29.0) < 0.0);
        assert!(value(31.0) > 0.0);
        assert!(value(50.0) > 0.0);
        // crossing sits near 0.6 * mean
        let crossing = -linear / quadratic;
        assert!((crossing - 30.0).abs() < 1.0, "crossing {crossing}");
    }

    #[test]
    fn toy_experiment_duration_term_fixes_fragmentation() {
        let outcome = run_toy_experiment(&ToyConfig::default()).unwrap();
        assert_eq!(outcome.accuracy_with_duration, 1.0);
        assert!(
            (0.5..=0.85).contains(&outcome.accuracy_without_duration),
            "accuracy without duration: {}",
            outcome.accuracy_without_duration
        );
        assert!(outcome.accuracy_without_duration < outcome.accuracy_with_duration);
        // the no-duration decode visibly fragments; the decode accuracy falls
        // below even the per-frame classifier
        assert!(outcome.prediction_without.num_segments() > outcome.prediction_with.num_segments());
        let decode_accuracy = frame_accuracy(
            &outcome.test_labels,
            &semiseg_core::segments_to_labels(&outcome.prediction_without),
        )
        .unwrap();
        assert!(decode_accuracy <= outcome.accuracy_without_duration);
    }

    #[test]
    fn benchmark_invariants_and_recovery() {
        let (scores, truth, transitions) = generate_benchmark(120, 4, 9, 1e6, 7).unwrap();
        assert_eq!(scores.num_frames(), 120);
        assert!(truth.is_strict());
        assert_eq!(truth.num_segments(), 9);
        assert_eq!(truth.total_frames(), 120);

        // overwhelming SNR: the K-bounded decode recovers the truth exactly
        let (decoded, _, _) = constrained_decode(
            &scores,
            &transitions,
            9,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        assert_eq!(decoded, truth);
    }

    #[test]
    fn benchmark_zero_snr_is_chance_level() {
        let mut total = 0.0;
        let trials = 50;
        for seed in 0..trials {
            let (scores, truth, transitions) =
                generate_benchmark(80, 4, 6, 0.0, 1000 + seed).unwrap();
            let (decoded, _, _) = constrained_decode(
                &scores,
                &transitions,
                6,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            total += frame_accuracy(
                &semiseg_core::segments_to_labels(&truth),
                &semiseg_core::segments_to_labels(&decoded),
            )
            .unwrap();
        }
        let mean = total / trials as f64;
        assert!(
            (mean - 0.25).abs() < 0.1,
            "zero-snr accuracy should sit near chance: {mean}"
        );
    }

    #[test]
    fn benchmark_is_deterministic() {
        let a = generate_benchmark(60, 3, 5, 2.0, 11).unwrap();
        let b = generate_benchmark(60, 3, 5, 2.0, 11).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
    }
}
