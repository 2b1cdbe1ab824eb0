//! Segmentation quality metrics.
//!
//! The segmental edit score compares the *order* of segment labels and
//! ignores exact boundary placement, so it penalizes over-segmentation while
//! tolerating small temporal shifts. Frame accuracy measures per-frame
//! coverage. Classification accuracy scores per-segment label prediction
//! when the true segmentation is known.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{LabelSequence, ScoreMatrix, Segmentation};

/// Bundle of metric values produced by an evaluation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    /// Segmental edit score in `[0, 100]`.
    pub edit_score: f64,
    /// Fraction of correctly labeled frames in `[0, 1]`.
    pub frame_accuracy: f64,
    /// Fraction of correctly classified ground-truth segments, when scores
    /// were available.
    pub classification_accuracy: Option<f64>,
}

/// Segmental edit score: `(1 - lev(g, p) / max(M, N)) * 100`, where `lev` is
/// the Levenshtein distance between the ordered segment-label sequences
/// (unit insertion, deletion, and substitution costs) and `M`, `N` are the
/// segment counts.
///
/// Both inputs are run-length collapsed first, so a prediction that chops
/// one true segment into many pays for the extra insertions.
pub fn edit_score(ground_truth: &Segmentation, prediction: &Segmentation) -> Result<f64> {
    if ground_truth.is_empty() || prediction.is_empty() {
        return Err(Error::Empty {
            what: "segmentation for edit score",
        });
    }
    let a = collapse(ground_truth);
    let b = collapse(prediction);
    let distance = levenshtein(&a, &b);
    let longest = a.len().max(b.len());
    Ok((1.0 - distance as f64 / longest as f64) * 100.0)
}

/// Merges adjacent equal labels so the metric sees strict label runs.
fn collapse(segmentation: &Segmentation) -> Vec<usize> {
    let mut order = Vec::with_capacity(segmentation.num_segments());
    for seg in segmentation.segments() {
        if order.last() != Some(&seg.label) {
            order.push(seg.label);
        }
    }
    order
}

/// Levenshtein distance with unit costs, rolling single-row table.
fn levenshtein(a: &[usize], b: &[usize]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitute = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitute.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

/// Fraction of frames with matching labels.
pub fn frame_accuracy(ground_truth: &LabelSequence, prediction: &LabelSequence) -> Result<f64> {
    if ground_truth.len() != prediction.len() {
        return Err(Error::LengthMismatch {
            left: ground_truth.len(),
            right: prediction.len(),
        });
    }
    if ground_truth.is_empty() {
        return Err(Error::Empty {
            what: "label sequences for frame accuracy",
        });
    }
    let matches = ground_truth
        .labels()
        .iter()
        .zip(prediction.labels())
        .filter(|(g, p)| g == p)
        .count();
    Ok(matches as f64 / ground_truth.len() as f64)
}

/// Classification accuracy with known temporal segmentation: each true
/// segment is predicted as the class with the highest mean score over the
/// segment's frames (argmax ties go to the lowest class index), and the
/// returned value is the fraction of segments predicted correctly.
pub fn classification_accuracy(
    scores: &ScoreMatrix,
    ground_truth: &Segmentation,
) -> Result<f64> {
    if ground_truth.total_frames() != scores.num_frames() {
        return Err(Error::DimensionMismatch {
            what: "segmentation frames",
            expected: scores.num_frames(),
            found: ground_truth.total_frames(),
        });
    }
    if ground_truth.is_empty() {
        return Err(Error::Empty {
            what: "segmentation for classification accuracy",
        });
    }
    let classes = scores.num_classes();
    let mut correct = 0usize;
    for seg in ground_truth.segments() {
        let mut means = vec![0.0; classes];
        for t in seg.start..seg.end() {
            for (c, mean) in means.iter_mut().enumerate() {
                *mean += scores.score(t, c);
            }
        }
        let mut predicted = 0;
        for c in 1..classes {
            if means[c] > means[predicted] {
                predicted = c;
            }
        }
        if predicted == seg.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ground_truth.num_segments() as f64)
}
