//! Domain types shared by every module.
//!
//! All types are immutable after construction and safe to share across
//! concurrent readers. Class indices are 0-based throughout; mapping to and
//! from label names is the business of the I/O layer.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Per-frame, per-class real scores `s[t][c]` — the universal input.
///
/// Stored row-major with `num_frames` rows and `num_classes` columns. Every
/// entry is finite; `num_frames >= 1` and `num_classes >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    num_frames: usize,
    num_classes: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(num_frames: usize, num_classes: usize, values: Vec<f64>) -> Result<Self> {
        if num_frames == 0 {
            return Err(Error::InvalidParameter {
                what: "score matrix needs at least one frame",
            });
        }
        if num_classes < 2 {
            return Err(Error::InvalidParameter {
                what: "score matrix needs at least two classes",
            });
        }
        if values.len() != num_frames * num_classes {
            return Err(Error::DimensionMismatch {
                what: "score matrix entries",
                expected: num_frames * num_classes,
                found: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "score matrix entries",
            });
        }
        Ok(ScoreMatrix {
            num_frames,
            num_classes,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_frames = rows.len();
        let num_classes = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != num_classes {
                return Err(Error::DimensionMismatch {
                    what: "score matrix row",
                    expected: num_classes,
                    found: row.len(),
                });
            }
        }
        let mut values = Vec::with_capacity(num_frames * num_classes);
        for row in rows {
            values.extend_from_slice(row);
        }
        ScoreMatrix::new(num_frames, num_classes, values)
    }

    #[inline]
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    #[inline]
    pub fn score(&self, frame: usize, class: usize) -> f64 {
        self.values[frame * self.num_classes + class]
    }

    /// All class scores for one frame.
    #[inline]
    pub fn frame(&self, frame: usize) -> &[f64] {
        let base = frame * self.num_classes;
        &self.values[base..base + self.num_classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A per-frame class labeling `y[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelSequence {
    labels: Vec<usize>,
}

impl LabelSequence {
    pub fn new(labels: Vec<usize>) -> Self {
        LabelSequence { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn label(&self, frame: usize) -> usize {
        self.labels[frame]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Checks the `label < num_classes` invariant.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        match self.labels.iter().all(|&y| y < num_classes) {
            true => Ok(()),
            false => Err(Error::InvalidParameter {
                what: "label out of class range",
            }),
        }
    }
}

impl From<Vec<usize>> for LabelSequence {
    fn from(labels: Vec<usize>) -> Self {
        LabelSequence::new(labels)
    }
}

/// One action segment: `label` over frames `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub label: usize,
    pub start: usize,
    pub duration: usize,
}

impl Segment {
    pub fn new(label: usize, start: usize, duration: usize) -> Self {
        Segment {
            label,
            start,
            duration,
        }
    }

    /// One past the last frame.
    pub fn end(&self) -> usize {
        self.start + self.duration
    }
}

/// An ordered, gap-free partition of `[0, total_frames)` into labeled
/// segments — the universal output.
///
/// Invariants enforced at construction: every duration is at least one frame,
/// the first segment starts at 0, each segment starts where the previous one
/// ends, and durations sum to `total_frames`. A segmentation is additionally
/// *strict* when adjacent segments carry different labels; decoders only ever
/// produce strict segmentations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    segments: Vec<Segment>,
    total_frames: usize,
}

impl Segmentation {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let mut cursor = 0;
        for seg in &segments {
            if seg.duration == 0 {
                return Err(Error::InvalidSegmentation {
                    what: "zero-duration segment",
                });
            }
            if seg.start != cursor {
                return Err(Error::InvalidSegmentation {
                    what: "segments must be contiguous from frame 0",
                });
            }
            cursor += seg.duration;
        }
        Ok(Segmentation {
            segments,
            total_frames: cursor,
        })
    }

    /// Builds a segmentation from `(label, duration)` runs.
    pub fn from_runs(runs: &[(usize, usize)]) -> Result<Self> {
        let mut segments = Vec::with_capacity(runs.len());
        let mut start = 0;
        for &(label, duration) in runs {
            segments.push(Segment::new(label, start, duration));
            start += duration;
        }
        Segmentation::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn total_frames(&self) -> usize {
        self.total_frames
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// True when no two adjacent segments share a label.
    pub fn is_strict(&self) -> bool {
        self.segments
            .windows(2)
            .all(|pair| pair[0].label != pair[1].label)
    }

    /// Ordered list of segment labels.
    pub fn label_order(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.label).collect()
    }

    /// Largest segment duration, or 0 for an empty segmentation.
    pub fn max_duration(&self) -> usize {
        self.segments.iter().map(|s| s.duration).max().unwrap_or(0)
    }
}

/// Run-length encodes a frame labeling into a strict segmentation.
///
/// Inverse of [`segments_to_labels`]; round-trips exactly for strict inputs.
pub fn labels_to_segments(labels: &LabelSequence) -> Segmentation {
    let mut segments = Vec::new();
    let ys = labels.labels();
    let mut i = 0;
    while i < ys.len() {
        let label = ys[i];
        let start = i;
        while i < ys.len() && ys[i] == label {
            i += 1;
        }
        segments.push(Segment::new(label, start, i - start));
    }
    Segmentation {
        total_frames: ys.len(),
        segments,
    }
}

/// Expands a segmentation back into one label per frame.
pub fn segments_to_labels(segmentation: &Segmentation) -> LabelSequence {
    let mut labels = Vec::with_capacity(segmentation.total_frames());
    for seg in segmentation.segments() {
        labels.extend(core::iter::repeat_n(seg.label, seg.duration));
    }
    LabelSequence::new(labels)
}

/// Segment-level transition scores: a `C x C` log-transition matrix plus a
/// per-class log prior.
///
/// Forbidden transitions are the sentinel [`TransitionModel::FORBIDDEN`]
/// (negative infinity), never a large finite constant, so unreachability is
/// exactly testable. Decoders never select a forbidden transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    num_classes: usize,
    log_transition: Vec<f64>,
    log_prior: Vec<f64>,
}

impl TransitionModel {
    /// Sentinel for transitions that must never be taken.
    pub const FORBIDDEN: f64 = f64::NEG_INFINITY;

    pub fn new(num_classes: usize, log_transition: Vec<f64>, log_prior: Vec<f64>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidParameter {
                what: "transition model needs at least two classes",
            });
        }
        if log_transition.len() != num_classes * num_classes {
            return Err(Error::DimensionMismatch {
                what: "log transition entries",
                expected: num_classes * num_classes,
                found: log_transition.len(),
            });
        }
        if log_prior.len() != num_classes {
            return Err(Error::DimensionMismatch {
                what: "log prior entries",
                expected: num_classes,
                found: log_prior.len(),
            });
        }
        let ok = |v: &f64| v.is_finite() || *v == Self::FORBIDDEN;
        if !log_transition.iter().all(ok) || !log_prior.iter().all(ok) {
            return Err(Error::NonFinite {
                what: "transition model entries (finite or forbidden)",
            });
        }
        Ok(TransitionModel {
            num_classes,
            log_transition,
            log_prior,
        })
    }

    /// Zero log-transitions off the diagonal, forbidden self-transitions,
    /// uniform log prior. Useful as a neutral model.
    pub fn neutral(num_classes: usize) -> Result<Self> {
        let mut log_transition = vec![0.0; num_classes * num_classes];
        for c in 0..num_classes {
            log_transition[c * num_classes + c] = Self::FORBIDDEN;
        }
        let log_prior = vec![crate::math::ln(1.0 / num_classes as f64); num_classes];
        TransitionModel::new(num_classes, log_transition, log_prior)
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Log score for moving from segment label `from` to `to`.
    #[inline]
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.log_transition[from * self.num_classes + to]
    }

    #[inline]
    pub fn prior(&self, class: usize) -> f64 {
        self.log_prior[class]
    }

    pub fn log_transitions(&self) -> &[f64] {
        &self.log_transition
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_prior
    }

    #[inline]
    pub fn is_forbidden(value: f64) -> bool {
        value == Self::FORBIDDEN
    }
}

/// Backtracking record for one dynamic-programming cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackPointer {
    /// Cell was never reached (or is the start of the first segment).
    #[default]
    None,
    /// The current segment continues from the previous frame.
    Stay,
    /// A new segment opens here; the previous segment ended in this class.
    Enter(usize),
}

/// The `K x T x C` value table filled by the segment-count-bounded decoder,
/// retained for inspection.
///
/// `value(k, t, c)` is the best score over labelings of frames `0..=t` that
/// use exactly `k + 1` segments and end in class `c`, or
/// [`ScoreTable::UNREACHABLE`] when no such labeling exists. Unreachable
/// cells are never selected during backtracking.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    max_segments: usize,
    num_frames: usize,
    num_classes: usize,
    values: Vec<f64>,
    backpointers: Vec<BackPointer>,
}

impl ScoreTable {
    /// Sentinel value of cells no labeling can reach.
    pub const UNREACHABLE: f64 = f64::NEG_INFINITY;

    pub(crate) fn unreachable(max_segments: usize, num_frames: usize, num_classes: usize) -> Self {
        let cells = max_segments * num_frames * num_classes;
        ScoreTable {
            max_segments,
            num_frames,
            num_classes,
            values: vec![Self::UNREACHABLE; cells],
            backpointers: vec![BackPointer::None; cells],
        }
    }

    #[inline]
    fn index(&self, k: usize, t: usize, c: usize) -> usize {
        (k * self.num_frames + t) * self.num_classes + c
    }

    /// Number of segment slots (the `K` bound).
    pub fn max_segments(&self) -> usize {
        self.max_segments
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// `k` is zero-based: slot `k` holds labelings with `k + 1` segments.
    #[inline]
    pub fn value(&self, k: usize, t: usize, c: usize) -> f64 {
        self.values[self.index(k, t, c)]
    }

    #[inline]
    pub fn backpointer(&self, k: usize, t: usize, c: usize) -> BackPointer {
        self.backpointers[self.index(k, t, c)]
    }

    pub fn is_unreachable(&self, k: usize, t: usize, c: usize) -> bool {
        self.value(k, t, c) == Self::UNREACHABLE
    }

    #[inline]
    pub(crate) fn set(&mut self, k: usize, t: usize, c: usize, value: f64, bp: BackPointer) {
        let i = self.index(k, t, c);
        self.values[i] = value;
        self.backpointers[i] = bp;
    }
}
