//! Exhaustive decoding oracle for short sequences.

use alloc::vec::Vec;

use super::{check_decode_inputs, DurationModel, SegmentScoring};
use crate::error::{Error, Result};
use crate::types::{ScoreMatrix, Segmentation, TransitionModel};

/// Longest sequence the oracle will enumerate; the search is exponential.
pub const BRUTE_FORCE_FRAME_LIMIT: usize = 14;

/// Which family of segmentations to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeConstraint {
    /// Every segment at most this many frames.
    MaxDuration(usize),
    /// At most this many segments.
    MaxSegments(usize),
}

/// Enumerates every strict segmentation satisfying the constraint and
/// returns the energy maximizer.
///
/// Ties are broken toward fewer segments, then the lexicographically
/// smallest frame labeling. Refuses sequences longer than
/// [`BRUTE_FORCE_FRAME_LIMIT`] frames.
pub fn brute_force_decode(
    scores: &ScoreMatrix,
    model: &TransitionModel,
    constraint: DecodeConstraint,
    scoring: SegmentScoring,
    duration_model: &DurationModel,
) -> Result<(Segmentation, f64)> {
    check_decode_inputs(scores, model)?;
    duration_model.validate()?;
    let frames = scores.num_frames();
    if frames > BRUTE_FORCE_FRAME_LIMIT {
        return Err(Error::SequenceTooLong {
            frames,
            limit: BRUTE_FORCE_FRAME_LIMIT,
        });
    }
    match constraint {
        DecodeConstraint::MaxDuration(d) if d == 0 || d > frames => {
            return Err(Error::InvalidParameter {
                what: "max duration must satisfy 1 <= D <= T",
            })
        }
        DecodeConstraint::MaxSegments(k) if k == 0 || k > frames => {
            return Err(Error::InvalidParameter {
                what: "max segments must satisfy 1 <= K <= T",
            })
        }
        _ => {}
    }

    let mut search = Search {
        scores,
        model,
        constraint,
        scoring,
        duration_model,
        runs: Vec::new(),
        best: None,
    };
    search.extend(0, None, 0.0);

    match search.best {
        Some((runs, energy)) => Ok((Segmentation::from_runs(&runs)?, energy)),
        None => Err(Error::Infeasible),
    }
}

struct Search<'a> {
    scores: &'a ScoreMatrix,
    model: &'a TransitionModel,
    constraint: DecodeConstraint,
    scoring: SegmentScoring,
    duration_model: &'a DurationModel,
    runs: Vec<(usize, usize)>,
    best: Option<(Vec<(usize, usize)>, f64)>,
}

impl Search<'_> {
    fn extend(&mut self, pos: usize, prev: Option<usize>, energy: f64) {
        let frames = self.scores.num_frames();
        if pos == frames {
            self.offer(energy);
            return;
        }
        if let DecodeConstraint::MaxSegments(k) = self.constraint {
            if self.runs.len() == k {
                return;
            }
        }
        let longest = match self.constraint {
            DecodeConstraint::MaxDuration(d) => d.min(frames - pos),
            DecodeConstraint::MaxSegments(_) => frames - pos,
        };
        for label in 0..self.scores.num_classes() {
            if Some(label) == prev {
                continue;
            }
            let transition = match prev {
                Some(p) => {
                    let a = self.model.transition(p, label);
                    if TransitionModel::is_forbidden(a) {
                        continue;
                    }
                    a
                }
                None => 0.0,
            };
            for duration in 1..=longest {
                let mut sum = 0.0;
                for t in pos..pos + duration {
                    sum += self.scores.score(t, label);
                }
                let base = match self.scoring {
                    SegmentScoring::Sum => sum,
                    SegmentScoring::MeanPlusPrior => {
                        let p = self.model.prior(label);
                        if TransitionModel::is_forbidden(p) {
                            continue;
                        }
                        p + sum / duration as f64
                    }
                };
                let segment = transition + base + self.duration_model.score(duration);
                self.runs.push((label, duration));
                self.extend(pos + duration, Some(label), energy + segment);
                self.runs.pop();
            }
        }
    }

    fn offer(&mut self, energy: f64) {
        let better = match &self.best {
            None => true,
            Some((runs, best_energy)) => {
                energy > *best_energy
                    || (energy == *best_energy
                        && (self.runs.len() < runs.len()
                            || (self.runs.len() == runs.len()
                                && frame_labels(&self.runs) < frame_labels(runs))))
            }
        };
        if better {
            self.best = Some((self.runs.clone(), energy));
        }
    }
}

fn frame_labels(runs: &[(usize, usize)]) -> Vec<usize> {
    let mut labels = Vec::new();
    for &(label, duration) in runs {
        labels.extend(core::iter::repeat_n(label, duration));
    }
    labels
}
