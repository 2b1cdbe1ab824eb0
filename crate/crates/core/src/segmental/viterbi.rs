//! Duration-bounded segmental Viterbi decoding.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_decode_inputs, open_segment_score, DurationModel, PrefixSums, SegmentScoring};
use crate::error::{Error, Result};
use crate::types::{ScoreMatrix, Segment, Segmentation, TransitionModel};

#[derive(Clone, Copy)]
struct Cell {
    value: f64,
    duration: usize,
    prev_class: Option<usize>,
}

const DEAD: Cell = Cell {
    value: f64::NEG_INFINITY,
    duration: 0,
    prev_class: None,
};

/// Finds the best strict segmentation whose every segment is at most
/// `max_duration` frames long.
///
/// Classic semi-Markov forward pass: `V[t][c]` is the best score over
/// labelings whose last segment ends at frame `t` with class `c`, maximized
/// over the last segment's duration and the preceding class. `O(T·D·C²)`
/// time, `O(T·C)` space. Exact for every scoring variant and duration model
/// because each candidate segment is scored in full.
///
/// Ties prefer longer final segments, then lower preceding class, so the
/// output is deterministic.
pub fn viterbi_decode(
    scores: &ScoreMatrix,
    model: &TransitionModel,
    max_duration: usize,
    scoring: SegmentScoring,
    duration_model: &DurationModel,
) -> Result<(Segmentation, f64)> {
    check_decode_inputs(scores, model)?;
    duration_model.validate()?;
    let frames = scores.num_frames();
    let classes = scores.num_classes();
    if max_duration == 0 || max_duration > frames {
        return Err(Error::InvalidParameter {
            what: "max duration must satisfy 1 <= D <= T",
        });
    }

    let prefix = PrefixSums::new(scores);
    let mut table = vec![DEAD; frames * classes];

    for t in 0..frames {
        for c in 0..classes {
            let mut best = DEAD;
            for d in 1..=max_duration.min(t + 1) {
                let start = t + 1 - d;
                let body = open_segment_score(&prefix, model, scoring, duration_model, c, start, d);
                if start == 0 {
                    // first segment: no incoming transition
                    take_better(&mut best, body, d, None);
                } else {
                    for prev in 0..classes {
                        if prev == c {
                            continue;
                        }
                        let a = model.transition(prev, c);
                        let incoming = table[(start - 1) * classes + prev].value;
                        if TransitionModel::is_forbidden(a) || incoming == f64::NEG_INFINITY {
                            continue;
                        }
                        take_better(&mut best, incoming + a + body, d, Some(prev));
                    }
                }
            }
            table[t * classes + c] = best;
        }
    }

    let mut best_class = 0;
    for c in 1..classes {
        if table[(frames - 1) * classes + c].value > table[(frames - 1) * classes + best_class].value
        {
            best_class = c;
        }
    }
    let energy = table[(frames - 1) * classes + best_class].value;
    if energy == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }

    // backtrack through (end frame, class) pairs
    let mut segments = Vec::new();
    let mut t = frames - 1;
    let mut c = best_class;
    loop {
        let cell = table[t * classes + c];
        let start = t + 1 - cell.duration;
        segments.push(Segment::new(c, start, cell.duration));
        match cell.prev_class {
            Some(prev) => {
                c = prev;
                t = start - 1;
            }
            None => break,
        }
    }
    segments.reverse();
    Ok((Segmentation::new(segments)?, energy))
}

#[inline]
fn take_better(best: &mut Cell, value: f64, duration: usize, prev_class: Option<usize>) {
    if value == f64::NEG_INFINITY {
        return;
    }
    let better = value > best.value
        || (value == best.value
            && (duration > best.duration
                || (duration == best.duration && prev_class < best.prev_class)));
    if better {
        *best = Cell {
            value,
            duration,
            prev_class,
        };
    }
}
