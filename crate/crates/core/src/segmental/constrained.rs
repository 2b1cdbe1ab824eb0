//! Segment-count-bounded decoding.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_decode_inputs, DurationModel, SegmentScoring};
use crate::error::{Error, Result};
use crate::types::{BackPointer, ScoreMatrix, ScoreTable, Segment, Segmentation, TransitionModel};

/// Finds the best strict segmentation with at most `max_segments` segments.
///
/// Forward pass over a `K x T x C` table where slot `k` holds the best score
/// for labelings with `k + 1` segments ending at frame `t` in class `c`:
/// either the current segment continues from `t - 1`, or a new segment opens
/// here from the best class of slot `k - 1`. Frames before `t = k` cannot be
/// reached with `k + 1` segments and stay at the unreachable sentinel.
/// `O(K·T·C²)` time and `O(K·T·C)` space; the filled table is returned for
/// inspection.
///
/// With [`SegmentScoring::Sum`] and no duration term the segment score
/// decomposes frame-by-frame and the result is the exact optimum. Mean
/// scoring and duration features depend on the length of the in-progress
/// segment, which this recursion does not enumerate; those contributions are
/// folded in incrementally along the best-scoring run recorded at each cell
/// (`gamma(d) - gamma(d-1)` per continued frame). Use [`super::viterbi_decode`]
/// when such terms must be globally exact.
///
/// Ties prefer continuing the current segment over opening a new one, then
/// the lower previous class; the final readout prefers fewer segments.
pub fn constrained_decode(
    scores: &ScoreMatrix,
    model: &TransitionModel,
    max_segments: usize,
    scoring: SegmentScoring,
    duration_model: &DurationModel,
) -> Result<(Segmentation, f64, ScoreTable)> {
    check_decode_inputs(scores, model)?;
    duration_model.validate()?;
    let frames = scores.num_frames();
    if max_segments == 0 || max_segments > frames {
        return Err(Error::InvalidParameter {
            what: "max segments must satisfy 1 <= K <= T",
        });
    }

    let mut table = ScoreTable::unreachable(max_segments, frames, scores.num_classes());
    let plain = scoring == SegmentScoring::Sum && *duration_model == DurationModel::None;
    if plain {
        forward_sum(scores, model, &mut table);
    } else {
        forward_tracked(scores, model, scoring, duration_model, &mut table);
    }

    // best over at most K segments; ties go to fewer segments, lower class
    let classes = scores.num_classes();
    let (mut best_k, mut best_c, mut energy) = (0, 0, f64::NEG_INFINITY);
    for k in 0..max_segments {
        for c in 0..classes {
            let v = table.value(k, frames - 1, c);
            if v > energy {
                energy = v;
                best_k = k;
                best_c = c;
            }
        }
    }
    if energy == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }

    let segmentation = backtrack(&table, best_k, best_c)?;
    Ok((segmentation, energy, table))
}

/// Plain forward pass: segment scores are sums of frame scores.
fn forward_sum(scores: &ScoreMatrix, model: &TransitionModel, table: &mut ScoreTable) {
    let frames = scores.num_frames();
    let classes = scores.num_classes();

    for c in 0..classes {
        table.set(0, 0, c, scores.score(0, c), BackPointer::None);
    }
    for t in 1..frames {
        for c in 0..classes {
            let v = table.value(0, t - 1, c) + scores.score(t, c);
            table.set(0, t, c, v, BackPointer::Stay);
        }
    }

    for k in 1..table.max_segments() {
        for t in k..frames {
            for c in 0..classes {
                let stay = table.value(k, t - 1, c);
                let mut enter = f64::NEG_INFINITY;
                let mut enter_from = 0;
                for prev in 0..classes {
                    if prev == c {
                        continue;
                    }
                    let a = model.transition(prev, c);
                    if TransitionModel::is_forbidden(a) {
                        continue;
                    }
                    let v = table.value(k - 1, t - 1, prev) + a;
                    if v > enter {
                        enter = v;
                        enter_from = prev;
                    }
                }
                let s = scores.score(t, c);
                if stay >= enter {
                    if stay != f64::NEG_INFINITY {
                        table.set(k, t, c, stay + s, BackPointer::Stay);
                    }
                } else {
                    table.set(k, t, c, enter + s, BackPointer::Enter(enter_from));
                }
            }
        }
    }
}

/// Forward pass that also tracks the running length and score sum of each
/// cell's in-progress segment, so mean scoring and duration features can be
/// applied incrementally.
fn forward_tracked(
    scores: &ScoreMatrix,
    model: &TransitionModel,
    scoring: SegmentScoring,
    duration_model: &DurationModel,
    table: &mut ScoreTable,
) {
    let frames = scores.num_frames();
    let classes = scores.num_classes();
    let cells = table.max_segments() * frames * classes;
    let mut run_len = vec![0usize; cells];
    let mut run_sum = vec![0.0f64; cells];
    let at = |k: usize, t: usize, c: usize| (k * frames + t) * classes + c;

    let open_value = |c: usize, t: usize| -> f64 {
        let s = scores.score(t, c);
        let base = match scoring {
            SegmentScoring::Sum => s,
            SegmentScoring::MeanPlusPrior => model.prior(c) + s,
        };
        base + duration_model.score(1)
    };
    // value change when the in-progress segment grows by the frame at `t`
    let stay_delta = |c: usize, t: usize, len: usize, sum: f64| -> f64 {
        let s = scores.score(t, c);
        let body = match scoring {
            SegmentScoring::Sum => s,
            SegmentScoring::MeanPlusPrior => {
                let new_len = (len + 1) as f64;
                (sum + s) / new_len - sum / len as f64
            }
        };
        body + duration_model.step(len + 1)
    };

    for c in 0..classes {
        let v = open_value(c, 0);
        if v != f64::NEG_INFINITY {
            table.set(0, 0, c, v, BackPointer::None);
            run_len[at(0, 0, c)] = 1;
            run_sum[at(0, 0, c)] = scores.score(0, c);
        }
    }
    for t in 1..frames {
        for c in 0..classes {
            let prev_v = table.value(0, t - 1, c);
            if prev_v == f64::NEG_INFINITY {
                continue;
            }
            let i = at(0, t - 1, c);
            let (len, sum) = (run_len[i], run_sum[i]);
            let v = prev_v + stay_delta(c, t, len, sum);
            table.set(0, t, c, v, BackPointer::Stay);
            run_len[at(0, t, c)] = len + 1;
            run_sum[at(0, t, c)] = sum + scores.score(t, c);
        }
    }

    for k in 1..table.max_segments() {
        for t in k..frames {
            for c in 0..classes {
                let mut stay = f64::NEG_INFINITY;
                let stay_prev = table.value(k, t - 1, c);
                if stay_prev != f64::NEG_INFINITY {
                    let i = at(k, t - 1, c);
                    stay = stay_prev + stay_delta(c, t, run_len[i], run_sum[i]);
                }
                let mut enter = f64::NEG_INFINITY;
                let mut enter_from = 0;
                for prev in 0..classes {
                    if prev == c {
                        continue;
                    }
                    let a = model.transition(prev, c);
                    if TransitionModel::is_forbidden(a) {
                        continue;
                    }
                    let v = table.value(k - 1, t - 1, prev);
                    if v == f64::NEG_INFINITY {
                        continue;
                    }
                    let v = v + a + open_value(c, t);
                    if v > enter {
                        enter = v;
                        enter_from = prev;
                    }
                }
                if stay == f64::NEG_INFINITY && enter == f64::NEG_INFINITY {
                    continue;
                }
                if stay >= enter {
                    let i = at(k, t - 1, c);
                    let (len, sum) = (run_len[i], run_sum[i]);
                    table.set(k, t, c, stay, BackPointer::Stay);
                    run_len[at(k, t, c)] = len + 1;
                    run_sum[at(k, t, c)] = sum + scores.score(t, c);
                } else {
                    table.set(k, t, c, enter, BackPointer::Enter(enter_from));
                    run_len[at(k, t, c)] = 1;
                    run_sum[at(k, t, c)] = scores.score(t, c);
                }
            }
        }
    }
}

fn backtrack(table: &ScoreTable, final_k: usize, final_c: usize) -> Result<Segmentation> {
    let frames = table.num_frames();
    let mut segments = Vec::with_capacity(final_k + 1);
    let mut k = final_k;
    let mut c = final_c;
    let mut end = frames;
    let mut t = frames - 1;
    loop {
        match table.backpointer(k, t, c) {
            BackPointer::Stay => {
                debug_assert!(t > 0);
                t -= 1;
            }
            BackPointer::Enter(prev) => {
                segments.push(Segment::new(c, t, end - t));
                end = t;
                debug_assert!(k > 0 && t > 0);
                k -= 1;
                c = prev;
                t -= 1;
            }
            BackPointer::None => {
                debug_assert!(t == 0 && k == 0);
                segments.push(Segment::new(c, 0, end));
                break;
            }
        }
    }
    segments.reverse();
    Segmentation::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::segmental::{
        brute_force_decode, segment_energy, viterbi_decode, DecodeConstraint,
    };
    use crate::types::Segment;

    fn random_scores(rng: &mut Rng, frames: usize, classes: usize) -> ScoreMatrix {
        let rows: Vec<Vec<f64>> = (0..frames)
            .map(|_| (0..classes).map(|_| rng.range_f64(-2.0, 2.0)).collect())
            .collect();
        ScoreMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn single_segment_bound_sums_each_class() {
        let scores = ScoreMatrix::from_rows(&[
            vec![0.2, 0.9],
            vec![0.4, 0.1],
            vec![0.9, 0.3],
        ])
        .unwrap();
        let model = TransitionModel::neutral(2).unwrap();
        let (seg, energy, _) = constrained_decode(
            &scores,
            &model,
            1,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        // class 0 sums to 1.5, class 1 to 1.3
        assert_eq!(seg.segments(), &[Segment::new(0, 0, 3)]);
        assert!((energy - 1.5).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = Rng::new(4031);
        for trial in 0..120 {
            let frames = 4 + rng.below(7); // 4..=10
            let classes = 2 + rng.below(2);
            let scores = random_scores(&mut rng, frames, classes);
            let model = TransitionModel::neutral(classes).unwrap();
            let max_segments = 1 + rng.below(4.min(frames));
            let (seg, energy, _) = constrained_decode(
                &scores,
                &model,
                max_segments,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            let (_, oracle) = brute_force_decode(
                &scores,
                &model,
                DecodeConstraint::MaxSegments(max_segments),
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            assert!(
                (energy - oracle).abs() < 1e-9,
                "trial {trial}: decoder {energy} vs oracle {oracle}"
            );
            assert!(seg.num_segments() <= max_segments);
            assert!(seg.is_strict());
            let recomputed = segment_energy(
                &scores,
                &seg,
                &model,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            assert!((energy - recomputed).abs() < 1e-9);
        }
    }

    #[test]
    fn agrees_with_duration_bounded_decoder_when_unconstrained() {
        // with K = T and D = T both decoders solve the same problem
        let mut rng = Rng::new(555);
        for _ in 0..50 {
            let scores = random_scores(&mut rng, 12, 3);
            let model = TransitionModel::neutral(3).unwrap();
            let (_, constrained_energy, _) = constrained_decode(
                &scores,
                &model,
                12,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            let (_, viterbi_energy) = viterbi_decode(
                &scores,
                &model,
                12,
                SegmentScoring::Sum,
                &DurationModel::None,
            )
            .unwrap();
            assert!(
                (constrained_energy - viterbi_energy).abs() < 1e-9,
                "{constrained_energy} vs {viterbi_energy}"
            );
        }
    }

    #[test]
    fn energy_is_monotone_in_segment_bound() {
        let mut rng = Rng::new(88);
        for _ in 0..20 {
            let scores = random_scores(&mut rng, 9, 3);
            let model = TransitionModel::neutral(3).unwrap();
            let mut last = f64::NEG_INFINITY;
            for k in 1..=9 {
                let (_, energy, _) = constrained_decode(
                    &scores,
                    &model,
                    k,
                    SegmentScoring::Sum,
                    &DurationModel::None,
                )
                .unwrap();
                assert!(energy >= last - 1e-12, "K={k}: {energy} < {last}");
                last = energy;
            }
        }
    }

    #[test]
    fn unreachable_cells_stay_sentinel() {
        let scores = random_scores(&mut Rng::new(1), 5, 2);
        let model = TransitionModel::neutral(2).unwrap();
        let (_, _, table) = constrained_decode(
            &scores,
            &model,
            3,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        // k + 1 segments need at least k + 1 frames
        for k in 1..3 {
            for t in 0..k {
                for c in 0..2 {
                    assert!(table.is_unreachable(k, t, c), "cell ({k},{t},{c})");
                }
            }
        }
        // reachable cells are finite
        for t in 0..5 {
            for c in 0..2 {
                assert!(table.value(0, t, c).is_finite());
            }
        }
    }

    #[test]
    fn prefers_staying_on_ties() {
        // all-zero scores and transitions: every labeling ties at 0, so the
        // decoder should return a single segment
        let scores = ScoreMatrix::new(4, 2, vec![0.0; 8]).unwrap();
        let mut log_transition = vec![0.0; 4];
        log_transition[0] = TransitionModel::FORBIDDEN;
        log_transition[3] = TransitionModel::FORBIDDEN;
        let model = TransitionModel::new(2, log_transition, vec![0.0, 0.0]).unwrap();
        let (seg, energy, _) = constrained_decode(
            &scores,
            &model,
            4,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
        .unwrap();
        assert_eq!(seg.segments(), &[Segment::new(0, 0, 4)]);
        assert_eq!(energy, 0.0);
    }

    #[test]
    fn tracked_variant_matches_oracle_on_concave_duration() {
        // duration reward that saturates keeps the fold on the oracle path
        let mut rng = Rng::new(31337);
        let duration_model = DurationModel::Quadratic {
            linear: 1.0,
            quadratic: -0.06,
        };
        for _ in 0..60 {
            let frames = 5 + rng.below(4);
            let scores = random_scores(&mut rng, frames, 2);
            let model = TransitionModel::neutral(2).unwrap();
            let (_, energy, _) = constrained_decode(
                &scores,
                &model,
                3,
                SegmentScoring::Sum,
                &duration_model,
            )
            .unwrap();
            let (_, oracle) = brute_force_decode(
                &scores,
                &model,
                DecodeConstraint::MaxSegments(3),
                SegmentScoring::Sum,
                &duration_model,
            )
            .unwrap();
            assert!(
                energy <= oracle + 1e-9,
                "fold must never exceed the true optimum"
            );
        }
    }

    #[test]
    fn rejects_bad_segment_bound() {
        let scores = ScoreMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        let model = TransitionModel::neutral(2).unwrap();
        for k in [0, 3] {
            assert!(constrained_decode(
                &scores,
                &model,
                k,
                SegmentScoring::Sum,
                &DurationModel::None
            )
            .is_err());
        }
    }
}
