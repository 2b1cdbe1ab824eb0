//! Wall-clock comparison of the two segmental decoders.

use std::time::{Duration, Instant};

use semiseg_core::segmental::{
    constrained_decode, theoretical_speedup, viterbi_decode, DurationModel, SegmentScoring,
};

use crate::error::DataError;
use crate::synth::generate_benchmark;

type Result<T> = std::result::Result<T, DataError>;

/// One benchmark configuration.
#[derive(Debug, Clone, Copy)]
pub struct BenchSetting {
    pub num_frames: usize,
    pub num_classes: usize,
    pub max_duration: usize,
    pub max_segments: usize,
    /// Timed repetitions per decoder (one extra untimed warm-up runs first).
    pub reps: usize,
    pub seed: u64,
    /// Signal-to-noise of the generated scores.
    pub score_snr: f64,
}

impl BenchSetting {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(DataError::invalid("reps must be at least 1"));
        }
        if self.num_classes < 2 {
            return Err(DataError::invalid("benchmark needs at least two classes"));
        }
        if self.max_duration == 0 || self.max_duration > self.num_frames {
            return Err(DataError::invalid("need 1 <= D <= T"));
        }
        if self.max_segments == 0 || self.max_segments > self.num_frames {
            return Err(DataError::invalid("need 1 <= K <= T"));
        }
        Ok(())
    }
}

/// Timings and energies from one benchmark run.
#[derive(Debug, Clone, Copy)]
pub struct BenchResult {
    pub setting: BenchSetting,
    pub viterbi_median: Duration,
    pub constrained_median: Duration,
    pub viterbi_energy: f64,
    pub constrained_energy: f64,
}

impl BenchResult {
    /// Wall-clock ratio duration-bounded / segment-bounded.
    pub fn measured_speedup(&self) -> f64 {
        self.viterbi_median.as_secs_f64() / self.constrained_median.as_secs_f64()
    }

    pub fn theoretical_speedup(&self) -> f64 {
        theoretical_speedup(self.setting.max_duration, self.setting.max_segments)
    }
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

/// Times both decoders on one generated instance: an untimed warm-up, then
/// `reps` timed runs each on a monotonic clock, reporting medians. Runs are
/// sequential on the calling thread so neither decoder suffers contention.
pub fn run_benchmark(setting: &BenchSetting) -> Result<BenchResult> {
    setting.validate()?;
    let (scores, _, transitions) = generate_benchmark(
        setting.num_frames,
        setting.num_classes,
        setting.max_segments.min(setting.num_frames),
        setting.score_snr,
        setting.seed,
    )?;

    let run_viterbi = || {
        viterbi_decode(
            &scores,
            &transitions,
            setting.max_duration,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
    };
    let run_constrained = || {
        constrained_decode(
            &scores,
            &transitions,
            setting.max_segments,
            SegmentScoring::Sum,
            &DurationModel::None,
        )
    };

    let (_, viterbi_energy) = run_viterbi()?;
    let (_, constrained_energy, _) = run_constrained()?;

    let mut viterbi_times = Vec::with_capacity(setting.reps);
    for _ in 0..setting.reps {
        let start = Instant::now();
        let out = run_viterbi()?;
        viterbi_times.push(start.elapsed());
        std::hint::black_box(&out);
    }
    let mut constrained_times = Vec::with_capacity(setting.reps);
    for _ in 0..setting.reps {
        let start = Instant::now();
        let out = run_constrained()?;
        constrained_times.push(start.elapsed());
        std::hint::black_box(&out);
    }

    Ok(BenchResult {
        setting: *setting,
        viterbi_median: median(viterbi_times),
        constrained_median: median(constrained_times),
        viterbi_energy,
        constrained_energy,
    })
}
