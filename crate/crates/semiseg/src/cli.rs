//! Command-line interface: decode, eval, bench, train, toy.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible decode.
//! Every command accepts `--format csv` for machine-readable output (one
//! header line plus data rows) and is deterministic given its flags and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use semiseg_core::framewise::{
    framewise_decode, framewise_energy, FeatureSequence, LossKind, PotentialConfig, WeightSet,
};
use semiseg_core::learning::{train_ssvm, hamming_loss, Regularizer, TrainConfig};
use semiseg_core::metrics::{classification_accuracy, edit_score, frame_accuracy, EvalReport};
use semiseg_core::segmental::{
    constrained_decode, estimate_transitions, viterbi_decode, DurationModel, SegmentScoring,
};
use semiseg_core::{
    labels_to_segments, segments_to_labels, Error as CoreError, LabelSequence, ScoreMatrix,
    Segmentation, TransitionModel,
};

use crate::bench::{run_benchmark, BenchSetting};
use crate::error::DataError;
use crate::formats;
use crate::formats::ClassDictionary;
use crate::synth::{run_toy_experiment, ToyConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Command failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Infeasible(m) => m,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Core errors surfaced by decoding: infeasibility gets its own exit code,
/// parameter-range problems are usage errors, the rest are data errors.
fn from_core(e: CoreError) -> CliError {
    match e {
        CoreError::Infeasible => CliError::Infeasible(e.to_string()),
        CoreError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "semiseg",
    version,
    about = "Joint temporal segmentation and classification of frame-score time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a score file into labeled segments.
    Decode(DecodeArgs),
    /// Score a predicted segmentation against the ground truth.
    Eval(EvalArgs),
    /// Compare decoder wall-clock times on a synthetic instance.
    Bench(BenchArgs),
    /// Train frame-wise model weights with max-margin updates.
    Train(TrainArgs),
    /// Run the two-sine-wave duration-term demonstration.
    Toy(ToyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Segviterbi,
    Constrained,
    Framewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Sum,
    MeanPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DurationKind {
    None,
    Discrete,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Score file (optional class-name header, then T rows of C decimals).
    #[arg(long)]
    pub scores: PathBuf,
    /// Transition file with [TRANSITION] and [PRIOR] sections.
    #[arg(long, conflicts_with = "train_segments")]
    pub transitions: Option<PathBuf>,
    /// Directory of training segment files to estimate transitions from.
    #[arg(long)]
    pub train_segments: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Segment-count bound (constrained decoding); defaults to the largest
    /// training segment count when --train-segments is given.
    #[arg(long = "K")]
    pub max_segments: Option<usize>,
    /// Duration bound (segmental Viterbi).
    #[arg(long = "D")]
    pub max_duration: Option<usize>,
    #[arg(long, value_enum, default_value_t = Variant::Sum)]
    pub variant: Variant,
    #[arg(long, value_enum, default_value_t = DurationKind::None)]
    pub duration: DurationKind,
    /// Duration weights: one value for discrete, two for quadratic.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub duration_weights: Vec<f64>,
    /// Additive smoothing for transition estimation.
    #[arg(long, default_value_t = 1e-2)]
    pub epsilon: f64,
    /// Output segments file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth segments file.
    #[arg(long)]
    pub gt: PathBuf,
    /// Predicted segments file.
    #[arg(long)]
    pub pred: PathBuf,
    /// Score file; enables segment classification accuracy.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Drop this label (e.g. a background class) before scoring.
    #[arg(long)]
    pub ignore_label: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "T")]
    pub num_frames: usize,
    #[arg(long = "C")]
    pub num_classes: usize,
    #[arg(long = "K")]
    pub max_segments: usize,
    #[arg(long = "D")]
    pub max_duration: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Signal-to-noise ratio of the generated scores.
    #[arg(long, default_value_t = 3.0)]
    pub snr: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of paired `NAME.features.csv` / `NAME.labels.txt` files.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated potential names: data, pair-class, pair-data,
    /// class-prior, boundary-start, boundary-end, temporal-prior.
    #[arg(long, value_delimiter = ',')]
    pub potentials: Vec<String>,
    #[arg(long, value_enum, default_value_t = LossArg::Hamming)]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value_t = RegArg::L2)]
    pub reg: RegArg,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Output weights file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub c_reg: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Skip length of the pairwise terms and boundary windows.
    #[arg(long, default_value_t = 1)]
    pub skip: usize,
    /// Canonical length of the temporal prior.
    #[arg(long, default_value_t = 50)]
    pub canonical_length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Hamming,
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegArg {
    None,
    L1,
    L2,
    Nuclear,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub segment_length: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    pub phase_shift: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub offset: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cycles: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 20)]
    pub train_instances: usize,
    /// Write per-frame scores and predicted segment lengths here.
    #[arg(long)]
    pub plot_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

/// Runs one parsed command, printing its report to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decode(args) => cmd_decode(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Train(args) => cmd_train(args),
        Command::Toy(args) => cmd_toy(args),
    }
}

fn duration_model(kind: DurationKind, weights: &[f64]) -> Result<DurationModel, CliError> {
    match (kind, weights) {
        (DurationKind::None, []) => Ok(DurationModel::None),
        (DurationKind::None, _) => Err(CliError::usage(
            "--duration-weights given but --duration is none",
        )),
        (DurationKind::Discrete, [weight]) => Ok(DurationModel::Discrete { weight: *weight }),
        (DurationKind::Quadratic, [linear, quadratic]) => Ok(DurationModel::Quadratic {
            linear: *linear,
            quadratic: *quadratic,
        }),
        (DurationKind::Discrete, _) => Err(CliError::usage(
            "--duration discrete needs exactly one --duration-weights value",
        )),
        (DurationKind::Quadratic, _) => Err(CliError::usage(
            "--duration quadratic needs exactly two --duration-weights values",
        )),
    }
}

fn scoring(variant: Variant) -> SegmentScoring {
    match variant {
        Variant::Sum => SegmentScoring::Sum,
        Variant::MeanPrior => SegmentScoring::MeanPlusPrior,
    }
}

/// Reads every file in the directory as a segments file, mapping labels
/// through the score dictionary.
fn read_training_segments(
    dir: &Path,
    dict: &ClassDictionary,
) -> Result<Vec<Segmentation>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no training segment files in {}",
            dir.display()
        )));
    }
    let mut segmentations = Vec::with_capacity(paths.len());
    for path in paths {
        let mut local = dict.clone();
        let seg = formats::read_segments(&path, &mut local)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if local.len() > dict.len() {
            return Err(CliError::Data(format!(
                "{}: label {:?} does not appear in the score file",
                path.display(),
                local.name(dict.len())
            )));
        }
        segmentations.push(seg);
    }
    Ok(segmentations)
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let (scores, dict) = formats::read_scores(&args.scores)?;
    let classes = scores.num_classes();

    let mut training: Option<Vec<Segmentation>> = None;
    let transitions: TransitionModel = match (&args.transitions, &args.train_segments) {
        (Some(path), None) => {
            let model = formats::read_transitions(path)?;
            if model.num_classes() != classes {
                return Err(CliError::Data(format!(
                    "transition file has {} classes, scores have {classes}",
                    model.num_classes()
                )));
            }
            model
        }
        (None, Some(dir)) => {
            let segmentations = read_training_segments(dir, &dict)?;
            let model = estimate_transitions(&segmentations, classes, args.epsilon)
                .map_err(from_core)?;
            training = Some(segmentations);
            model
        }
        _ => {
            return Err(CliError::usage(
                "give exactly one of --transitions and --train-segments",
            ))
        }
    };

    let duration = duration_model(args.duration, &args.duration_weights)?;
    let variant = scoring(args.variant);

    let (segmentation, energy) = match args.algo {
        Algo::Segviterbi => {
            let bound = args
                .max_duration
                .ok_or_else(|| CliError::usage("--algo segviterbi requires --D"))?;
            viterbi_decode(&scores, &transitions, bound, variant, &duration).map_err(from_core)?
        }
        Algo::Constrained => {
            let bound = match args.max_segments {
                Some(k) => k,
                None => training
                    .as_ref()
                    .and_then(|t| t.iter().map(Segmentation::num_segments).max())
                    .ok_or_else(|| {
                        CliError::usage("--algo constrained requires --K or --train-segments")
                    })?,
            };
            let (seg, energy, _) =
                constrained_decode(&scores, &transitions, bound, variant, &duration)
                    .map_err(from_core)?;
            (seg, energy)
        }
        Algo::Framewise => framewise_from_scores(&scores, &transitions).map_err(from_core)?,
    };

    formats::write_segments(&args.out, &segmentation, &dict)?;
    match args.format {
        OutputFormat::Text => {
            println!("energy: {energy}");
            println!("segments: {}", segmentation.num_segments());
        }
        OutputFormat::Csv => {
            println!("energy,segments");
            println!("{energy},{}", segmentation.num_segments());
        }
    }
    Ok(())
}

/// Frame-wise Markov decoding of a score matrix: the scores act as the data
/// term through an identity weight block and the log-transition matrix as
/// the adjacent-frame pairwise term (self-transitions cost nothing;
/// forbidden entries are clamped below the smallest finite log value).
fn framewise_from_scores(
    scores: &ScoreMatrix,
    transitions: &TransitionModel,
) -> Result<(Segmentation, f64), CoreError> {
    let classes = scores.num_classes();
    let cfg = PotentialConfig {
        data: true,
        pair_class: true,
        skip: 1,
        ..PotentialConfig::new(classes, classes)
    };
    let mut weights = WeightSet::zeros(&cfg);
    for c in 0..classes {
        weights.data[c * classes + c] = 1.0;
    }
    let finite_floor = transitions
        .log_transitions()
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::min);
    for a in 0..classes {
        for b in 0..classes {
            let value = transitions.transition(a, b);
            weights.pair_class[a * classes + b] = if a == b {
                0.0
            } else if TransitionModel::is_forbidden(value) {
                finite_floor - 20.0
            } else {
                value
            };
        }
    }
    let rows: Vec<Vec<f64>> = (0..scores.num_frames())
        .map(|t| scores.frame(t).to_vec())
        .collect();
    let x = FeatureSequence::from_rows(&rows)?;
    let labels = framewise_decode(&weights, &x, &cfg, None)?;
    let energy = framewise_energy(&weights, &x, &labels, &cfg)?;
    Ok((labels_to_segments(&labels), energy))
}

type ScoreRows = Vec<Vec<f64>>;

/// Drops `ignored`-labeled segments and rebuilds a contiguous segmentation
/// from what remains, together with the score rows it covers.
fn filter_segments(
    segmentation: &Segmentation,
    ignored: usize,
    scores: Option<&ScoreMatrix>,
) -> Result<(Segmentation, Option<ScoreRows>), CliError> {
    let mut runs = Vec::new();
    let mut rows = scores.map(|_| Vec::new());
    for seg in segmentation.segments() {
        if seg.label == ignored {
            continue;
        }
        runs.push((seg.label, seg.duration));
        if let (Some(rows), Some(scores)) = (&mut rows, scores) {
            for t in seg.start..seg.end() {
                rows.push(scores.frame(t).to_vec());
            }
        }
    }
    if runs.is_empty() {
        return Err(CliError::Data(
            "ignoring that label removes every segment".to_string(),
        ));
    }
    let rebuilt = Segmentation::from_runs(&runs).map_err(from_core)?;
    Ok((rebuilt, rows))
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let (scores, mut dict) = match &args.scores {
        Some(path) => {
            let (scores, dict) = formats::read_scores(path)?;
            (Some(scores), dict)
        }
        None => (None, ClassDictionary::new()),
    };
    let score_classes = scores.as_ref().map(ScoreMatrix::num_classes);

    let truth = formats::read_segments(&args.gt, &mut dict)?;
    let prediction = formats::read_segments(&args.pred, &mut dict)?;
    if truth.total_frames() != prediction.total_frames() {
        return Err(CliError::Data(format!(
            "ground truth covers {} frames, prediction {}",
            truth.total_frames(),
            prediction.total_frames()
        )));
    }
    if let (Some(scores), _) = (&scores, ()) {
        if scores.num_frames() != truth.total_frames() {
            return Err(CliError::Data(format!(
                "score file covers {} frames, segments {}",
                scores.num_frames(),
                truth.total_frames()
            )));
        }
    }
    if let Some(classes) = score_classes {
        if dict.len() > classes {
            return Err(CliError::Data(format!(
                "segment label {:?} does not appear in the score file",
                dict.name(classes)
            )));
        }
    }

    let ignored = args
        .ignore_label
        .as_deref()
        .and_then(|name| dict.index_of(name));

    let report = match ignored {
        None => EvalReport {
            edit_score: edit_score(&truth, &prediction).map_err(from_core)?,
            frame_accuracy: frame_accuracy(
                &segments_to_labels(&truth),
                &segments_to_labels(&prediction),
            )
            .map_err(from_core)?,
            classification_accuracy: scores
                .as_ref()
                .map(|s| classification_accuracy(s, &truth))
                .transpose()
                .map_err(from_core)?,
        },
        Some(background) => {
            let (truth_kept, truth_rows) =
                filter_segments(&truth, background, scores.as_ref())?;
            let (prediction_kept, _) = filter_segments(&prediction, background, None)?;
            let edit = edit_score(&truth_kept, &prediction_kept).map_err(from_core)?;

            // frame accuracy over frames whose true label is not background
            let truth_labels = segments_to_labels(&truth);
            let prediction_labels = segments_to_labels(&prediction);
            let mut kept_truth = Vec::new();
            let mut kept_prediction = Vec::new();
            for t in 0..truth_labels.len() {
                if truth_labels.label(t) != background {
                    kept_truth.push(truth_labels.label(t));
                    kept_prediction.push(prediction_labels.label(t));
                }
            }
            let accuracy = frame_accuracy(&kept_truth.into(), &kept_prediction.into())
                .map_err(from_core)?;

            let classification = match truth_rows {
                Some(rows) => Some(
                    classification_accuracy(
                        &ScoreMatrix::from_rows(&rows).map_err(from_core)?,
                        &truth_kept,
                    )
                    .map_err(from_core)?,
                ),
                None => None,
            };
            EvalReport {
                edit_score: edit,
                frame_accuracy: accuracy,
                classification_accuracy: classification,
            }
        }
    };

    let edit = report.edit_score;
    let accuracy = report.frame_accuracy * 100.0;
    match args.format {
        OutputFormat::Text => {
            let mut line = format!("Edit: {edit:.2} Acc: {accuracy:.2}");
            if let Some(c) = report.classification_accuracy {
                write!(line, " Classif: {:.2}", c * 100.0).unwrap();
            }
            println!("{line}");
        }
        OutputFormat::Csv => match report.classification_accuracy {
            Some(c) => {
                println!("edit,accuracy,classification");
                println!("{edit:.2},{accuracy:.2},{:.2}", c * 100.0);
            }
            None => {
                println!("edit,accuracy");
                println!("{edit:.2},{accuracy:.2}");
            }
        },
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let setting = BenchSetting {
        num_frames: args.num_frames,
        num_classes: args.num_classes,
        max_duration: args.max_duration,
        max_segments: args.max_segments,
        reps: args.reps,
        seed: args.seed,
        score_snr: args.snr,
    };
    setting
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let result = run_benchmark(&setting)?;
    let viterbi_ms = result.viterbi_median.as_secs_f64() * 1e3;
    let constrained_ms = result.constrained_median.as_secs_f64() * 1e3;

    match args.format {
        OutputFormat::Text => {
            println!("{:<12} {:>12} {:>16}", "algo", "median_ms", "energy");
            println!(
                "{:<12} {:>12.3} {:>16.6}",
                "segviterbi", viterbi_ms, result.viterbi_energy
            );
            println!(
                "{:<12} {:>12.3} {:>16.6}",
                "constrained", constrained_ms, result.constrained_energy
            );
            println!("measured speedup: {:.2}x", result.measured_speedup());
            println!("theoretical D/K: {:.2}x", result.theoretical_speedup());
        }
        OutputFormat::Csv => {
            println!("algo,median_ms,energy,measured_speedup,theoretical_speedup");
            println!(
                "segviterbi,{viterbi_ms},{},{},{}",
                result.viterbi_energy,
                result.measured_speedup(),
                result.theoretical_speedup()
            );
            println!(
                "constrained,{constrained_ms},{},{},{}",
                result.constrained_energy,
                result.measured_speedup(),
                result.theoretical_speedup()
            );
        }
    }
    Ok(())
}

fn parse_potentials(names: &[String], classes: usize, feature_dim: usize, skip: usize, canonical: usize) -> Result<PotentialConfig, CliError> {
    if names.is_empty() {
        return Err(CliError::usage("--potentials must name at least one potential"));
    }
    let mut cfg = PotentialConfig::new(classes, feature_dim);
    cfg.skip = skip;
    cfg.canonical_length = canonical;
    for name in names {
        match name.trim() {
            "data" => cfg.data = true,
            "pair-class" => cfg.pair_class = true,
            "pair-data" => cfg.pair_data = true,
            "class-prior" => cfg.class_prior = true,
            "boundary-start" => cfg.boundary_start = true,
            "boundary-end" => cfg.boundary_end = true,
            "temporal-prior" => cfg.temporal_prior = true,
            other => {
                return Err(CliError::usage(format!(
                    "unknown potential {other:?} (expected data, pair-class, pair-data, \
                     class-prior, boundary-start, boundary-end, temporal-prior)"
                )))
            }
        }
    }
    Ok(cfg)
}

/// Loads `NAME.features.csv` / `NAME.labels.txt` pairs, sorted by name.
fn read_training_dir(
    dir: &Path,
) -> Result<(Vec<(FeatureSequence, LabelSequence)>, ClassDictionary), CliError> {
    let mut stems: Vec<(String, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter_map(|path| {
            let name = path.file_name()?.to_str()?;
            let stem = name.strip_suffix(".features.csv")?;
            Some((stem.to_string(), path.clone()))
        })
        .collect();
    stems.sort();
    if stems.is_empty() {
        return Err(CliError::Data(format!(
            "no *.features.csv files in {}",
            dir.display()
        )));
    }
    let mut dict = ClassDictionary::new();
    let mut dataset = Vec::with_capacity(stems.len());
    for (stem, features_path) in stems {
        let labels_path = dir.join(format!("{stem}.labels.txt"));
        let features = formats::read_features(&features_path)
            .map_err(|e| CliError::Data(format!("{}: {e}", features_path.display())))?;
        let labels = formats::read_labels(&labels_path, &mut dict)
            .map_err(|e| CliError::Data(format!("{}: {e}", labels_path.display())))?;
        if labels.len() != features.num_frames() {
            return Err(CliError::Data(format!(
                "{stem}: {} feature rows but {} labels",
                features.num_frames(),
                labels.len()
            )));
        }
        dataset.push((features, labels));
    }
    Ok((dataset, dict))
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let (dataset, dict) = read_training_dir(&args.data)?;
    if dict.len() < 2 {
        return Err(CliError::Data(format!(
            "training data must contain at least two classes, found {}",
            dict.len()
        )));
    }
    let feature_dim = dataset[0].0.feature_dim();
    let cfg = parse_potentials(
        &args.potentials,
        dict.len(),
        feature_dim,
        args.skip,
        args.canonical_length,
    )?;
    let tc = TrainConfig {
        c_reg: args.c_reg,
        eta: args.eta,
        epochs: args.epochs,
        regularizer: match args.reg {
            RegArg::None => Regularizer::None,
            RegArg::L1 => Regularizer::L1,
            RegArg::L2 => Regularizer::L2,
            RegArg::Nuclear => Regularizer::Nuclear,
        },
        loss: match args.loss {
            LossArg::Hamming => LossKind::Hamming,
            LossArg::Overlap => LossKind::Overlap,
        },
        seed: args.seed,
        ..TrainConfig::default()
    };
    tc.validate().map_err(from_core)?;

    let (weights, trace) = train_ssvm(&dataset, &cfg, &tc).map_err(from_core)?;

    let mut errors = 0usize;
    for (x, y) in &dataset {
        let decoded = framewise_decode(&weights, x, &cfg, None).map_err(from_core)?;
        errors += hamming_loss(y, &decoded).map_err(from_core)?;
    }

    formats::write_weights(&args.out, &weights, &cfg)?;
    match args.format {
        OutputFormat::Text => {
            for (epoch, objective) in trace.iter().enumerate() {
                println!("epoch {}: objective {objective}", epoch + 1);
            }
            println!("final training hamming error: {errors}");
            println!("wrote weights to {}", args.out.display());
        }
        OutputFormat::Csv => {
            println!("epoch,objective");
            for (epoch, objective) in trace.iter().enumerate() {
                println!("{},{objective}", epoch + 1);
            }
            eprintln!("final training hamming error: {errors}");
        }
    }
    Ok(())
}

fn cmd_toy(args: ToyArgs) -> Result<(), CliError> {
    let cfg = ToyConfig {
        segment_length: args.segment_length,
        phase_shift: args.phase_shift,
        offset: args.offset,
        cycles_per_segment: args.cycles,
        noise_sd: args.noise_sd,
        num_train_instances: args.train_instances,
        seed: args.seed,
    };
    let outcome = run_toy_experiment(&cfg)?;

    if let Some(path) = &args.plot_out {
        let mut out = String::from(
            "frame,score,pred_without,pred_with,seglen_without,seglen_with\n",
        );
        let labels_without = outcome.classifier_labels.clone();
        let labels_with = segments_to_labels(&outcome.prediction_with);
        let seglen = |segmentation: &Segmentation, t: usize| {
            segmentation
                .segments()
                .iter()
                .find(|s| t >= s.start && t < s.end())
                .map(|s| s.duration)
                .unwrap_or(0)
        };
        for t in 0..outcome.test_scores.num_frames() {
            let margin = outcome.test_scores.score(t, 1) - outcome.test_scores.score(t, 0);
            writeln!(
                out,
                "{t},{margin},{},{},{},{}",
                labels_without.label(t),
                labels_with.label(t),
                seglen(&outcome.prediction_without, t),
                seglen(&outcome.prediction_with, t)
            )
            .unwrap();
        }
        std::fs::write(path, out).map_err(|e| CliError::Data(e.to_string()))?;
    }

    let without = outcome.accuracy_without_duration * 100.0;
    let with = outcome.accuracy_with_duration * 100.0;
    match args.format {
        OutputFormat::Text => {
            println!("acc_without: {without:.2}");
            println!("acc_with: {with:.2}");
        }
        OutputFormat::Csv => {
            println!("acc_without,acc_with");
            println!("{without:.2},{with:.2}");
        }
    }
    Ok(())
}
