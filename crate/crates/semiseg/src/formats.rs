//! Plain-text file formats.
//!
//! Everything is comma-separated text, one record per line:
//!
//! - scores: optional header of class names, then `T` rows of `C` decimals;
//! - labels: one class name per line;
//! - segments: `label,start,duration` per line, contiguous from frame 0;
//! - transitions: a `[TRANSITION]` section with `C` rows of `C` log values
//!   (`-inf` marks a forbidden transition) and a `[PRIOR]` section with one
//!   row of `C` log values;
//! - weights: a `[CONFIG]` section with one row
//!   `classes,features,skip,canonical_length`, then one section per enabled
//!   potential with its rows of decimals.
//!
//! Decimals are emitted with Rust's shortest round-trip formatting, so
//! `write` followed by `read` reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use semiseg_core::framewise::{FeatureSequence, PotentialConfig, WeightSet};
use semiseg_core::{LabelSequence, ScoreMatrix, Segment, Segmentation, TransitionModel};

use crate::error::DataError;

type Result<T> = std::result::Result<T, DataError>;

/// Ordered class names; the position of a name is its class index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassDictionary {
    names: Vec<String>,
}

impl ClassDictionary {
    pub fn new() -> Self {
        ClassDictionary::default()
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut dict = ClassDictionary::new();
        for name in names {
            let trimmed = name.trim();
            if trimmed.is_empty() {
                return Err(DataError::invalid("class names must be non-empty"));
            }
            if dict.index_of(trimmed).is_some() {
                return Err(DataError::invalid(format!("duplicate class name {trimmed:?}")));
            }
            dict.names.push(trimmed.to_string());
        }
        Ok(dict)
    }

    /// Auto-generated names `c0..c{count-1}`.
    pub fn numbered(count: usize) -> Self {
        ClassDictionary {
            names: (0..count).map(|i| format!("c{i}")).collect(),
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Index of `name`, appending it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        match self.index_of(name) {
            Some(i) => i,
            None => {
                self.names.push(name.to_string());
                self.names.len() - 1
            }
        }
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    let value: f64 = cell
        .trim()
        .parse()
        .map_err(|_| DataError::parse(line, format!("expected a number, found {:?}", cell.trim())))?;
    Ok(value)
}

fn parse_finite_cell(cell: &str, line: usize) -> Result<f64> {
    let value = parse_cell(cell, line)?;
    if !value.is_finite() {
        return Err(DataError::parse(
            line,
            format!("non-finite value {:?}", cell.trim()),
        ));
    }
    Ok(value)
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Reads a score file: optional class-name header (any line whose cells are
/// not all numeric), then `T` rows of `C` decimals.
pub fn read_scores(path: impl AsRef<Path>) -> Result<(ScoreMatrix, ClassDictionary)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = numbered_lines(&text).peekable();

    let (first_line, first) = match lines.peek() {
        Some(&(n, l)) => (n, l),
        None => return Err(DataError::invalid("score file is empty")),
    };
    let header_cells: Vec<&str> = first.split(',').collect();
    let is_header = header_cells
        .iter()
        .any(|c| c.trim().parse::<f64>().is_err());
    let mut dict = if is_header {
        lines.next();
        ClassDictionary::from_names(header_cells.iter().map(|s| s.to_string()).collect())
            .map_err(|e| DataError::parse(first_line, e.to_string()))?
    } else {
        ClassDictionary::new()
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = if dict.is_empty() { None } else { Some(dict.len()) };
    for (line, text_row) in lines {
        let cells: Vec<&str> = text_row.split(',').collect();
        if let Some(w) = width {
            if cells.len() != w {
                return Err(DataError::parse(
                    line,
                    format!("expected {w} columns, found {}", cells.len()),
                ));
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for cell in cells {
            row.push(parse_finite_cell(cell, line)?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::invalid("score file has no data rows"));
    }
    let classes = width.unwrap_or(0);
    if classes < 2 {
        return Err(DataError::invalid(format!(
            "score files need at least two classes, found {classes}"
        )));
    }
    if dict.is_empty() {
        dict = ClassDictionary::numbered(classes);
    }
    Ok((ScoreMatrix::from_rows(&rows)?, dict))
}

pub fn write_scores(
    path: impl AsRef<Path>,
    scores: &ScoreMatrix,
    dict: &ClassDictionary,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&dict.names().join(","));
    out.push('\n');
    for t in 0..scores.num_frames() {
        let row: Vec<String> = scores.frame(t).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(std::fs::write(path, out)?)
}

/// Reads a feature file: plain numeric rows, `T x F`, no header.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line, text_row) in numbered_lines(&text) {
        let cells: Vec<&str> = text_row.split(',').collect();
        if let Some(w) = width {
            if cells.len() != w {
                return Err(DataError::parse(
                    line,
                    format!("expected {w} columns, found {}", cells.len()),
                ));
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for cell in cells {
            row.push(parse_finite_cell(cell, line)?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::invalid("feature file has no rows"));
    }
    Ok(FeatureSequence::from_rows(&rows)?)
}

/// Reads a label file (one class name per line), interning names into the
/// dictionary in order of first appearance.
pub fn read_labels(path: impl AsRef<Path>, dict: &mut ClassDictionary) -> Result<LabelSequence> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (line, name) in numbered_lines(&text) {
        let name = name.trim();
        if name.contains(',') {
            return Err(DataError::parse(line, "label lines must hold a single name"));
        }
        labels.push(dict.intern(name));
    }
    if labels.is_empty() {
        return Err(DataError::invalid("label file is empty"));
    }
    Ok(LabelSequence::new(labels))
}

pub fn write_labels(
    path: impl AsRef<Path>,
    labels: &LabelSequence,
    dict: &ClassDictionary,
) -> Result<()> {
    let mut out = String::new();
    for &y in labels.labels() {
        out.push_str(dict.name(y));
        out.push('\n');
    }
    Ok(std::fs::write(path, out)?)
}

/// Reads a segments file (`label,start,duration` per line). Segments must be
/// contiguous from frame 0; violations name the offending line.
pub fn read_segments(path: impl AsRef<Path>, dict: &mut ClassDictionary) -> Result<Segmentation> {
    let text = std::fs::read_to_string(path)?;
    let mut segments = Vec::new();
    let mut cursor = 0usize;
    for (line, row) in numbered_lines(&text) {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 3 {
            return Err(DataError::parse(
                line,
                format!("expected label,start,duration — found {} fields", cells.len()),
            ));
        }
        let label = dict.intern(cells[0].trim());
        let start: usize = cells[1]
            .trim()
            .parse()
            .map_err(|_| DataError::parse(line, format!("bad start {:?}", cells[1].trim())))?;
        let duration: usize = cells[2]
            .trim()
            .parse()
            .map_err(|_| DataError::parse(line, format!("bad duration {:?}", cells[2].trim())))?;
        if duration == 0 {
            return Err(DataError::parse(line, "duration must be at least 1"));
        }
        if start != cursor {
            return Err(DataError::parse(
                line,
                format!("segment starts at {start} but the previous one ends at {cursor}"),
            ));
        }
        cursor += duration;
        segments.push(Segment::new(label, start, duration));
    }
    if segments.is_empty() {
        return Err(DataError::invalid("segments file is empty"));
    }
    Ok(Segmentation::new(segments)?)
}

pub fn write_segments(
    path: impl AsRef<Path>,
    segmentation: &Segmentation,
    dict: &ClassDictionary,
) -> Result<()> {
    let mut out = String::new();
    for seg in segmentation.segments() {
        writeln!(out, "{},{},{}", dict.name(seg.label), seg.start, seg.duration).unwrap();
    }
    Ok(std::fs::write(path, out)?)
}

/// Reads a transition file with `[TRANSITION]` and `[PRIOR]` sections.
pub fn read_transitions(path: impl AsRef<Path>) -> Result<TransitionModel> {
    let text = std::fs::read_to_string(path)?;
    let sections = split_sections(&text)?;
    let transition_rows = sections
        .iter()
        .find(|s| s.name == "TRANSITION")
        .ok_or_else(|| DataError::invalid("missing [TRANSITION] section"))?;
    let prior_rows = sections
        .iter()
        .find(|s| s.name == "PRIOR")
        .ok_or_else(|| DataError::invalid("missing [PRIOR] section"))?;

    let classes = transition_rows.rows.len();
    let mut log_transition = Vec::with_capacity(classes * classes);
    for (line, row) in &transition_rows.rows {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != classes {
            return Err(DataError::parse(
                *line,
                format!("transition matrix must be square ({classes} columns)"),
            ));
        }
        for cell in cells {
            log_transition.push(parse_log_cell(cell, *line)?);
        }
    }
    if prior_rows.rows.len() != 1 {
        return Err(DataError::invalid("[PRIOR] must hold exactly one row"));
    }
    let (line, row) = &prior_rows.rows[0];
    let mut log_prior = Vec::with_capacity(classes);
    for cell in row.split(',') {
        log_prior.push(parse_log_cell(cell, *line)?);
    }
    Ok(TransitionModel::new(classes, log_transition, log_prior)?)
}

/// Log-domain cell: finite or `-inf` (forbidden).
fn parse_log_cell(cell: &str, line: usize) -> Result<f64> {
    let value = parse_cell(cell, line)?;
    if value.is_nan() || value == f64::INFINITY {
        return Err(DataError::parse(
            line,
            format!("log values must be finite or -inf, found {:?}", cell.trim()),
        ));
    }
    Ok(value)
}

pub fn write_transitions(path: impl AsRef<Path>, model: &TransitionModel) -> Result<()> {
    let classes = model.num_classes();
    let mut out = String::from("[TRANSITION]\n");
    for a in 0..classes {
        let row: Vec<String> = (0..classes)
            .map(|b| format!("{}", model.transition(a, b)))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.push_str("[PRIOR]\n");
    let row: Vec<String> = (0..classes).map(|c| format!("{}", model.prior(c))).collect();
    out.push_str(&row.join(","));
    out.push('\n');
    Ok(std::fs::write(path, out)?)
}

struct Section {
    name: String,
    rows: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (line, row) in numbered_lines(text) {
        let row = row.trim();
        if let Some(name) = row.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            sections.push(Section {
                name: name.to_string(),
                rows: Vec::new(),
            });
        } else {
            match sections.last_mut() {
                Some(section) => section.rows.push((line, row.to_string())),
                None => {
                    return Err(DataError::parse(
                        line,
                        "expected a [SECTION] header before data rows",
                    ))
                }
            }
        }
    }
    if sections.is_empty() {
        return Err(DataError::invalid("file has no sections"));
    }
    Ok(sections)
}

const POTENTIAL_SECTIONS: [&str; 7] = [
    "DATA",
    "PAIR_CLASS",
    "PAIR_DATA",
    "CLASS_PRIOR",
    "BOUNDARY_START",
    "BOUNDARY_END",
    "TEMPORAL_PRIOR",
];

/// Reads a weights checkpoint; the `[CONFIG]` section plus the set of
/// potential sections present reconstruct the [`PotentialConfig`].
pub fn read_weights(path: impl AsRef<Path>) -> Result<(WeightSet, PotentialConfig)> {
    let text = std::fs::read_to_string(path)?;
    let sections = split_sections(&text)?;
    let config_section = sections
        .iter()
        .find(|s| s.name == "CONFIG")
        .ok_or_else(|| DataError::invalid("missing [CONFIG] section"))?;
    if config_section.rows.len() != 1 {
        return Err(DataError::invalid("[CONFIG] must hold exactly one row"));
    }
    let (line, row) = &config_section.rows[0];
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 4 {
        return Err(DataError::parse(
            *line,
            "[CONFIG] row must be classes,features,skip,canonical_length",
        ));
    }
    let parse_dim = |cell: &str| -> Result<usize> {
        cell.trim()
            .parse()
            .map_err(|_| DataError::parse(*line, format!("bad dimension {:?}", cell.trim())))
    };
    let mut cfg = PotentialConfig::new(parse_dim(fields[0])?, parse_dim(fields[1])?);
    cfg.skip = parse_dim(fields[2])?;
    cfg.canonical_length = parse_dim(fields[3])?;

    for section in &sections {
        match section.name.as_str() {
            "CONFIG" => {}
            "DATA" => cfg.data = true,
            "PAIR_CLASS" => cfg.pair_class = true,
            "PAIR_DATA" => cfg.pair_data = true,
            "CLASS_PRIOR" => cfg.class_prior = true,
            "BOUNDARY_START" => cfg.boundary_start = true,
            "BOUNDARY_END" => cfg.boundary_end = true,
            "TEMPORAL_PRIOR" => cfg.temporal_prior = true,
            other => return Err(DataError::invalid(format!("unknown section [{other}]"))),
        }
    }
    cfg.validate()?;

    let mut weights = WeightSet::zeros(&cfg);
    {
        let blocks = weights.blocks_mut();
        for (i, name) in POTENTIAL_SECTIONS.iter().enumerate() {
            let Some(section) = sections.iter().find(|s| &s.name == name) else {
                continue;
            };
            let mut values = Vec::with_capacity(blocks[i].len());
            for (line, row) in &section.rows {
                for cell in row.split(',') {
                    values.push(parse_finite_cell(cell, *line)?);
                }
            }
            if values.len() != blocks[i].len() {
                return Err(DataError::invalid(format!(
                    "section [{name}] holds {} values, expected {}",
                    values.len(),
                    blocks[i].len()
                )));
            }
            *blocks[i] = values;
        }
    }
    Ok((weights, cfg))
}

pub fn write_weights(
    path: impl AsRef<Path>,
    weights: &WeightSet,
    cfg: &PotentialConfig,
) -> Result<()> {
    weights.matches(cfg)?;
    let mut out = String::from("[CONFIG]\n");
    writeln!(
        out,
        "{},{},{},{}",
        cfg.num_classes, cfg.feature_dim, cfg.skip, cfg.canonical_length
    )
    .unwrap();

    // row widths per block, in blocks() order
    let widths = [
        cfg.feature_dim,
        cfg.num_classes,
        cfg.feature_dim,
        cfg.num_classes,
        cfg.num_classes,
        cfg.num_classes,
        cfg.num_classes,
    ];
    for ((name, block), width) in POTENTIAL_SECTIONS.iter().zip(weights.blocks()).zip(widths) {
        if block.is_empty() {
            continue;
        }
        writeln!(out, "[{name}]").unwrap();
        for row in block.chunks(width) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    Ok(std::fs::write(path, out)?)
}
