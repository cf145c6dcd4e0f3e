//! Evaluation instances, human ratings and per-instance dimension means.
//!
//! Both inputs are JSON lines. Instances:
//! `{"id", "source", "candidate", "references"?, "origin"?}`.
//! Ratings: `{"instance_id", "dimension", "annotator_id", "score"}`.
//! A manifest names the two files and the rating scale.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate instance id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {field} is empty")]
    EmptyText { line: usize, field: &'static str },
    #[error("line {line}: score {score} outside [{min}, {max}]")]
    OutOfBounds {
        line: usize,
        score: f64,
        min: f64,
        max: f64,
    },
    #[error("line {line}: unknown dimension `{value}`")]
    UnknownDimension { line: usize, value: String },
    #[error("line {line}: duplicate rating for ({instance_id}, {dimension}, {annotator_id})")]
    DuplicateRating {
        line: usize,
        instance_id: String,
        dimension: Dimension,
        annotator_id: String,
    },
    #[error("rating refers to unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("invalid scale [{min}, {max}]")]
    InvalidScale { min: f64, max: f64 },
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    System,
    Human,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub source: String,
    pub candidate: String,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub origin: Origin,
}

impl Instance {
    fn check(&self, line: usize) -> Result<(), CorpusError> {
        let empty = |field| Err(CorpusError::EmptyText { line, field });
        if self.id.trim().is_empty() {
            return empty("id");
        }
        if self.source.trim().is_empty() {
            return empty("source");
        }
        if self.candidate.trim().is_empty() {
            return empty("candidate");
        }
        if self.references.iter().any(|r| r.trim().is_empty()) {
            return empty("reference");
        }
        Ok(())
    }

    /// Canonical one-line JSON form.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// Rated quality dimensions, in the column order used by correlation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Fluency,
    Simplicity,
    Meaning,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Fluency,
        Dimension::Simplicity,
        Dimension::Meaning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Fluency => "fluency",
            Dimension::Simplicity => "simplicity",
            Dimension::Meaning => "meaning",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Dimension::Fluency => "Fluency",
            Dimension::Simplicity => "Simplicity",
            Dimension::Meaning => "Meaning",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fluency" => Ok(Dimension::Fluency),
            "simplicity" => Ok(Dimension::Simplicity),
            "meaning" | "meaning_preservation" | "meaning-preservation" => Ok(Dimension::Meaning),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    pub const LIKERT_5: Scale = Scale { min: 1.0, max: 5.0 };
    pub const CONTINUOUS_100: Scale = Scale {
        min: 0.0,
        max: 100.0,
    };

    pub fn new(min: f64, max: f64) -> Result<Self, CorpusError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(CorpusError::InvalidScale { min, max });
        }
        Ok(Scale { min, max })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rating {
    pub instance_id: String,
    pub dimension: Dimension,
    pub annotator_id: String,
    pub score: f64,
}

#[derive(Deserialize)]
struct RawRating {
    instance_id: String,
    dimension: String,
    annotator_id: serde_json::Value,
    score: f64,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io)?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    Ok(lines)
}

fn str_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect()
}

fn parse_instance_lines(lines: Vec<(usize, String)>) -> Result<Vec<Instance>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lines.len());
    for (line, text) in lines {
        let inst: Instance = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        inst.check(line)?;
        if !seen.insert(inst.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: inst.id });
        }
        out.push(inst);
    }
    Ok(out)
}

/// Instances in file order. Rejects duplicate ids and empty texts.
pub fn load_instances(path: &Path) -> Result<Vec<Instance>, CorpusError> {
    parse_instance_lines(read_lines(path)?)
}

pub fn parse_instances(text: &str) -> Result<Vec<Instance>, CorpusError> {
    parse_instance_lines(str_lines(text))
}

fn parse_rating_lines(
    lines: Vec<(usize, String)>,
    scale: Scale,
) -> Result<Vec<Rating>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lines.len());
    for (line, text) in lines {
        let raw: RawRating = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        let dimension: Dimension = raw
            .dimension
            .parse()
            .map_err(|value| CorpusError::UnknownDimension { line, value })?;
        if !raw.score.is_finite() || !scale.contains(raw.score) {
            return Err(CorpusError::OutOfBounds {
                line,
                score: raw.score,
                min: scale.min,
                max: scale.max,
            });
        }
        // annotator ids appear as strings or integers in released data
        let annotator_id = match raw.annotator_id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(CorpusError::Parse {
                    line,
                    message: format!("annotator_id must be a string or number, got {other}"),
                })
            }
        };
        let key = (raw.instance_id.clone(), dimension, annotator_id.clone());
        if !seen.insert(key) {
            return Err(CorpusError::DuplicateRating {
                line,
                instance_id: raw.instance_id,
                dimension,
                annotator_id,
            });
        }
        out.push(Rating {
            instance_id: raw.instance_id,
            dimension,
            annotator_id,
            score: raw.score,
        });
    }
    Ok(out)
}

/// Ratings checked against `scale`; dimension names are case-insensitive.
pub fn load_ratings(path: &Path, scale: Scale) -> Result<Vec<Rating>, CorpusError> {
    parse_rating_lines(read_lines(path)?, scale)
}

pub fn parse_ratings(text: &str, scale: Scale) -> Result<Vec<Rating>, CorpusError> {
    parse_rating_lines(str_lines(text), scale)
}

/// Corpus manifest: scale bounds plus optional data file paths, resolved
/// relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub scale: Scale,
    #[serde(default)]
    pub instances: Option<PathBuf>,
    #[serde(default)]
    pub ratings: Option<PathBuf>,
    /// Expected ratings per (instance, dimension); shortfalls are warnings.
    #[serde(default)]
    pub ratings_per_item: Option<usize>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut manifest: CorpusManifest =
            serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
        Scale::new(manifest.scale.min, manifest.scale.max)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut manifest.instances, &mut manifest.ratings]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatedCorpus {
    instances: Vec<Instance>,
    ratings: Vec<Rating>,
    scale: Scale,
}

impl RatedCorpus {
    /// Every rating must reference a known instance and lie within `scale`.
    pub fn new(
        instances: Vec<Instance>,
        ratings: Vec<Rating>,
        scale: Scale,
    ) -> Result<Self, CorpusError> {
        let ids: HashSet<&str> = instances.iter().map(|i| i.id.as_str()).collect();
        if let Some(r) = ratings
            .iter()
            .find(|r| !ids.contains(r.instance_id.as_str()))
        {
            return Err(CorpusError::UnknownInstance(r.instance_id.clone()));
        }
        if let Some(r) = ratings.iter().find(|r| !scale.contains(r.score)) {
            return Err(CorpusError::OutOfBounds {
                line: 0,
                score: r.score,
                min: scale.min,
                max: scale.max,
            });
        }
        Ok(RatedCorpus {
            instances,
            ratings,
            scale,
        })
    }

    pub fn from_manifest(manifest: &CorpusManifest) -> Result<Self, CorpusError> {
        let missing = |what: &str| CorpusError::Parse {
            line: 0,
            message: format!("manifest does not name a {what} file"),
        };
        let instances = load_instances(
            manifest
                .instances
                .as_deref()
                .ok_or_else(|| missing("instances"))?,
        )?;
        let ratings = load_ratings(
            manifest
                .ratings
                .as_deref()
                .ok_or_else(|| missing("ratings"))?,
            manifest.scale,
        )?;
        let corpus = RatedCorpus::new(instances, ratings, manifest.scale)?;
        if let Some(expected) = manifest.ratings_per_item {
            corpus.rating_count_warnings(expected);
        }
        Ok(corpus)
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Restricts to instances of one origin, keeping their ratings.
    pub fn filter_origin(&self, origin: Origin) -> RatedCorpus {
        let instances: Vec<Instance> = self
            .instances
            .iter()
            .filter(|i| i.origin == origin)
            .cloned()
            .collect();
        let ids: HashSet<&str> = instances.iter().map(|i| i.id.as_str()).collect();
        let ratings = self
            .ratings
            .iter()
            .filter(|r| ids.contains(r.instance_id.as_str()))
            .cloned()
            .collect();
        RatedCorpus {
            instances,
            ratings,
            scale: self.scale,
        }
    }

    /// Logs and returns one message per (instance, dimension) whose rating
    /// count differs from `expected`.
    pub fn rating_count_warnings(&self, expected: usize) -> Vec<String> {
        let mut counts: BTreeMap<(&str, Dimension), usize> = BTreeMap::new();
        for inst in &self.instances {
            for d in Dimension::ALL {
                counts.insert((&inst.id, d), 0);
            }
        }
        for r in &self.ratings {
            *counts.entry((&r.instance_id, r.dimension)).or_insert(0) += 1;
        }
        let messages: Vec<String> = counts
            .into_iter()
            .filter(|&(_, n)| n != expected)
            .map(|((id, d), n)| format!("instance {id}: {n} {d} ratings, expected {expected}"))
            .collect();
        for m in &messages {
            warn!("{m}");
        }
        messages
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCounts {
    pub fluency: usize,
    pub simplicity: usize,
    pub meaning: usize,
}

/// Mean rating per dimension for one instance. A dimension without ratings
/// is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionMeans {
    pub instance_id: String,
    pub fluency: Option<f64>,
    pub simplicity: Option<f64>,
    pub meaning: Option<f64>,
    pub counts: DimensionCounts,
}

impl DimensionMeans {
    pub fn get(&self, d: Dimension) -> Option<f64> {
        match d {
            Dimension::Fluency => self.fluency,
            Dimension::Simplicity => self.simplicity,
            Dimension::Meaning => self.meaning,
        }
    }

    pub fn count(&self, d: Dimension) -> usize {
        match d {
            Dimension::Fluency => self.counts.fluency,
            Dimension::Simplicity => self.counts.simplicity,
            Dimension::Meaning => self.counts.meaning,
        }
    }

    pub fn is_complete(&self) -> bool {
        Dimension::ALL.iter().all(|&d| self.get(d).is_some())
    }
}

/// Arithmetic mean per (instance, dimension), ordered by instance id.
/// Scores are summed in sorted order so the result does not depend on the
/// order ratings were given in.
pub fn means_from_ratings(ratings: &[Rating]) -> Vec<DimensionMeans> {
    let mut cells: BTreeMap<&str, HashMap<Dimension, Vec<f64>>> = BTreeMap::new();
    for r in ratings {
        cells
            .entry(&r.instance_id)
            .or_default()
            .entry(r.dimension)
            .or_default()
            .push(r.score);
    }
    cells
        .into_iter()
        .map(|(id, mut dims)| {
            let mut stat = |d: Dimension| -> (Option<f64>, usize) {
                match dims.get_mut(&d) {
                    Some(scores) if !scores.is_empty() => {
                        scores.sort_by(f64::total_cmp);
                        let n = scores.len();
                        (Some(scores.iter().sum::<f64>() / n as f64), n)
                    }
                    _ => (None, 0),
                }
            };
            let (fluency, nf) = stat(Dimension::Fluency);
            let (simplicity, ns) = stat(Dimension::Simplicity);
            let (meaning, nm) = stat(Dimension::Meaning);
            let means = DimensionMeans {
                instance_id: id.to_string(),
                fluency,
                simplicity,
                meaning,
                counts: DimensionCounts {
                    fluency: nf,
                    simplicity: ns,
                    meaning: nm,
                },
            };
            if !means.is_complete() {
                warn!(
                    instance = id,
                    "instance is missing ratings for some dimensions"
                );
            }
            means
        })
        .collect()
}

pub fn dimension_means(corpus: &RatedCorpus) -> Vec<DimensionMeans> {
    means_from_ratings(&corpus.ratings)
}
