use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use simpeval_core::corpus::{
    dimension_means, load_instances, load_ratings, means_from_ratings, CorpusManifest, RatedCorpus,
};
use simpeval_core::stats::{build_table, render_table, ScoreTable, Split, TableFormat};
use simpeval_core::{DimensionMeans, Origin, Scale};
use tracing::{info, warn};

use crate::error::{CliError, EXIT_OK};
use crate::plot::write_plots;
use crate::score::ScoreRecord;

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Scores file written by `score`
    #[arg(long)]
    pub scores: PathBuf,

    /// Ratings file (JSON lines)
    #[arg(long)]
    pub ratings: Option<PathBuf>,

    /// Corpus manifest with the rating scale and data paths
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Rating scale when no manifest is given: likert5, continuous100 or MIN:MAX
    #[arg(long)]
    pub scale: Option<String>,

    /// Instances file; needed to restrict the table to one origin
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Which simplifications the table covers: system (default) or human
    #[arg(long)]
    pub split: Option<String>,

    /// Output format: markdown, csv or json
    #[arg(long, default_value = "markdown")]
    pub format: String,

    /// Table output path; a JSON copy is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Directory for SVG scatter plots, one per metric and dimension
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

pub fn parse_scale(text: &str) -> Result<Scale, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "likert5" | "likert" => Ok(Scale::LIKERT_5),
        "continuous100" | "continuous" => Ok(Scale::CONTINUOUS_100),
        other => {
            let (lo, hi) = other
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("unknown scale `{text}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("bad scale bound `{s}`")))
            };
            Scale::new(parse(lo)?, parse(hi)?).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

pub fn load_scores(path: &Path) -> Result<ScoreTable, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
    let mut table = ScoreTable::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScoreRecord = serde_json::from_str(line)
            .map_err(|e| CliError::Fatal(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if let (Some(value), None) = (rec.value, &rec.error) {
            table
                .entry(rec.instance_id)
                .or_default()
                .insert(rec.metric, value);
        }
    }
    Ok(table)
}

struct Inputs {
    scale: Scale,
    ratings: PathBuf,
    instances: Option<PathBuf>,
    expected_per_item: Option<usize>,
}

fn resolve_inputs(args: &CorrelateArgs) -> Result<Inputs, CliError> {
    let manifest = match &args.manifest {
        Some(path) => Some(CorpusManifest::load(path).map_err(CliError::fatal)?),
        None => None,
    };
    let scale = match (&args.scale, &manifest) {
        (Some(s), _) => parse_scale(s)?,
        (None, Some(m)) => m.scale,
        (None, None) => return Err(CliError::Usage("give --manifest or --scale".into())),
    };
    let ratings = args
        .ratings
        .clone()
        .or_else(|| manifest.as_ref().and_then(|m| m.ratings.clone()))
        .ok_or_else(|| CliError::Usage("give --ratings or a manifest listing ratings".into()))?;
    let instances = args
        .input
        .clone()
        .or_else(|| manifest.as_ref().and_then(|m| m.instances.clone()));
    Ok(Inputs {
        scale,
        ratings,
        instances,
        expected_per_item: manifest.and_then(|m| m.ratings_per_item),
    })
}

fn means_for(
    inputs: &Inputs,
    split: Split,
    split_given: bool,
) -> Result<Vec<DimensionMeans>, CliError> {
    let ratings = load_ratings(&inputs.ratings, inputs.scale).map_err(CliError::fatal)?;
    let Some(path) = &inputs.instances else {
        if split_given {
            return Err(CliError::Usage(
                "--split needs --input or a manifest listing instances".into(),
            ));
        }
        return Ok(means_from_ratings(&ratings));
    };
    let instances = load_instances(path).map_err(CliError::fatal)?;
    let corpus = RatedCorpus::new(instances, ratings, inputs.scale).map_err(CliError::fatal)?;
    if let Some(expected) = inputs.expected_per_item {
        for w in corpus.rating_count_warnings(expected) {
            warn!("{w}");
        }
    }
    let origin = match split {
        Split::System => Origin::System,
        Split::Human => Origin::Human,
    };
    let has_origins = corpus
        .instances()
        .iter()
        .any(|i| i.origin != Origin::Unknown);
    let corpus = if has_origins {
        corpus.filter_origin(origin)
    } else {
        corpus
    };
    Ok(dimension_means(&corpus))
}

fn twin_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn run(args: &CorrelateArgs) -> Result<i32, CliError> {
    let split_given = args.split.is_some();
    let split: Split = args
        .split
        .as_deref()
        .unwrap_or("system")
        .parse()
        .map_err(CliError::Usage)?;
    let format: TableFormat = args.format.parse().map_err(CliError::Usage)?;
    let inputs = resolve_inputs(args)?;
    let scores = load_scores(&args.scores)?;
    let means = means_for(&inputs, split, split_given)?;

    let score_ids: BTreeSet<&String> = scores.keys().collect();
    let joined: Vec<DimensionMeans> = means
        .into_iter()
        .filter(|m| score_ids.contains(&m.instance_id))
        .collect();
    if joined.is_empty() {
        return Err(CliError::Fatal(
            "empty join: no instance id has both scores and ratings".into(),
        ));
    }
    info!(instances = joined.len(), "joined scores and ratings");

    let table = build_table(&joined, &scores, split).map_err(CliError::fatal)?;
    let rendered = render_table(&table, format);
    match &args.out {
        Some(path) => {
            fs::write(path, &rendered)
                .map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
            if format != TableFormat::Json {
                let twin = twin_path(path);
                fs::write(&twin, render_table(&table, TableFormat::Json))
                    .map_err(|e| CliError::Fatal(format!("{}: {e}", twin.display())))?;
            }
        }
        None => std::io::stdout()
            .write_all(rendered.as_bytes())
            .map_err(CliError::fatal)?,
    }
    if let Some(dir) = &args.plots {
        let written = write_plots(dir, &joined, &scores).map_err(CliError::fatal)?;
        info!(plots = written, dir = %dir.display(), "wrote scatter plots");
    }
    Ok(EXIT_OK)
}
