use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use simpeval_core::backends::Backend;
use simpeval_core::corpus::load_instances;
use simpeval_core::embed::bertscore;
use simpeval_core::lexical::{bleu, fkgl, sari, MetricError};
use simpeval_core::questeval::{questeval_score, QuestEvalBackends, QuestEvalConfig};
use simpeval_core::{Instance, Metric, MetricScore};
use tracing::{info, warn};

use crate::backend::BackendArgs;
use crate::error::{CliError, EXIT_OK, EXIT_PARTIAL};
use crate::questeval_args::QuestEvalArgs;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Instances file (JSON lines)
    #[arg(long)]
    pub input: PathBuf,

    /// Metrics, comma separated: fkgl, sari, bleu, bertscore, questeval
    #[arg(long, default_value = "fkgl,sari,bleu")]
    pub metrics: String,

    #[command(flatten)]
    pub backend: BackendArgs,

    #[command(flatten)]
    pub questeval: QuestEvalArgs,

    /// Worker threads; defaults to the number of logical CPUs
    #[arg(long)]
    pub workers: Option<usize>,

    /// Scores file (JSON lines); standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Append to --out, skipping instances already present there
    #[arg(long, requires = "out")]
    pub resume: bool,
}

/// One line of a scores file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub instance_id: String,
    pub metric: Metric,
    pub value: Option<f64>,
    pub higher_is_better: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScoreRecord {
    fn ok(instance_id: &str, score: MetricScore) -> Self {
        ScoreRecord {
            instance_id: instance_id.to_string(),
            metric: score.metric,
            value: Some(score.value),
            higher_is_better: score.higher_is_better,
            error: None,
        }
    }

    fn failed(instance_id: &str, metric: Metric, error: String) -> Self {
        ScoreRecord {
            instance_id: instance_id.to_string(),
            metric,
            value: None,
            higher_is_better: metric.higher_is_better(),
            error: Some(error),
        }
    }
}

pub fn parse_metrics(list: &str) -> Result<BTreeSet<Metric>, CliError> {
    let metrics = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse::<Metric>)
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(CliError::Usage)?;
    if metrics.is_empty() {
        return Err(CliError::Usage("no metrics selected".into()));
    }
    Ok(metrics)
}

struct Scorer<'a> {
    metrics: &'a BTreeSet<Metric>,
    backend: Option<&'a dyn Backend>,
    questeval: &'a QuestEvalConfig,
}

impl Scorer<'_> {
    fn metric(&self, inst: &Instance, metric: Metric) -> Result<MetricScore, String> {
        let needs_refs = !metric.reference_less();
        if needs_refs && inst.references.is_empty() {
            return Err(MetricError::NoReferences.to_string());
        }
        let backend = || {
            self.backend
                .ok_or_else(|| "no backend configured".to_string())
        };
        match metric {
            Metric::Fkgl => fkgl(&inst.candidate).map_err(|e| e.to_string()),
            Metric::Bleu => bleu(&inst.candidate, &inst.references).map_err(|e| e.to_string()),
            Metric::Sari => {
                sari(&inst.source, &inst.candidate, &inst.references).map_err(|e| e.to_string())
            }
            Metric::Bertscore => {
                bertscore(&inst.candidate, &inst.references, backend()?).map_err(|e| e.to_string())
            }
            Metric::Questeval => {
                let report = questeval_score(
                    &inst.source,
                    &inst.candidate,
                    self.questeval,
                    QuestEvalBackends::single(backend()?),
                )
                .map_err(|e| e.to_string())?;
                Ok(MetricScore::new(Metric::Questeval, report.score))
            }
        }
    }

    fn instance(&self, inst: &Instance) -> Vec<ScoreRecord> {
        self.metrics
            .iter()
            .map(|&m| match self.metric(inst, m) {
                Ok(score) => ScoreRecord::ok(&inst.id, score),
                Err(e) => {
                    warn!(instance = %inst.id, metric = %m, error = %e, "metric failed");
                    ScoreRecord::failed(&inst.id, m, e)
                }
            })
            .collect()
    }
}

fn existing_ids(path: &Path) -> Result<BTreeSet<String>, CliError> {
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let file =
        fs::File::open(path).map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
    let mut ids = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::fatal)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScoreRecord = serde_json::from_str(&line)
            .map_err(|e| CliError::Fatal(format!("{}:{}: {e}", path.display(), i + 1)))?;
        ids.insert(rec.instance_id);
    }
    Ok(ids)
}

pub fn run(args: &ScoreArgs) -> Result<i32, CliError> {
    let metrics = parse_metrics(&args.metrics)?;
    let questeval = args.questeval.config()?;
    if let Some(m) = metrics.iter().find(|m| m.needs_backend()) {
        if !args.backend.is_configured() {
            return Err(CliError::Usage(format!(
                "metric `{m}` needs --backend-url or --fixtures"
            )));
        }
    }
    if args.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let backend = if metrics.iter().any(|m| m.needs_backend()) {
        args.backend.build()?
    } else {
        None
    };

    let mut instances = load_instances(&args.input).map_err(CliError::fatal)?;
    let skip = match (&args.out, args.resume) {
        (Some(out), true) => existing_ids(out)?,
        _ => BTreeSet::new(),
    };
    instances.retain(|i| !skip.contains(&i.id));
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    if !skip.is_empty() {
        info!(
            skipped = skip.len(),
            remaining = instances.len(),
            "resuming"
        );
    }

    let scorer = Scorer {
        metrics: &metrics,
        backend: backend.as_deref(),
        questeval: &questeval,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(CliError::fatal)?;
    let per_instance: Vec<Vec<ScoreRecord>> = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| scorer.instance(inst))
            .collect()
    });

    let mut text = String::new();
    for rec in per_instance.iter().flatten() {
        text.push_str(&serde_json::to_string(rec).expect("record serializes"));
        text.push('\n');
    }
    match &args.out {
        Some(path) => {
            let mut file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(args.resume)
                .truncate(!args.resume)
                .open(path)
                .map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
            file.write_all(text.as_bytes()).map_err(CliError::fatal)?;
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(CliError::fatal)?;
        }
    }

    let failed = per_instance
        .iter()
        .filter(|recs| recs.iter().any(|r| r.error.is_some()))
        .count();
    let succeeded = per_instance.len() - failed;
    info!(succeeded, failed, "scoring finished");
    if per_instance.is_empty() {
        return Ok(EXIT_OK);
    }
    if succeeded == 0 {
        return Err(CliError::Fatal(format!("all {failed} instances failed")));
    }
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}
