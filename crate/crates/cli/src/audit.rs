use std::fmt::Write as _;

use clap::Args;
use serde::Serialize;
use simpeval_core::questeval::{
    aggregate, questeval_score, QaProbe, QuestEvalBackends, Similarity,
};

use crate::backend::BackendArgs;
use crate::error::{CliError, EXIT_OK};
use crate::questeval_args::QuestEvalArgs;

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Source sentence
    #[arg(long)]
    pub source: String,

    /// Simplified sentence
    #[arg(long)]
    pub candidate: String,

    #[command(flatten)]
    pub backend: BackendArgs,

    #[command(flatten)]
    pub questeval: QuestEvalArgs,

    /// Output format: text or json
    #[arg(long, default_value = "text")]
    pub format: String,
}

#[derive(Debug, Serialize)]
struct AuditReport<'a> {
    source: &'a str,
    candidate: &'a str,
    probes: &'a [QaProbe],
    score_embedding: f64,
    score_token_f1: f64,
}

fn cell(answer: &Option<String>) -> String {
    match answer {
        Some(a) => a.replace('|', "\\|"),
        None => "Unanswerable".into(),
    }
}

fn render_text(report: &AuditReport<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Source: {}", report.source);
    let _ = writeln!(out, "Simplification: {}", report.candidate);
    out.push('\n');
    out.push_str("| Question | Answer on source | Answer on simplification | F1 | Embedding |\n");
    out.push_str("|---|---|---|---:|---:|\n");
    for p in report.probes {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.2} | {:.2} |",
            p.question.replace('|', "\\|"),
            cell(&p.answer_on_source),
            cell(&p.answer_on_candidate),
            p.sim_f1,
            p.sim_embed.unwrap_or(0.0)
        );
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "QuestEval (embedding similarity): {:.4}",
        report.score_embedding
    );
    let _ = writeln!(out, "QuestEval (token F1): {:.4}", report.score_token_f1);
    out
}

pub fn run(args: &AuditArgs) -> Result<i32, CliError> {
    if !args.backend.is_configured() {
        return Err(CliError::Usage(
            "audit-questeval needs --backend-url or --fixtures".into(),
        ));
    }
    let json = match args.format.as_str() {
        "text" => false,
        "json" => true,
        other => return Err(CliError::Usage(format!("unknown format `{other}`"))),
    };
    let mut config = args.questeval.config()?;
    config.similarity = Similarity::Embedding;
    let backend = args.backend.build()?.expect("backend configured");
    let report = questeval_score(
        &args.source,
        &args.candidate,
        &config,
        QuestEvalBackends::single(&*backend),
    )
    .map_err(CliError::fatal)?;
    let f1 = aggregate(report.probes.clone(), Similarity::TokenF1).map_err(CliError::fatal)?;

    let audit = AuditReport {
        source: &args.source,
        candidate: &args.candidate,
        probes: &report.probes,
        score_embedding: report.score,
        score_token_f1: f1.score,
    };
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&audit).expect("report serializes")
        );
    } else {
        print!("{}", render_text(&audit));
    }
    Ok(EXIT_OK)
}
