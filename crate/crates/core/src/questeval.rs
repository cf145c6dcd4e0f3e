//! Question-based meaning preservation without references.
//!
//! Questions are generated from one text, answered against both the source
//! and the candidate, and the two answers compared with a pluggable
//! similarity: token F1 or embedding greedy matching. A question that is
//! unanswerable on either side scores 0. Scores are unweighted means per
//! direction, then averaged over directions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{answer_question, generate_questions, Backend, BackendError, QaAnswer};
use crate::embed::{answer_similarity_embed, EmbedError, DEFAULT_MAX_IN_FLIGHT};
use crate::pool::bounded_map;
use crate::textproc::normalize_answer;

#[derive(Debug, Error)]
pub enum QuestEvalError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
    #[error("no questions were generated")]
    NoProbes,
    #[error("question generation failed ({direction}): {source}")]
    Generation {
        direction: Direction,
        #[source]
        source: BackendError,
    },
    #[error("answering probe {probe} on the {side} failed: {source}")]
    Answering {
        probe: usize,
        side: &'static str,
        #[source]
        source: BackendError,
    },
    #[error("answer similarity for probe {probe} failed: {source}")]
    Similarity {
        probe: usize,
        #[source]
        source: EmbedError,
    },
}

/// Which text the questions are generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FromSource,
    FromCandidate,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::FromSource => "from_source",
            Direction::FromCandidate => "from_candidate",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "from_source" | "source" => Ok(Direction::FromSource),
            "from_candidate" | "candidate" => Ok(Direction::FromCandidate),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    TokenF1,
    Embedding,
}

impl FromStr for Similarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "token_f1" | "f1" => Ok(Similarity::TokenF1),
            "embedding" | "embed" | "bertscore" => Ok(Similarity::Embedding),
            other => Err(format!("unknown similarity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestEvalConfig {
    pub similarity: Similarity,
    pub directions: BTreeSet<Direction>,
    pub questions_per_text: u32,
    /// Upper bound on concurrent backend calls.
    pub max_in_flight: usize,
}

impl Default for QuestEvalConfig {
    fn default() -> Self {
        QuestEvalConfig {
            similarity: Similarity::Embedding,
            directions: [Direction::FromSource, Direction::FromCandidate].into(),
            questions_per_text: 10,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }
}

impl QuestEvalConfig {
    pub fn validate(&self) -> Result<(), QuestEvalError> {
        if self.directions.is_empty() {
            return Err(QuestEvalError::Config(
                "at least one direction is required".into(),
            ));
        }
        if self.questions_per_text == 0 {
            return Err(QuestEvalError::Config(
                "questions_per_text must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Backends used by the pipeline. `embed` is only required for
/// [`Similarity::Embedding`]; when present it is also used to fill
/// [`QaProbe::sim_embed`] for audits.
#[derive(Clone, Copy)]
pub struct QuestEvalBackends<'a> {
    pub qg: &'a dyn Backend,
    pub qa: &'a dyn Backend,
    pub embed: Option<&'a dyn Backend>,
}

impl<'a> QuestEvalBackends<'a> {
    /// All three roles served by one backend.
    pub fn single(backend: &'a dyn Backend) -> Self {
        QuestEvalBackends {
            qg: backend,
            qa: backend,
            embed: Some(backend),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub question: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsweredProbe {
    pub question: String,
    pub direction: Direction,
    pub on_source: QaAnswer,
    pub on_candidate: QaAnswer,
}

/// One audited question. `None` answers are unanswerable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaProbe {
    pub question: String,
    pub direction: Direction,
    pub answer_on_source: Option<String>,
    pub answer_on_candidate: Option<String>,
    pub sim_f1: f64,
    /// Absent when no embedding backend was configured.
    pub sim_embed: Option<f64>,
}

impl QaProbe {
    pub fn similarity(&self, kind: Similarity) -> Option<f64> {
        match kind {
            Similarity::TokenF1 => Some(self.sim_f1),
            Similarity::Embedding => self.sim_embed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestEvalReport {
    pub similarity: Similarity,
    pub probes: Vec<QaProbe>,
    pub per_direction_score: BTreeMap<Direction, f64>,
    pub score: f64,
}

fn text_for<'a>(direction: Direction, source: &'a str, candidate: &'a str) -> &'a str {
    match direction {
        Direction::FromSource => source,
        Direction::FromCandidate => candidate,
    }
}

fn check_texts(source: &str, candidate: &str) -> Result<(), QuestEvalError> {
    if source.trim().is_empty() {
        return Err(QuestEvalError::Precondition("source text is empty"));
    }
    if candidate.trim().is_empty() {
        return Err(QuestEvalError::Precondition("candidate text is empty"));
    }
    Ok(())
}

/// Up to `questions_per_text` distinct questions per enabled direction.
pub fn generate_probes(
    source: &str,
    candidate: &str,
    config: &QuestEvalConfig,
    qg: &dyn Backend,
) -> Result<Vec<Probe>, QuestEvalError> {
    config.validate()?;
    check_texts(source, candidate)?;
    let mut probes = Vec::new();
    for &direction in &config.directions {
        let text = text_for(direction, source, candidate);
        let questions = generate_questions(qg, text, config.questions_per_text)
            .map_err(|source| QuestEvalError::Generation { direction, source })?;
        let mut seen = BTreeSet::new();
        for q in questions {
            if seen.len() == config.questions_per_text as usize {
                break;
            }
            if q.trim().is_empty() || !seen.insert(q.clone()) {
                continue;
            }
            probes.push(Probe {
                question: q,
                direction,
            });
        }
    }
    if probes.is_empty() {
        return Err(QuestEvalError::NoProbes);
    }
    Ok(probes)
}

/// Answers every probe against both texts, keeping probe order.
pub fn answer_probes(
    probes: &[Probe],
    source: &str,
    candidate: &str,
    qa: &dyn Backend,
    max_in_flight: usize,
) -> Result<Vec<AnsweredProbe>, QuestEvalError> {
    let jobs: Vec<(usize, &'static str, &str)> = (0..probes.len())
        .flat_map(|i| [(i, "source", source), (i, "candidate", candidate)])
        .collect();
    let answers = bounded_map(&jobs, max_in_flight, |_, &(i, side, context)| {
        answer_question(qa, &probes[i].question, context).map_err(|source| {
            QuestEvalError::Answering {
                probe: i,
                side,
                source,
            }
        })
    });
    let mut answers = answers.into_iter();
    probes
        .iter()
        .map(|p| {
            let on_source = answers.next().expect("source answer")?;
            let on_candidate = answers.next().expect("candidate answer")?;
            Ok(AnsweredProbe {
                question: p.question.clone(),
                direction: p.direction,
                on_source,
                on_candidate,
            })
        })
        .collect()
}

/// SQuAD-style token F1 over normalized answers (articles kept).
pub fn answer_similarity_f1(answer_a: &str, answer_b: &str) -> f64 {
    let a = normalize_answer(answer_a);
    let b = normalize_answer(answer_b);
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in a.iter() {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut overlap = 0usize;
    for t in b.iter() {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    2.0 * overlap as f64 / (a.len() + b.len()) as f64
}

/// Scores one answered probe. Unanswerable on either side gives 0 for both
/// similarity functions.
pub fn score_probe(
    probe: &AnsweredProbe,
    embed: Option<&dyn Backend>,
) -> Result<QaProbe, EmbedError> {
    let pair = probe.on_source.text().zip(probe.on_candidate.text());
    let (sim_f1, sim_embed) = match pair {
        None => (0.0, embed.map(|_| 0.0)),
        Some((a, b)) => {
            let f1 = answer_similarity_f1(a, b);
            let emb = match embed {
                Some(backend) => Some(answer_similarity_embed(a, b, backend)?),
                None => None,
            };
            (f1, emb)
        }
    };
    Ok(QaProbe {
        question: probe.question.clone(),
        direction: probe.direction,
        answer_on_source: probe.on_source.text().map(str::to_string),
        answer_on_candidate: probe.on_candidate.text().map(str::to_string),
        sim_f1,
        sim_embed,
    })
}

/// Per-direction means over probe similarities, then the mean over
/// directions that produced probes.
pub fn aggregate(
    probes: Vec<QaProbe>,
    similarity: Similarity,
) -> Result<QuestEvalReport, QuestEvalError> {
    let mut sums: BTreeMap<Direction, (f64, usize)> = BTreeMap::new();
    for p in &probes {
        let sim = p.similarity(similarity).ok_or_else(|| {
            QuestEvalError::Config(
                "embedding similarity requested without an embedding backend".into(),
            )
        })?;
        let slot = sums.entry(p.direction).or_insert((0.0, 0));
        slot.0 += sim;
        slot.1 += 1;
    }
    if sums.is_empty() {
        return Err(QuestEvalError::NoProbes);
    }
    let per_direction_score: BTreeMap<Direction, f64> = sums
        .into_iter()
        .map(|(d, (sum, n))| (d, (sum / n as f64).clamp(0.0, 1.0)))
        .collect();
    let score = per_direction_score.values().sum::<f64>() / per_direction_score.len() as f64;
    Ok(QuestEvalReport {
        similarity,
        probes,
        per_direction_score,
        score,
    })
}

/// Full pipeline: generate, answer, score, aggregate. Never reads references.
pub fn questeval_score(
    source: &str,
    candidate: &str,
    config: &QuestEvalConfig,
    backends: QuestEvalBackends<'_>,
) -> Result<QuestEvalReport, QuestEvalError> {
    config.validate()?;
    if config.similarity == Similarity::Embedding && backends.embed.is_none() {
        return Err(QuestEvalError::Config(
            "embedding similarity requires an embedding backend".into(),
        ));
    }
    let probes = generate_probes(source, candidate, config, backends.qg)?;
    let answered = answer_probes(
        &probes,
        source,
        candidate,
        backends.qa,
        config.max_in_flight,
    )?;
    let scored = bounded_map(&answered, config.max_in_flight, |i, p| {
        score_probe(p, backends.embed)
            .map_err(|source| QuestEvalError::Similarity { probe: i, source })
    });
    let scored = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    aggregate(scored, config.similarity)
}
