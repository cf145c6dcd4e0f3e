//! Lexical metrics: sentence-level BLEU, SARI and Flesch-Kincaid grade level.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::{count_syllables, split_sentences, tokenize};

const MAX_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("at least one reference is required")]
    NoReferences,
}

/// Metrics known to the toolkit, in the row order used by correlation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Fkgl,
    Sari,
    Bleu,
    Bertscore,
    Questeval,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Fkgl,
        Metric::Sari,
        Metric::Bleu,
        Metric::Bertscore,
        Metric::Questeval,
    ];

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Fkgl)
    }

    /// Metrics computable from source and candidate alone.
    pub fn reference_less(self) -> bool {
        matches!(self, Metric::Fkgl | Metric::Questeval)
    }

    pub fn needs_backend(self) -> bool {
        matches!(self, Metric::Bertscore | Metric::Questeval)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Fkgl => "fkgl",
            Metric::Sari => "sari",
            Metric::Bleu => "bleu",
            Metric::Bertscore => "bertscore",
            Metric::Questeval => "questeval",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::Fkgl => "FKGL",
            Metric::Sari => "SARI",
            Metric::Bleu => "BLEU",
            Metric::Bertscore => "BERTScore",
            Metric::Questeval => "QuestEval",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// A metric value tagged with its direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: Metric,
    pub value: f64,
    pub higher_is_better: bool,
}

impl MetricScore {
    pub fn new(metric: Metric, value: f64) -> Self {
        MetricScore {
            metric,
            value,
            higher_is_better: metric.higher_is_better(),
        }
    }
}

/// Flesch-Kincaid grade from raw counts.
pub fn fkgl_from_counts(words: usize, sentences: usize, syllables: usize) -> f64 {
    let words = words as f64;
    0.39 * (words / sentences as f64) + 11.8 * (syllables as f64 / words) - 15.59
}

/// Flesch-Kincaid grade level; lower means easier to read.
pub fn fkgl(text: &str) -> Result<MetricScore, MetricError> {
    let words: Vec<String> = tokenize(text)
        .tokens()
        .iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .cloned()
        .collect();
    if words.is_empty() {
        return Err(MetricError::DegenerateInput("text has no words"));
    }
    let sentences = split_sentences(text).len().max(1);
    let syllables: usize = words.iter().map(|w| count_syllables(w)).sum();
    Ok(MetricScore::new(
        Metric::Fkgl,
        fkgl_from_counts(words.len(), sentences, syllables),
    ))
}

fn gram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Sentence-level BLEU-4 against one or more references.
///
/// Precisions are clipped by the maximum count over references. For orders 2..4
/// a zero numerator is smoothed to `1 / (denominator + 1)`. The brevity penalty
/// uses the closest reference length, preferring the shorter one on ties.
pub fn bleu<S: AsRef<str>>(candidate: &str, references: &[S]) -> Result<MetricScore, MetricError> {
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    let cand = tokenize(candidate);
    let cand = cand.tokens();
    if cand.is_empty() {
        return Ok(MetricScore::new(Metric::Bleu, 0.0));
    }
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| tokenize(r.as_ref()).tokens().to_vec())
        .collect();

    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand_counts = gram_counts(cand, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in &refs {
            for (gram, c) in gram_counts(r, n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(c);
            }
        }
        let matched: usize = cand_counts
            .iter()
            .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
        let total = cand.len().saturating_sub(n - 1);
        let precision = if matched > 0 {
            matched as f64 / total as f64
        } else if n == 1 {
            return Ok(MetricScore::new(Metric::Bleu, 0.0));
        } else {
            1.0 / (total as f64 + 1.0)
        };
        log_sum += precision.ln();
    }

    let c = cand.len();
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    let brevity = if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };
    let value = (brevity * (log_sum / MAX_ORDER as f64).exp()).clamp(0.0, 1.0);
    Ok(MetricScore::new(Metric::Bleu, value))
}

/// Per-order SARI components, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariComponents {
    pub add_f1: f64,
    pub keep_f1: f64,
    pub del_precision: f64,
}

/// F1 with the both-empty / one-empty conventions: nothing predicted and
/// nothing expected is a perfect score, one side empty is zero.
fn set_f1(correct: f64, predicted: f64, gold: f64) -> f64 {
    match (predicted > 0.0, gold > 0.0) {
        (false, false) => 1.0,
        (true, true) => {
            let p = correct / predicted;
            let r = correct / gold;
            if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

fn precision_only(correct: f64, predicted: f64, gold: f64) -> f64 {
    match (predicted > 0.0, gold > 0.0) {
        (false, false) => 1.0,
        (true, _) => correct / predicted,
        (false, true) => 0.0,
    }
}

fn sari_order(
    source: &[String],
    candidate: &[String],
    references: &[Vec<String>],
    n: usize,
) -> SariComponents {
    let src = gram_counts(source, n);
    let out = gram_counts(candidate, n);
    let k = references.len() as f64;
    let mut refs: HashMap<&[String], f64> = HashMap::new();
    for r in references {
        for (g, c) in gram_counts(r, n) {
            *refs.entry(g).or_insert(0.0) += c as f64;
        }
    }
    for v in refs.values_mut() {
        *v /= k;
    }
    let src_count = |g: &[String]| src.get(g).copied().unwrap_or(0) as f64;
    let out_count = |g: &[String]| out.get(g).copied().unwrap_or(0) as f64;
    let ref_count = |g: &[String]| refs.get(g).copied().unwrap_or(0.0);

    // ADD works on distinct n-grams.
    let added: HashSet<&[String]> = out
        .keys()
        .copied()
        .filter(|g| !src.contains_key(g))
        .collect();
    let ref_added: HashSet<&[String]> = refs
        .keys()
        .copied()
        .filter(|g| !src.contains_key(g))
        .collect();
    let add_correct = added.intersection(&ref_added).count() as f64;
    let add_f1 = set_f1(add_correct, added.len() as f64, ref_added.len() as f64);

    // KEEP and DELETE work on fractional counts over source n-grams.
    let (mut keep_pred, mut keep_gold, mut keep_correct) = (0.0, 0.0, 0.0);
    let (mut del_pred, mut del_gold, mut del_correct) = (0.0, 0.0, 0.0);
    for &g in src.keys() {
        let i = src_count(g);
        let o = out_count(g);
        let r = ref_count(g);
        let kept = i.min(o);
        keep_pred += kept;
        keep_gold += i.min(r);
        keep_correct += kept.min(r);

        let deleted = (i - o).max(0.0);
        let ref_deleted = (i - r).max(0.0);
        del_pred += deleted;
        del_gold += ref_deleted;
        del_correct += deleted.min(ref_deleted);
    }

    SariComponents {
        add_f1,
        keep_f1: set_f1(keep_correct, keep_pred, keep_gold),
        del_precision: precision_only(del_correct, del_pred, del_gold),
    }
}

/// Per-order components for orders 1..=4.
pub fn sari_components<S: AsRef<str>>(
    source: &str,
    candidate: &str,
    references: &[S],
) -> Result<[SariComponents; MAX_ORDER], MetricError> {
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    let src = tokenize(source);
    if src.is_empty() {
        return Err(MetricError::DegenerateInput("source is empty"));
    }
    let out = tokenize(candidate);
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| tokenize(r.as_ref()).tokens().to_vec())
        .collect();
    Ok(std::array::from_fn(|i| {
        sari_order(src.tokens(), out.tokens(), &refs, i + 1)
    }))
}

/// Sentence-level SARI on a 0..100 scale.
pub fn sari<S: AsRef<str>>(
    source: &str,
    candidate: &str,
    references: &[S],
) -> Result<MetricScore, MetricError> {
    let parts = sari_components(source, candidate, references)?;
    let sum: f64 = parts
        .iter()
        .map(|c| (c.add_f1 + c.keep_f1 + c.del_precision) / 3.0)
        .sum();
    let value = (100.0 * sum / MAX_ORDER as f64).clamp(0.0, 100.0);
    Ok(MetricScore::new(Metric::Sari, value))
}
