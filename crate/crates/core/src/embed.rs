//! Greedy token matching over contextual embeddings (BERTScore-style), used
//! as a standalone metric and as an answer-similarity function.
//!
//! No IDF weighting and no baseline rescaling. Negative cosines clamp to 0,
//! so every score lies in `[0, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{embed_text, Backend, BackendError};
use crate::lexical::{Metric, MetricScore};
use crate::pool::bounded_map;

pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{tokens} tokens but {vectors} vectors")]
    LengthMismatch { tokens: usize, vectors: usize },
    #[error("embedding vectors must be finite and non-empty")]
    BadVector,
    #[error("at least one reference is required")]
    NoReferences,
    #[error("embedding backend failed for `{text}`: {source}")]
    Backend {
        text: String,
        #[source]
        source: BackendError,
    },
}

/// One vector per token, all of the same dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEmbeddings", into = "RawEmbeddings")]
pub struct TokenEmbeddings {
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawEmbeddings {
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<RawEmbeddings> for TokenEmbeddings {
    type Error = EmbedError;

    fn try_from(raw: RawEmbeddings) -> Result<Self, Self::Error> {
        TokenEmbeddings::new(raw.tokens, raw.vectors)
    }
}

impl From<TokenEmbeddings> for RawEmbeddings {
    fn from(e: TokenEmbeddings) -> Self {
        RawEmbeddings {
            tokens: e.tokens,
            vectors: e.vectors,
        }
    }
}

impl TokenEmbeddings {
    pub fn new(tokens: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        if tokens.len() != vectors.len() {
            return Err(EmbedError::LengthMismatch {
                tokens: tokens.len(),
                vectors: vectors.len(),
            });
        }
        if let Some(first) = vectors.first() {
            let dim = first.len();
            if dim == 0 || vectors.iter().flatten().any(|x| !x.is_finite()) {
                return Err(EmbedError::BadVector);
            }
            if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
                return Err(EmbedError::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
        }
        Ok(TokenEmbeddings { tokens, vectors })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Vector dimension; 0 for an empty sequence.
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        PrfScore {
            precision,
            recall,
            f1: f1.clamp(0.0, 1.0),
        }
    }
}

/// Cosine similarity clamped to `[0, 1]`. Bitwise-identical vectors score
/// exactly 1.
pub fn clamped_cosine(a: &[f64], b: &[f64]) -> f64 {
    if a == b && a.iter().any(|&x| x != 0.0) {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Mean over `from` tokens of their best cosine against `to`.
fn mean_best_match(from: &TokenEmbeddings, to: &TokenEmbeddings) -> f64 {
    let total: f64 = from
        .vectors
        .iter()
        .map(|v| {
            to.vectors
                .iter()
                .map(|w| clamped_cosine(v, w))
                .fold(0.0, f64::max)
        })
        .sum();
    total / from.len() as f64
}

/// Precision averages over candidate tokens, recall over reference tokens.
pub fn greedy_match(
    candidate: &TokenEmbeddings,
    reference: &TokenEmbeddings,
) -> Result<PrfScore, EmbedError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(EmbedError::DegenerateInput("empty token sequence"));
    }
    if candidate.dim() != reference.dim() {
        return Err(EmbedError::DimensionMismatch {
            left: candidate.dim(),
            right: reference.dim(),
        });
    }
    Ok(PrfScore::from_pr(
        mean_best_match(candidate, reference),
        mean_best_match(reference, candidate),
    ))
}

/// Embeds each distinct text once, at most `max_in_flight` requests at a time.
fn embed_all(
    texts: &[&str],
    backend: &dyn Backend,
    max_in_flight: usize,
) -> Result<Vec<TokenEmbeddings>, EmbedError> {
    let mut distinct: Vec<&str> = Vec::new();
    let index: Vec<usize> = texts
        .iter()
        .map(|t| match distinct.iter().position(|d| d == t) {
            Some(i) => i,
            None => {
                distinct.push(t);
                distinct.len() - 1
            }
        })
        .collect();
    let embedded = bounded_map(&distinct, max_in_flight, |_, text| {
        embed_text(backend, text).map_err(|source| EmbedError::Backend {
            text: text.to_string(),
            source,
        })
    });
    let embedded: Vec<TokenEmbeddings> = embedded.into_iter().collect::<Result<_, _>>()?;
    Ok(index.into_iter().map(|i| embedded[i].clone()).collect())
}

/// Best greedy-match F1 of `candidate` over all references.
pub fn bertscore<S: AsRef<str>>(
    candidate: &str,
    references: &[S],
    backend: &dyn Backend,
) -> Result<MetricScore, EmbedError> {
    bertscore_bounded(candidate, references, backend, DEFAULT_MAX_IN_FLIGHT)
}

pub fn bertscore_bounded<S: AsRef<str>>(
    candidate: &str,
    references: &[S],
    backend: &dyn Backend,
    max_in_flight: usize,
) -> Result<MetricScore, EmbedError> {
    if references.is_empty() {
        return Err(EmbedError::NoReferences);
    }
    if candidate.trim().is_empty() || references.iter().any(|r| r.as_ref().trim().is_empty()) {
        return Err(EmbedError::DegenerateInput("empty text"));
    }
    let mut texts = vec![candidate];
    texts.extend(references.iter().map(AsRef::as_ref));
    let embedded = embed_all(&texts, backend, max_in_flight)?;
    let (cand, refs) = embedded.split_first().expect("candidate embedded");
    let mut best: f64 = 0.0;
    for r in refs {
        best = best.max(greedy_match(cand, r)?.f1);
    }
    Ok(MetricScore::new(Metric::Bertscore, best))
}

/// Greedy-match F1 between two short answers. A blank answer scores 0.
pub fn answer_similarity_embed(
    answer_a: &str,
    answer_b: &str,
    backend: &dyn Backend,
) -> Result<f64, EmbedError> {
    if answer_a.trim().is_empty() || answer_b.trim().is_empty() {
        return Ok(0.0);
    }
    let embedded = embed_all(&[answer_a, answer_b], backend, 2)?;
    Ok(greedy_match(&embedded[0], &embedded[1])?.f1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(vectors: &[&[f64]]) -> TokenEmbeddings {
        let tokens = (0..vectors.len()).map(|i| format!("t{i}")).collect();
        TokenEmbeddings::new(tokens, vectors.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identical_sequences_score_one() {
        let a = emb(&[&[0.3, -0.2, 0.9], &[0.1, 0.1, 0.1]]);
        let s = greedy_match(&a, &a).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn two_token_hand_case() {
        let cand = emb(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let reference = emb(&[&[1.0, 0.0]]);
        let s = greedy_match(&cand, &reference).unwrap();
        assert_eq!(s.recall, 1.0);
        assert_eq!(s.precision, 0.5);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_and_opposite_vectors_score_zero() {
        let a = emb(&[&[1.0, 0.0]]);
        let b = emb(&[&[0.0, 1.0]]);
        let c = emb(&[&[-1.0, 0.0]]);
        assert_eq!(greedy_match(&a, &b).unwrap().f1, 0.0);
        assert_eq!(greedy_match(&a, &c).unwrap().f1, 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        let a = emb(&[&[1.0, 0.0]]);
        let empty = TokenEmbeddings::new(vec![], vec![]).unwrap();
        assert!(matches!(
            greedy_match(&a, &empty),
            Err(EmbedError::DegenerateInput(_))
        ));
        let three = emb(&[&[1.0, 0.0, 0.0]]);
        assert!(matches!(
            greedy_match(&a, &three),
            Err(EmbedError::DimensionMismatch { .. })
        ));
        assert!(TokenEmbeddings::new(vec!["a".into()], vec![]).is_err());
        assert!(TokenEmbeddings::new(vec!["a".into()], vec![vec![f64::NAN]]).is_err());
        assert!(TokenEmbeddings::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0], vec![1.0, 2.0]]
        )
        .is_err());
    }

    #[test]
    fn swapping_sides_swaps_precision_and_recall() {
        let a = emb(&[&[1.0, 2.0, 0.5], &[-0.3, 0.2, 1.0], &[0.0, 0.7, 0.7]]);
        let b = emb(&[&[0.9, 0.1, 0.4], &[0.2, -1.0, 0.3]]);
        let ab = greedy_match(&a, &b).unwrap();
        let ba = greedy_match(&b, &a).unwrap();
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
    }

    #[test]
    fn serde_validates_shape() {
        let ok: TokenEmbeddings =
            serde_json::from_str(r#"{"tokens":["a"],"vectors":[[1.0,2.0]]}"#).unwrap();
        assert_eq!(ok.dim(), 2);
        assert!(serde_json::from_str::<TokenEmbeddings>(
            r#"{"tokens":["a","b"],"vectors":[[1.0]]}"#
        )
        .is_err());
    }
}
