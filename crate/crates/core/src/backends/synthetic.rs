//! A deterministic backend built from surface tokens. No model is involved:
//! it exists so pipelines can be exercised and recorded offline.

use sha2::{Digest, Sha256};

use super::{Backend, BackendError, BackendRequest, BackendResponse, QaAnswer};
use crate::embed::TokenEmbeddings;
use crate::textproc::tokenize;

pub const SYNTHETIC_DIM: usize = 16;

/// Embeddings are per-token hashes (the same token always gets the same
/// vector), questions ask about the longer words of the text, and answers
/// are the asked word plus its right neighbour when the word occurs in the
/// context.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticBackend;

fn token_vector(token: &str) -> Vec<f64> {
    let digest = Sha256::digest(token.as_bytes());
    digest
        .iter()
        .take(SYNTHETIC_DIM)
        .map(|&b| (b as f64 + 0.5) / 128.0 - 1.0)
        .collect()
}

fn keyword_of(question: &str) -> Option<String> {
    let body = question.strip_prefix("What about ")?.strip_suffix('?')?;
    Some(body.to_lowercase())
}

impl SyntheticBackend {
    fn embed(&self, text: &str) -> Result<TokenEmbeddings, BackendError> {
        let tokens = tokenize(text).tokens().to_vec();
        let vectors = tokens.iter().map(|t| token_vector(t)).collect();
        TokenEmbeddings::new(tokens, vectors).map_err(|e| BackendError::Protocol(e.to_string()))
    }

    fn questions(&self, text: &str, max_questions: u32) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in tokenize(text).iter() {
            if out.len() == max_questions as usize {
                break;
            }
            if t.chars().count() < 4 || !t.chars().all(char::is_alphabetic) {
                continue;
            }
            let q = format!("What about {t}?");
            if !out.contains(&q) {
                out.push(q);
            }
        }
        out
    }

    fn answer(&self, question: &str, context: &str) -> QaAnswer {
        let Some(word) = keyword_of(question) else {
            return QaAnswer::unanswerable();
        };
        let tokens = tokenize(context);
        let tokens = tokens.tokens();
        match tokens.iter().position(|t| *t == word) {
            None => QaAnswer::unanswerable(),
            Some(i) => match tokens.get(i + 1) {
                Some(next) if next.chars().any(char::is_alphanumeric) => {
                    QaAnswer::answered(format!("{word} {next}"))
                }
                _ => QaAnswer::answered(word),
            },
        }
    }
}

impl Backend for SyntheticBackend {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        Ok(match request {
            BackendRequest::Embed { texts } => BackendResponse::Embed {
                embeddings: texts
                    .iter()
                    .map(|t| self.embed(t))
                    .collect::<Result<_, _>>()?,
            },
            BackendRequest::Qg {
                text,
                max_questions,
            } => BackendResponse::Qg {
                questions: self.questions(text, *max_questions),
            },
            BackendRequest::Qa { question, context } => {
                BackendResponse::Qa(self.answer(question, context))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_token_same_vector() {
        let b = SyntheticBackend;
        let a = b.embed("The river").unwrap();
        let c = b.embed("river bank").unwrap();
        assert_eq!(a.vectors()[1], c.vectors()[0]);
        assert_eq!(a.dim(), SYNTHETIC_DIM);
    }

    #[test]
    fn question_answer_roundtrip() {
        let b = SyntheticBackend;
        let qs = b.questions("The old river flows north.", 10);
        assert_eq!(
            qs,
            vec![
                "What about river?",
                "What about flows?",
                "What about north?"
            ]
        );
        assert_eq!(
            b.answer("What about river?", "A river flows."),
            QaAnswer::answered("river flows")
        );
        assert_eq!(
            b.answer("What about north?", "It goes north."),
            QaAnswer::answered("north")
        );
        assert!(b.answer("What about river?", "A lake.").unanswerable);
        assert_eq!(b.questions("The old river flows north.", 1).len(), 1);
    }
}
