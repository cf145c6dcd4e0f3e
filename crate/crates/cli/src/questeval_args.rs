use std::collections::BTreeSet;

use clap::Args;
use simpeval_core::questeval::{Direction, QuestEvalConfig, Similarity};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct QuestEvalArgs {
    /// Question directions, comma separated: source, candidate
    #[arg(long, default_value = "source,candidate")]
    pub questeval_directions: String,

    /// Answer similarity: embedding or token_f1
    #[arg(long, default_value = "embedding")]
    pub questeval_similarity: String,

    /// Questions requested per text
    #[arg(long, default_value_t = 10)]
    pub questeval_questions: u32,
}

impl QuestEvalArgs {
    pub fn config(&self) -> Result<QuestEvalConfig, CliError> {
        let directions = self
            .questeval_directions
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse::<Direction>)
            .collect::<Result<BTreeSet<_>, _>>()
            .map_err(CliError::Usage)?;
        let similarity = self
            .questeval_similarity
            .parse::<Similarity>()
            .map_err(CliError::Usage)?;
        let config = QuestEvalConfig {
            similarity,
            directions,
            questions_per_text: self.questeval_questions,
            ..Default::default()
        };
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}
