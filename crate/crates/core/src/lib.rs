//! Evaluation toolkit for sentence simplification: lexical metrics (BLEU,
//! SARI, FKGL), embedding-based token matching, question-based meaning
//! preservation, and correlation analysis against human ratings.

pub mod backends;
pub mod corpus;
pub mod embed;
pub mod lexical;
mod pool;
pub mod questeval;
pub mod stats;
pub mod textproc;

pub use corpus::{Dimension, DimensionMeans, Instance, Origin, RatedCorpus, Rating, Scale};
pub use lexical::{Metric, MetricScore};
