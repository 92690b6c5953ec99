//! Turning selected pairs and triplets into constraints by asking an oracle.
//!
//! The [`Oracle`] trait is the only seam to the outside world: an LLM
//! endpoint, a replay cache, or the ground-truth [`MockOracle`].

mod constraint;
mod mock;
mod parse;
mod prompt;
mod query;

use alloc::string::String;
use alloc::vec::Vec;

use crate::budget::QueryMode;

pub use constraint::{Constraint, ConstraintSet, Insert, Relation, Source};
pub use mock::MockOracle;
pub use parse::{
    parse_edge_response, parse_response, parse_triangle_response, Answer, EdgeAnswer, ParseFailure,
    TriangleAnswer,
};
pub use prompt::{build_edge_prompt, build_triangle_prompt, PromptTemplate, TRIANGLE_OPTIONS};
pub use query::{
    edge_queries, run_edge_queries, run_queries, run_triangle_queries, triangle_queries, QueryOptions,
    QueryOutcome, SkipReason, SkippedQuery,
};

/// One prompt together with the corpus ids it mentions, in prompt order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub mode: QueryMode,
    pub ids: Vec<usize>,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("oracle configuration error: {0}")]
    Config(String),
}

/// Answers prompts with raw text.
pub trait Oracle {
    /// Backend kind, e.g. `mock`, `http-llm` or `cached`.
    fn kind(&self) -> &str;

    /// Model identity used for cache keys.
    fn model(&self) -> &str {
        ""
    }

    fn temperature(&self) -> f64 {
        0.0
    }

    fn answer(&self, query: &Query) -> Result<String, OracleError>;

    /// Answers a batch; results are positionally aligned with `queries`.
    /// Backends may override this to dispatch concurrently.
    fn answer_batch(&self, queries: &[Query]) -> Vec<Result<String, OracleError>> {
        queries.iter().map(|q| self.answer(q)).collect()
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn kind(&self) -> &str {
        (**self).kind()
    }

    fn model(&self) -> &str {
        (**self).model()
    }

    fn temperature(&self) -> f64 {
        (**self).temperature()
    }

    fn answer(&self, query: &Query) -> Result<String, OracleError> {
        (**self).answer(query)
    }

    fn answer_batch(&self, queries: &[Query]) -> Vec<Result<String, OracleError>> {
        (**self).answer_batch(queries)
    }
}

impl<T: Oracle + ?Sized> Oracle for alloc::boxed::Box<T> {
    fn kind(&self) -> &str {
        (**self).kind()
    }

    fn model(&self) -> &str {
        (**self).model()
    }

    fn temperature(&self) -> f64 {
        (**self).temperature()
    }

    fn answer(&self, query: &Query) -> Result<String, OracleError> {
        (**self).answer(query)
    }

    fn answer_batch(&self, queries: &[Query]) -> Vec<Result<String, OracleError>> {
        (**self).answer_batch(queries)
    }
}
