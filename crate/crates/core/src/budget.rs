//! Converting a token budget into a number of pair or triplet queries.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    Edge,
    Triangle,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Edge => "edge",
            QueryMode::Triangle => "triangle",
        }
    }

    /// Texts per query.
    pub fn arity(self) -> usize {
        match self {
            QueryMode::Edge => 2,
            QueryMode::Triangle => 3,
        }
    }

    /// Constraints produced by one answered query.
    pub fn constraints_per_query(self) -> usize {
        match self {
            QueryMode::Edge => 1,
            QueryMode::Triangle => 3,
        }
    }
}

impl core::str::FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(QueryMode::Edge),
            "triangle" => Ok(QueryMode::Triangle),
            other => Err(Error::InvalidParameter(alloc::format!("unknown mode {other:?}"))),
        }
    }
}

fn per_text_budget(budget: u64, mean_tokens: f64, arity: usize) -> Result<usize> {
    if !(mean_tokens > 0.0) || !mean_tokens.is_finite() {
        return Err(Error::NonPositiveMeanTokens(mean_tokens));
    }
    let exact = budget as f64 / (arity as f64 * mean_tokens);
    // absorb representation error of s = Omega / n before flooring
    Ok(libm::floor(exact * (1.0 + 1e-12)) as usize)
}

/// `floor(Q / (2s))`, capped at the number of distinct pairs among `n` texts.
pub fn edge_budget(budget: u64, mean_tokens: f64, n: usize) -> Result<usize> {
    let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    Ok(per_text_budget(budget, mean_tokens, 2)?.min(pairs))
}

/// `floor(Q / (3s))`.
pub fn triangle_budget(budget: u64, mean_tokens: f64) -> Result<usize> {
    per_text_budget(budget, mean_tokens, 3)
}

/// A token budget resolved into a query count for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPlan {
    pub budget: u64,
    pub mean_tokens: f64,
    pub mode: QueryMode,
    pub queries: usize,
}

impl BudgetPlan {
    pub fn new(budget: u64, mean_tokens: f64, n: usize, mode: QueryMode) -> Result<Self> {
        let queries = match mode {
            QueryMode::Edge => edge_budget(budget, mean_tokens, n)?,
            QueryMode::Triangle => triangle_budget(budget, mean_tokens)?,
        };
        Ok(BudgetPlan {
            budget,
            mean_tokens,
            mode,
            queries,
        })
    }

    /// Constraints the plan yields if every query is answered.
    pub fn expected_constraints(&self) -> usize {
        self.queries * self.mode.constraints_per_query()
    }
}
