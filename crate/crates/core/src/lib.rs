//! Budgeted selection of informative text pairs and triplets, oracle
//! constraint extraction, and weighted constrained clustering.
//!
//! The crate is `no_std` and needs only `alloc`. IO, HTTP oracles and the
//! command-line front end live in the `textclust` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod budget;
pub mod clustering;
pub mod corpus;
pub mod edge_select;
mod error;
pub mod eval;
pub mod index_heap;
pub mod oracle;
pub mod rank;
pub mod triangle_select;
pub mod weighting;

pub use budget::{edge_budget, triangle_budget, BudgetPlan, QueryMode};
pub use clustering::{ClusterAssignment, Clusterer};
pub use corpus::{Corpus, DegreeProfile, EmbeddingMatrix, TextInstance, TokenCounter, WhitespaceTokens};
pub use edge_select::{select_edges, Edge, EdgeSelection};
pub use error::{Error, ErrorKind, Result};
pub use eval::{accuracy, nmi, MetricReport};
pub use rank::RankOrder;
pub use triangle_select::{select_triangles, Triangle, TriangleSelection};
pub use weighting::{Scheme, WeightedConstraintMatrix};
