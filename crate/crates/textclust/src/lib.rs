//! File formats, oracle backends and the end-to-end pipeline around
//! `textclust-core`.

pub mod cache;
pub mod config;
pub mod error;
pub mod http;
pub mod io;
pub mod pipeline;
pub mod synthetic;

pub use config::{Budget, OracleKind, PipelineConfig};
pub use error::{Error, Result};
pub use pipeline::{cmd_cluster, cmd_pipeline, cmd_query, cmd_select, ClusterReport, QueryReport, SelectReport};
