pub mod brw;
pub mod export;
pub mod ibs;
pub mod kg;
pub mod quality;
pub mod rgcn;
pub mod sparql;
pub mod task;

use kg::{KgError, VertexId};
use task::TaskError;

/// Errors shared by the sampling engines.
#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("task resolves to an empty target set")]
    EmptyTargetSet,
    #[error("target {0} listed more than once")]
    DuplicateTarget(VertexId),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Kg(#[from] KgError),
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/tasks.md")]
    mod tasks {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/sparql.md")]
    mod sparql {}
    #[doc = include_str!("../../../book/src/quality.md")]
    mod quality {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/export.md")]
    mod export {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
