//! Metrics, datasets, benchmarks and trace replay.

mod bench;
mod dataset;
mod metrics;
mod trace;

use thiserror::Error;

pub use bench::{
    run_benchmark, summarize, BenchConfig, BenchResult, Benchmark, BenchmarkSummary, Method, NoiseMode, Run, TaskSetRef,
};
pub use dataset::{generate_scenes, generate_tasks};
pub use metrics::{accuracy, bootstrap_ci, shift, spl, sspl, EpisodeRecord};
pub use trace::{
    render, replay, replay_episode, Divergence, ReplayReport, TraceEpisode, TraceFile, TraceHeader, TRACE_FORMAT,
    TRACE_VERSION,
};

use crate::metapolicy::MetaError;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no episode records")]
    Empty,
    #[error("baseline accuracy {0} is outside [0, 1)")]
    InvalidBaseline(f64),
    #[error("missing artifact: {0}")]
    Missing(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
