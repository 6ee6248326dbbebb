//! Metrics, experiment drivers and report/plot emission.

mod ablation;
mod config;
mod metrics;
mod plot;
mod study;

pub use ablation::{
    ablation_flags, l_corridor_corpus, l_corridor_map, run_ablation, run_grid, AblationReport,
    AblationRow, EpisodeRun, ABLATION_CSV_HEADER,
};
pub use config::{ExperimentConfig, ExperimentKind};
pub use metrics::{
    average_jerk, compute_frequency, cross_track_error, jerk_metrics, rms_polyline_distance,
    traversal_time, MetricsReport,
};
pub use plot::{line_plot_svg, trajectory_svg, Series};
pub use study::{
    mean_retained_optimal, run_sequencer_study, SequencerStudy, StudyRow, STUDY_CSV_HEADER,
};

use std::path::Path;

use thiserror::Error;

use crate::simulator::SimError;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("episode log has no reference path")]
    NoReferencePath,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}
