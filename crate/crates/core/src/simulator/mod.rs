//! Deterministic closed-loop episodes: sense, update the graph, sequence, plan, control
//! and integrate the robot at a fixed period.

mod collision;
mod episode;
mod log;

pub use collision::{check_collision, leaves_grid};
pub use episode::{replay_controls, run_episode, EpisodeSettings};
pub use log::{
    read_log, sidecar_path, write_log, EpisodeLog, Event, EventKind, Outcome, PathSegment, Sample,
    EPISODE_CSV_HEADER,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::ControlError;
use crate::sequencer::{Method, SearchFraction, SequencerError};

/// Toggles for the ablation grid plus the sequencing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureFlags {
    pub adaptive_resolution: bool,
    pub turn_correction: bool,
    pub adaptive_weights: bool,
    pub sequencer_method: Method,
    /// Required by, and only allowed with, the probabilistic method.
    pub gamma: Option<SearchFraction>,
}

impl Default for FeatureFlags {
    fn default() -> Self {
        Self {
            adaptive_resolution: false,
            turn_correction: false,
            adaptive_weights: false,
            sequencer_method: Method::Bcp,
            gamma: None,
        }
    }
}

impl FeatureFlags {
    pub fn all(on: bool) -> Self {
        Self {
            adaptive_resolution: on,
            turn_correction: on,
            adaptive_weights: on,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let probabilistic = self.sequencer_method == Method::Probabilistic;
        if probabilistic != self.gamma.is_some() {
            return Err(SimError::Config(
                "gamma must be set exactly when the sequencer method is PROBABILISTIC".into(),
            ));
        }
        Ok(())
    }
}

/// When a target counts as reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalPolicy {
    pub position_tolerance: f64,
}

impl Default for ArrivalPolicy {
    fn default() -> Self {
        Self {
            position_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid episode configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Sequencer(#[from] SequencerError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed episode log {path}: {message}")]
    MalformedLog { path: String, message: String },
}
