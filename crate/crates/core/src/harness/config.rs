use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::sequencer::SearchFraction;
use crate::simulator::EpisodeSettings;
use crate::world::ScenarioSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    Ablation,
    Sequencer,
}

/// One experiment: which driver, which maps, and the episode settings shared by every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub map_seeds: Vec<u64>,
    /// `[width, height]` in cells.
    pub grid_size: [usize; 2],
    /// Inclusive `[min, max]` obstacle count.
    pub obstacle_range: [usize; 2],
    /// Intermediate waypoint counts (start and goal excluded). The ablation uses the first.
    pub waypoint_counts: Vec<usize>,
    pub gammas: Vec<SearchFraction>,
    pub repeats: usize,
    pub output_directory: PathBuf,
    /// Base seed for sequencing decisions.
    pub seed: u64,
    #[serde(flatten)]
    pub episode: EpisodeSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let gammas = [0.1, 0.25, 0.5, 0.75, 1.0]
            .into_iter()
            .map(|g| SearchFraction::new(g).expect("valid fraction"))
            .collect();
        Self {
            experiment: ExperimentKind::Ablation,
            map_seeds: (0..10).collect(),
            grid_size: [10, 10],
            obstacle_range: [25, 35],
            waypoint_counts: vec![6],
            gammas,
            repeats: 10,
            output_directory: PathBuf::from("results"),
            seed: 0,
            episode: EpisodeSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        if self.map_seeds.is_empty() {
            return bad("map_seeds must not be empty");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.waypoint_counts.is_empty() {
            return bad("waypoint_counts must not be empty");
        }
        if self.experiment == ExperimentKind::Sequencer && self.gammas.is_empty() {
            return bad("gammas must not be empty");
        }
        let [w, h] = self.grid_size;
        if w == 0 || h == 0 || w * h < 2 {
            return bad("grid_size must hold at least two cells");
        }
        if self.obstacle_range[0] > self.obstacle_range[1] {
            return bad("obstacle_range must be [min, max] with min <= max");
        }
        self.episode
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Map generation parameters for `waypoints` intermediates.
    pub fn scenario(&self, waypoints: usize) -> ScenarioSpec {
        ScenarioSpec {
            width: self.grid_size[0],
            height: self.grid_size[1],
            n_obstacles: self.obstacle_range,
            n_waypoints: waypoints,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let config = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_json(&config.to_json()).unwrap(), config);
    }

    #[test]
    fn partial_document_fills_defaults() {
        let config = ExperimentConfig::from_json(
            r#"{"experiment": "SEQUENCER", "map_seeds": [3, 4], "repeats": 2,
                "gammas": [0.5], "flags": {"turn_correction": true}}"#,
        )
        .unwrap();
        assert_eq!(config.experiment, ExperimentKind::Sequencer);
        assert_eq!(config.map_seeds, vec![3, 4]);
        assert!(config.episode.flags.turn_correction);
        assert_eq!(config.grid_size, [10, 10]);
    }

    #[test]
    fn rejects_empty_seeds_and_zero_repeats() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"map_seeds": []}"#),
            Err(HarnessError::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"repeats": 0}"#),
            Err(HarnessError::Config(_))
        ));
        assert!(ExperimentConfig::from_json(r#"{"gammas": [1.5]}"#).is_err());
    }
}
