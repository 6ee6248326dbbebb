use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GridCell, WorldMap};
use crate::controller::State;
use crate::geometry::Point2;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RevealMode {
    /// Every obstacle whose center lies in the closed disc is revealed, occluded or not.
    #[default]
    Disc,
}

/// Idealized range sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub radius: f64,
    #[serde(default)]
    pub reveal_mode: RevealMode,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            radius: 2.5,
            reveal_mode: RevealMode::Disc,
        }
    }
}

/// Obstacles newly visible from `state`: cell center within `radius` (inclusive) and not
/// already known.
pub fn sense<T: Real>(
    map: &WorldMap,
    state: &State<T>,
    sensor: &SensorModel,
    already_known: &BTreeSet<GridCell>,
) -> BTreeSet<GridCell> {
    let here = Point2::new(state.x, state.y);
    let radius = T::lit(sensor.radius);
    map.obstacles
        .iter()
        .filter(|c| !already_known.contains(c))
        .filter(|c| here.distance(&c.center()) <= radius)
        .copied()
        .collect()
}
