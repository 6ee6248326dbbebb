use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GridCell, WorldError, WorldMap};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDocument {
    width: usize,
    height: usize,
    seed: u64,
    start: GridCell,
    goal: GridCell,
    waypoints: Vec<GridCell>,
    obstacles: Vec<GridCell>,
}

/// Serializes a map as a pretty-printed JSON document.
pub fn save_map(map: &WorldMap) -> String {
    let doc = MapDocument {
        width: map.width,
        height: map.height,
        seed: map.seed,
        start: map.start,
        goal: map.goal,
        waypoints: map.waypoints.clone(),
        obstacles: map.obstacles.iter().copied().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("map document serializes")
}

/// Parses and validates a map document.
pub fn load_map(text: &str) -> Result<WorldMap, WorldError> {
    let doc: MapDocument = serde_json::from_str(text).map_err(|e| WorldError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obstacles: BTreeSet<GridCell> = doc.obstacles.iter().copied().collect();
    if obstacles.len() != doc.obstacles.len() {
        return Err(WorldError::InvariantViolation("duplicate obstacle cell".into()));
    }
    let map = WorldMap {
        width: doc.width,
        height: doc.height,
        obstacles,
        waypoints: doc.waypoints,
        start: doc.start,
        goal: doc.goal,
        seed: doc.seed,
    };
    map.validate()?;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::generate_scenario;

    #[test]
    fn round_trip_generated_map() {
        let map = generate_scenario(7, 10, 10, 25..=35, 8).unwrap();
        let text = save_map(&map);
        assert_eq!(load_map(&text).unwrap(), map);
        assert_eq!(save_map(&load_map(&text).unwrap()), text);
    }

    #[test]
    fn missing_goal_is_malformed() {
        let text = r#"{"width": 2, "height": 2, "seed": 0, "start": [0, 0],
            "waypoints": [], "obstacles": []}"#;
        match load_map(text) {
            Err(WorldError::Malformed { message, line, .. }) => {
                assert!(message.contains("goal"), "{message}");
                assert!(line >= 1);
            }
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_obstacle_is_rejected() {
        let text = r#"{"width": 2, "height": 2, "seed": 0, "start": [0, 0], "goal": [1, 1],
            "waypoints": [], "obstacles": [[0, 5]]}"#;
        assert!(matches!(load_map(text), Err(WorldError::InvariantViolation(_))));
    }

    #[test]
    fn waypoint_on_obstacle_is_rejected() {
        let text = r#"{"width": 3, "height": 3, "seed": 0, "start": [0, 0], "goal": [2, 2],
            "waypoints": [[1, 1]], "obstacles": [[1, 1]]}"#;
        assert!(matches!(load_map(text), Err(WorldError::InvariantViolation(_))));
    }
}
