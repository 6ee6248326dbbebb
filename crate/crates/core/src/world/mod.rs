//! Grid world: map geometry, scenario generation, obstacle sensing and the
//! navigation graph that shrinks as obstacles are discovered.
//!
//! Cells are addressed as `(row, col)`; a cell is a 1 m square whose center
//! sits at `x = col + 0.5`, `y = row + 0.5`.

mod graph;
mod grid;
mod io;
mod sensor;

pub use graph::{build_graph, remove_vertex, NavGraph};
pub use grid::{generate_scenario, is_traversable, GridCell, ScenarioSpec, WorldMap};
pub use io::{load_map, save_map};
pub use sensor::{sense, SensorModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParameters(String),
    #[error("no traversable scenario found after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("malformed map document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("map invariant violated: {0}")]
    InvariantViolation(String),
}
