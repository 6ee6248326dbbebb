use std::collections::BTreeSet;

use crate::controller::State;
use crate::world::GridCell;

/// Distance from `(x, y)` to the closed unit square of `cell`.
fn box_distance(x: f64, y: f64, cell: &GridCell) -> f64 {
    let (x0, y0) = (cell.col as f64, cell.row as f64);
    let dx = (x0 - x).max(0.0).max(x - (x0 + 1.0));
    let dy = (y0 - y).max(0.0).max(y - (y0 + 1.0));
    dx.hypot(dy)
}

/// Whether the robot disc overlaps any obstacle square.
pub fn check_collision(state: &State<f64>, obstacles: &BTreeSet<GridCell>, robot_radius: f64) -> bool {
    obstacles
        .iter()
        .any(|c| box_distance(state.x, state.y, c) < robot_radius)
}

/// Whether the robot disc crosses the outer wall of a `width`×`height` grid.
pub fn leaves_grid(state: &State<f64>, width: usize, height: usize, robot_radius: f64) -> bool {
    !(state.x - robot_radius >= 0.0
        && state.y - robot_radius >= 0.0
        && state.x + robot_radius <= width as f64
        && state.y + robot_radius <= height as f64)
}
