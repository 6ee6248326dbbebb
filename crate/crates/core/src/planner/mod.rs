//! Reference path construction: breadth-first grid path, granularization at fixed or
//! turn-adaptive resolution, heading assignment, heading-seam fixing and the
//! corrective-turn filter.

mod path;
mod yaw;

pub use path::{
    assign_yaw, corrective_turn_filter, detect_turns, granularize, raw_path, PosePath, PosePoint,
    RawPath, ResolutionMode, ResolutionPolicy, TurnCorrectionPolicy, POSE_PATH_CSV_HEADER,
};
pub use yaw::{align_yaw, fix_yaw, yaw_residual, YAW_EQ_TOL};

use thiserror::Error;

use crate::world::GridCell;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("no path from [{}, {}] to [{}, {}]", .from.row, .from.col, .to.row, .to.col)]
    NoPath { from: GridCell, to: GridCell },
    #[error("cell [{}, {}] is not a graph vertex", .0.row, .0.col)]
    NotAVertex(GridCell),
    #[error("invalid planner policy: {0}")]
    InvalidPolicy(String),
}
