//! Receding-horizon tracking controller for a differential-drive robot.
//!
//! The optimal control problem is transcribed by multiple shooting: predicted states
//! are decision variables next to the controls and are tied together by RK4 defect
//! constraints. A single-shooting rollout is kept for cross-checking.

mod config;
mod cost;
mod linalg;
mod model;
mod reference;
mod solver;

pub use config::{MpcConfig, Profiles, SolverConfig};
pub use cost::{state_residual, trajectory_cost, Layout, Objective, ProfileLabel, StateBounds, WeightProfile};
pub use model::{
    ddmr_derivative, rk4_step, rk4_step_with_jacobians, rollout_single_shooting, to_wheel_command,
    Control, State, WheelCommand,
};
pub use reference::{nearest_index, nearest_reference, window_at, select_weight_profile, ReferenceWindow};
pub use solver::{solve_mpc, MpcController, MpcProblem, MpcSolution};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid controller configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
