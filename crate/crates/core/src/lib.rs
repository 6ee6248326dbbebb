//! Multi-waypoint indoor navigation on a grid world: waypoint sequencing, grid path
//! planning with adaptive resolution and corrective turns, a multiple-shooting MPC for a
//! differential-drive robot, a deterministic closed-loop simulator, and the benchmark
//! harness that computes trajectory metrics and runs the experiments.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below fix the
//! scalar to `f64`, which is what the simulator and harness use.

pub mod controller;
pub mod geometry;
pub mod harness;
pub mod planner;
pub mod scalar;
pub mod sequencer;
pub mod simulator;
pub mod world;

pub use scalar::Real;

pub type RobotState = controller::State<f64>;
pub type ControlAction = controller::Control<f64>;
pub type WheelCommand = controller::WheelCommand<f64>;
pub type WeightProfile = controller::WeightProfile<f64>;
pub type MpcConfig = controller::MpcConfig<f64>;
pub type MpcProblem = controller::MpcProblem<f64>;
pub type MpcSolution = controller::MpcSolution<f64>;
pub type PosePath = planner::PosePath<f64>;
pub type PosePoint = planner::PosePoint<f64>;
pub type Point2 = geometry::Point2<f64>;
