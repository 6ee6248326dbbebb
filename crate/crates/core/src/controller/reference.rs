//! Reference windows cut from a pose path, and weight-profile selection.

use super::config::MpcConfig;
use super::cost::{ProfileLabel, WeightProfile};
use super::model::{Control, State};
use crate::planner::{align_yaw, PosePath};
use crate::scalar::Real;

/// The `N + 1` reference states and `N` reference controls for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWindow<T> {
    /// Path index the window starts at.
    pub start: usize,
    pub states: Vec<State<T>>,
    pub controls: Vec<Control<T>>,
}

/// Index of the path point closest to `(x, y)`; the earliest wins ties.
pub fn nearest_index<T: Real>(path: &PosePath<T>, x: T, y: T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, p) in path.points.iter().enumerate() {
        let d = (p.x - x).powi(2) + (p.y - y).powi(2);
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Window starting at the path point nearest to `state`, padded with the final point.
/// Reference controls are `(v_ref, 0)` except at the padded terminal stages.
///
/// # Panics
/// If `path` is empty.
pub fn nearest_reference<T: Real>(path: &PosePath<T>, state: &State<T>, horizon: usize, v_ref: T) -> ReferenceWindow<T> {
    let start = nearest_index(path, state.x, state.y).expect("reference path must not be empty");
    window_at(path, start, horizon, v_ref)
}

/// Window starting at path index `start` (clamped to the final point).
///
/// # Panics
/// If `path` is empty.
pub fn window_at<T: Real>(path: &PosePath<T>, start: usize, horizon: usize, v_ref: T) -> ReferenceWindow<T> {
    assert!(!path.is_empty(), "reference path must not be empty");
    let start = start.min(path.points.len() - 1);
    let last = path.points.len() - 1;
    let states = (0..=horizon)
        .map(|i| path.points[(start + i).min(last)].as_state())
        .collect();
    let controls = (0..horizon)
        .map(|i| {
            if start + i < last {
                Control::new(v_ref, T::zero())
            } else {
                Control::zero()
            }
        })
        .collect();
    ReferenceWindow { start, states, controls }
}

/// Picks TURN when any consecutive heading change among the first `turn_lookahead`
/// references exceeds the threshold, STRAIGHT otherwise. The flag reports whether the
/// label differs from `previous`.
pub fn select_weight_profile<T: Real>(
    references: &[State<T>],
    config: &MpcConfig<T>,
    previous: Option<ProfileLabel>,
) -> (WeightProfile<T>, bool) {
    let count = config.turn_lookahead.min(references.len());
    let mut turning = false;
    for pair in references[..count].windows(2) {
        let next = align_yaw(pair[0].yaw, pair[1].yaw);
        if (next - pair[0].yaw).abs() > config.turn_angle_threshold {
            turning = true;
            break;
        }
    }
    let label = if turning { ProfileLabel::Turn } else { ProfileLabel::Straight };
    (*config.profiles.get(label), previous != Some(label))
}
