use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::controller::State;
use crate::scalar::Real;
use crate::world::{GridCell, NavGraph};

pub const POSE_PATH_CSV_HEADER: &str = "idx,x,y,yaw_ref,is_turn";

/// Cell sequence from the current cell to a target, orthogonally connected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPath {
    pub cells: Vec<GridCell>,
}

impl RawPath {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }
}

/// Shortest path by edge count. Neighbours are expanded East, North, West, South, so
/// ties between equal-length paths are broken deterministically.
pub fn raw_path(graph: &NavGraph, from: GridCell, to: GridCell) -> Result<RawPath, PlanError> {
    for cell in [from, to] {
        if !graph.contains(&cell) {
            return Err(PlanError::NotAVertex(cell));
        }
    }
    let mut parent: BTreeMap<GridCell, GridCell> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    parent.insert(from, from);
    while let Some(cell) = queue.pop_front() {
        if cell == to {
            let mut cells = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[&cur];
                cells.push(cur);
            }
            cells.reverse();
            return Ok(RawPath { cells });
        }
        for n in graph.neighbours(&cell) {
            if !parent.contains_key(&n) {
                parent.insert(n, cell);
                queue.push_back(n);
            }
        }
    }
    Err(PlanError::NoPath { from, to })
}

/// Indices of cells where the incoming and outgoing grid directions differ.
pub fn detect_turns(raw: &RawPath) -> Vec<usize> {
    let dir = |a: &GridCell, b: &GridCell| {
        (b.row as isize - a.row as isize, b.col as isize - a.col as isize)
    };
    raw.cells
        .windows(3)
        .enumerate()
        .filter(|(_, w)| dir(&w[0], &w[1]) != dir(&w[1], &w[2]))
        .map(|(i, _)| i + 1)
        .collect()
}

/// A reference pose: position and the heading toward the next point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosePoint<T> {
    pub x: T,
    pub y: T,
    pub yaw_ref: T,
}

impl<T: Real> PosePoint<T> {
    pub fn new(x: T, y: T, yaw_ref: T) -> Self {
        Self { x, y, yaw_ref }
    }

    pub fn as_state(&self) -> State<T> {
        State::new(self.x, self.y, self.yaw_ref)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosePath<T> {
    pub points: Vec<PosePoint<T>>,
    /// Indices into `points` where the heading changes.
    pub turn_indices: Vec<usize>,
}

impl<T: Real> PosePath<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(POSE_PATH_CSV_HEADER);
        out.push('\n');
        for (i, p) in self.points.iter().enumerate() {
            let turn = u8::from(self.turn_indices.contains(&i));
            let _ = writeln!(out, "{i},{},{},{},{turn}", p.x, p.y, p.yaw_ref);
        }
        out
    }
}

/// Headings toward the next point; the last point repeats the previous heading and a
/// lone point faces east.
pub fn assign_yaw<T: Real>(points: &[(T, T)]) -> PosePath<T> {
    let mut out: Vec<PosePoint<T>> = Vec::with_capacity(points.len());
    for (i, &(x, y)) in points.iter().enumerate() {
        let yaw = match points.get(i + 1) {
            Some(&(nx, ny)) => (ny - y).atan2(nx - x),
            None => out.last().map_or(T::zero(), |p| p.yaw_ref),
        };
        out.push(PosePoint::new(x, y, yaw));
    }
    PosePath {
        points: out,
        turn_indices: Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ResolutionMode {
    Fixed,
    Adaptive,
}

/// Number of interior points inserted per segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolutionPolicy {
    pub mode: ResolutionMode,
    pub r_straight: usize,
    pub r_turn: usize,
    /// Segments on each side of a turn cell that get `r_turn`.
    pub turn_window: usize,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            mode: ResolutionMode::Fixed,
            // 0.2 m and 0.1 m spacing: one point per 0.2 s tick at 1.0 and 0.5 m/s
            r_straight: 4,
            r_turn: 9,
            turn_window: 1,
        }
    }
}

impl ResolutionPolicy {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.mode == ResolutionMode::Adaptive && self.r_turn < self.r_straight {
            return Err(PlanError::InvalidPolicy(format!(
                "r_turn {} below r_straight {}",
                self.r_turn, self.r_straight
            )));
        }
        Ok(())
    }

    /// Resolution of each of the `raw.len() - 1` segments.
    pub fn segment_resolutions(&self, raw: &RawPath) -> Vec<usize> {
        let segments = raw.edge_count();
        let mut r = vec![self.r_straight; segments];
        if self.mode == ResolutionMode::Adaptive {
            for t in detect_turns(raw) {
                let lo = t.saturating_sub(self.turn_window);
                let hi = (t + self.turn_window).min(segments);
                for slot in &mut r[lo..hi] {
                    *slot = self.r_turn;
                }
            }
        }
        r
    }
}

/// Cell centers with `r` evenly spaced points inserted between consecutive centers.
pub fn granularize<T: Real>(raw: &RawPath, policy: &ResolutionPolicy) -> PosePath<T> {
    let resolutions = policy.segment_resolutions(raw);
    let centers: Vec<(T, T)> = raw
        .cells
        .iter()
        .map(|c| {
            let p = c.center::<T>();
            (p.x, p.y)
        })
        .collect();
    let mut points = Vec::with_capacity(centers.len() + resolutions.iter().sum::<usize>());
    let mut cell_index = Vec::with_capacity(centers.len());
    for (j, &(x, y)) in centers.iter().enumerate() {
        cell_index.push(points.len());
        points.push((x, y));
        if let Some(&(nx, ny)) = centers.get(j + 1) {
            let r = resolutions[j];
            let denom = T::from_count(r + 1);
            for k in 1..=r {
                let s = T::from_count(k) / denom;
                points.push((x + (nx - x) * s, y + (ny - y) * s));
            }
        }
    }
    let mut path = assign_yaw(&points);
    path.turn_indices = detect_turns(raw).into_iter().map(|t| cell_index[t]).collect();
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurnCorrectionPolicy {
    pub enabled: bool,
    /// Distance to the upcoming turn beyond which the path is cut at that turn.
    pub threshold: f64,
}

impl Default for TurnCorrectionPolicy {
    fn default() -> Self {
        Self {
            enabled: false,
            threshold: 0.5,
        }
    }
}

/// While the robot is farther than the threshold from the next turn point at or after
/// its nearest path point, drops every point past that turn.
pub fn corrective_turn_filter<T: Real>(
    path: &PosePath<T>,
    state: &State<T>,
    policy: &TurnCorrectionPolicy,
) -> PosePath<T> {
    if !policy.enabled || path.points.is_empty() {
        return path.clone();
    }
    let nearest = crate::controller::nearest_index(path, state.x, state.y).unwrap_or(0);
    let Some(&turn) = path.turn_indices.iter().filter(|&&t| t >= nearest).min() else {
        return path.clone();
    };
    let p = path.points[turn];
    let dist = (p.x - state.x).hypot(p.y - state.y);
    if dist > T::lit(policy.threshold) {
        PosePath {
            points: path.points[..=turn].to_vec(),
            turn_indices: path.turn_indices.iter().copied().filter(|&t| t <= turn).collect(),
        }
    } else {
        path.clone()
    }
}
