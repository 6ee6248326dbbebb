use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::controller::{Control, ProfileLabel, State};
use crate::planner::PosePath;
use crate::world::GridCell;

pub const EPISODE_CSV_HEADER: &str =
    "t,x,y,yaw,v,omega,vL,vR,ref_x,ref_y,ref_yaw,iterations,converged,cost,defect,profile,compute_s";

/// One control tick: the state at `t`, the command applied over `[t, t + h)`, the
/// reference the controller tracked and the solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
    pub omega: f64,
    #[serde(rename = "vL")]
    pub v_left: f64,
    #[serde(rename = "vR")]
    pub v_right: f64,
    pub ref_x: f64,
    pub ref_y: f64,
    pub ref_yaw: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cost: f64,
    pub defect: f64,
    pub profile: ProfileLabel,
    /// Wall-clock seconds spent on the whole tick; zero when timing is disabled.
    pub compute_s: f64,
}

impl Sample {
    pub fn state(&self) -> State<f64> {
        State::new(self.x, self.y, self.yaw)
    }

    pub fn control(&self) -> Control<f64> {
        Control::new(self.v, self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    WaypointReached,
    ObstacleDetected,
    Replanned,
    Collision,
    GoalReached,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<GridCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

/// A planned reference path, active from sample `from_sample` until the next segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub from_sample: usize,
    pub path: PosePath<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    /// Control period.
    pub step: f64,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub outcome: Outcome,
    /// Unfiltered reference paths in the order they were planned.
    pub paths: Vec<PathSegment>,
}

impl EpisodeLog {
    /// The path that was active when sample `index` was taken.
    pub fn path_for(&self, index: usize) -> Option<&PosePath<f64>> {
        self.paths
            .iter()
            .take_while(|s| s.from_sample <= index)
            .last()
            .map(|s| &s.path)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        if self.samples.is_empty() {
            return format!("{EPISODE_CSV_HEADER}\n");
        }
        for s in &self.samples {
            writer.serialize(s).expect("writing to memory cannot fail");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    step: f64,
    outcome: Outcome,
    events: Vec<Event>,
    paths: Vec<PathSegment>,
}

/// `run.csv` → `run.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn io_error(path: &Path, source: std::io::Error) -> SimError {
    SimError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the sample CSV at `csv_path` and the events/outcome/paths sidecar next to it.
pub fn write_log(log: &EpisodeLog, csv_path: &Path) -> Result<(), SimError> {
    fs::write(csv_path, log.to_csv()).map_err(|e| io_error(csv_path, e))?;
    let sidecar = Sidecar {
        step: log.step,
        outcome: log.outcome,
        events: log.events.clone(),
        paths: log.paths.clone(),
    };
    let json_path = sidecar_path(csv_path);
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&json_path, text).map_err(|e| io_error(&json_path, e))
}

pub fn read_log(csv_path: &Path) -> Result<EpisodeLog, SimError> {
    let malformed = |path: &Path, message: String| SimError::MalformedLog {
        path: path.display().to_string(),
        message,
    };
    let text = fs::read_to_string(csv_path).map_err(|e| io_error(csv_path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| malformed(csv_path, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != EPISODE_CSV_HEADER {
        return Err(malformed(csv_path, format!("unexpected header `{header}`")));
    }
    let samples = reader
        .deserialize()
        .collect::<Result<Vec<Sample>, _>>()
        .map_err(|e| malformed(csv_path, e.to_string()))?;
    let json_path = sidecar_path(csv_path);
    let text = fs::read_to_string(&json_path).map_err(|e| io_error(&json_path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| malformed(&json_path, e.to_string()))?;
    Ok(EpisodeLog {
        step: sidecar.step,
        samples,
        events: sidecar.events,
        outcome: sidecar.outcome,
        paths: sidecar.paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PosePoint;

    fn sample(t: f64) -> Sample {
        Sample {
            t,
            x: 0.5 + t,
            y: 0.5,
            yaw: 0.1,
            v: 0.3,
            omega: -0.2,
            v_left: 1.0,
            v_right: 2.0,
            ref_x: 1.0 / 3.0,
            ref_y: 0.5,
            ref_yaw: 0.0,
            iterations: 4,
            converged: true,
            cost: 1e-12,
            defect: 0.0,
            profile: ProfileLabel::Turn,
            compute_s: 0.0,
        }
    }

    fn log() -> EpisodeLog {
        EpisodeLog {
            step: 0.1,
            samples: vec![sample(0.0), sample(0.1)],
            events: vec![Event {
                t: 0.1,
                kind: EventKind::GoalReached,
                cell: Some(GridCell::new(0, 1)),
            }],
            outcome: Outcome::Success,
            paths: vec![PathSegment {
                from_sample: 0,
                path: PosePath {
                    points: vec![PosePoint::new(0.5, 0.5, 0.0), PosePoint::new(1.5, 0.5, 0.0)],
                    turn_indices: vec![],
                },
            }],
        }
    }

    #[test]
    fn csv_header_and_values() {
        let csv = log().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(EPISODE_CSV_HEADER));
        assert!(lines.next().unwrap().ends_with(",4,true,1e-12,0.0,TURN,0.0"));
    }

    #[test]
    fn round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        write_log(&log(), &path).unwrap();
        assert!(sidecar_path(&path).exists());
        assert_eq!(read_log(&path).unwrap(), log());
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_log(&dir.path().join("nope.csv")), Err(SimError::Io { .. })));
    }

    #[test]
    fn active_path_lookup() {
        let mut l = log();
        let mut second = l.paths[0].clone();
        second.from_sample = 1;
        second.path.points.pop();
        l.paths.push(second);
        assert_eq!(l.path_for(0).unwrap().len(), 2);
        assert_eq!(l.path_for(1).unwrap().len(), 1);
    }
}
