use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::collision::{check_collision, leaves_grid};
use super::log::{EpisodeLog, Event, EventKind, Outcome, PathSegment, Sample};
use super::{ArrivalPolicy, FeatureFlags, SimError};
use crate::controller::{
    nearest_index, rk4_step, window_at, select_weight_profile, to_wheel_command, Control, MpcConfig,
    MpcController, MpcProblem, ProfileLabel, State, StateBounds,
};
use crate::geometry::Point2;
use crate::planner::{
    corrective_turn_filter, granularize, raw_path, PosePath, ResolutionMode, ResolutionPolicy,
    TurnCorrectionPolicy,
};
use crate::scalar::wrap_angle;
use crate::sequencer::{decision_seed, SearchFraction, Sequencer};
use crate::world::{build_graph, sense, GridCell, NavGraph, SensorModel, WorldMap};

/// Weight of the soft grid-extent penalty used when the MPC configuration has none.
const GRID_BOUND_WEIGHT: f64 = 50.0;

/// The robot counts as stalled while both wheel rim speeds stay below this (m/s).
const STALL_SPEED: f64 = 0.03;

/// Everything an episode needs besides the map and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeSettings {
    pub flags: FeatureFlags,
    pub mpc: MpcConfig<f64>,
    pub sensor: SensorModel,
    pub arrival: ArrivalPolicy,
    /// Resolutions; the mode follows `flags.adaptive_resolution`.
    pub resolution: ResolutionPolicy,
    /// Threshold; enabling follows `flags.turn_correction`.
    pub turn_correction: TurnCorrectionPolicy,
    pub robot_radius: f64,
    /// Simulated seconds before the episode is abandoned.
    pub timeout: f64,
    /// Record wall-clock compute time per tick. Disabled runs log zero compute time and
    /// are byte-for-byte reproducible.
    pub record_timing: bool,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            flags: FeatureFlags::default(),
            mpc: MpcConfig::default(),
            sensor: SensorModel::default(),
            arrival: ArrivalPolicy::default(),
            resolution: ResolutionPolicy::default(),
            turn_correction: TurnCorrectionPolicy::default(),
            robot_radius: 0.25,
            timeout: 300.0,
            record_timing: true,
        }
    }
}

impl EpisodeSettings {
    pub fn with_flags(&self, flags: FeatureFlags) -> Self {
        Self {
            flags,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.flags.validate()?;
        self.mpc.validate()?;
        let resolution = self.resolution_policy();
        resolution
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        let bad = |msg: &str| Err(SimError::Config(msg.into()));
        if !(self.sensor.radius > 0.0) {
            return bad("sensor radius must be positive");
        }
        if !(self.arrival.position_tolerance > 0.0) {
            return bad("arrival tolerance must be positive");
        }
        if !(self.robot_radius >= 0.0) {
            return bad("robot radius must be non-negative");
        }
        if !(self.timeout > 0.0) {
            return bad("timeout must be positive");
        }
        if self.flags.turn_correction && !(self.turn_correction.threshold > 0.0) {
            return bad("turn-correction threshold must be positive");
        }
        Ok(())
    }

    pub fn resolution_policy(&self) -> ResolutionPolicy {
        ResolutionPolicy {
            mode: if self.flags.adaptive_resolution {
                ResolutionMode::Adaptive
            } else {
                ResolutionMode::Fixed
            },
            ..self.resolution
        }
    }

    pub fn turn_policy(&self) -> TurnCorrectionPolicy {
        TurnCorrectionPolicy {
            enabled: self.flags.turn_correction,
            ..self.turn_correction
        }
    }
}

/// Integrates the true robot: the prediction model itself, without noise. Headings are
/// left unwrapped so replayed controls reproduce a model rollout exactly.
fn plant_step(state: &State<f64>, control: &Control<f64>, h: f64) -> State<f64> {
    rk4_step(state, control, h)
}

/// Applies `controls` open loop through the plant.
pub fn replay_controls(x0: State<f64>, controls: &[Control<f64>], h: f64) -> Vec<State<f64>> {
    let mut out = Vec::with_capacity(controls.len() + 1);
    let mut state = x0;
    out.push(state);
    for u in controls {
        state = plant_step(&state, u, h);
        out.push(state);
    }
    out
}

fn wrapped(state: &State<f64>) -> State<f64> {
    State::new(state.x, state.y, wrap_angle(state.yaw))
}

struct Target {
    cell: GridCell,
    /// Index into the pending list, `None` for the final goal.
    pending_index: Option<usize>,
}

struct Episode<'a> {
    map: &'a WorldMap,
    settings: &'a EpisodeSettings,
    seed: u64,
    sequencer: Sequencer,
    known: BTreeSet<GridCell>,
    graph: NavGraph,
    pending: Vec<GridCell>,
    decisions: usize,
    // cells of the current raw path
    route: BTreeSet<GridCell>,
    log: EpisodeLog,
}

impl Episode<'_> {
    fn choose_target(&mut self, from: GridCell) -> Result<Target, SimError> {
        if self.pending.is_empty() {
            return Ok(Target {
                cell: self.map.goal,
                pending_index: None,
            });
        }
        let points: Vec<Point2<f64>> = self.pending.iter().map(|c| c.center()).collect();
        let seed = decision_seed(self.seed, self.map.seed, 0, self.decisions);
        let r = self
            .sequencer
            .next(from.center(), &points, self.map.goal.center(), seed)?;
        self.decisions += 1;
        Ok(Target {
            cell: self.pending[r.chosen_index],
            pending_index: Some(r.chosen_index),
        })
    }

    fn plan(&mut self, from: GridCell, to: GridCell, policy: &ResolutionPolicy) -> Option<PosePath<f64>> {
        let raw = raw_path(&self.graph, from, to).ok()?;
        self.route = raw.cells.iter().copied().collect();
        let path: PosePath<f64> = granularize(&raw, policy);
        self.log.paths.push(PathSegment {
            from_sample: self.log.samples.len(),
            path: path.clone(),
        });
        Some(path)
    }

    fn event(&mut self, t: f64, kind: EventKind, cell: Option<GridCell>) {
        self.log.events.push(Event { t, kind, cell });
    }
}

/// Runs one closed-loop episode from the map's start cell until the goal is reached
/// after every waypoint, the robot collides, or the timeout expires.
pub fn run_episode(map: &WorldMap, settings: &EpisodeSettings, seed: u64) -> Result<EpisodeLog, SimError> {
    settings.validate()?;
    map.validate()
        .map_err(|e| SimError::Config(e.to_string()))?;

    let mut mpc = settings.mpc.clone();
    if mpc.state_bounds.is_none() {
        mpc.state_bounds = Some(StateBounds {
            x: [0.0, map.width as f64],
            y: [0.0, map.height as f64],
            weight: GRID_BOUND_WEIGHT,
        });
    }
    let h = mpc.step;
    let horizon = mpc.horizon;
    let v_ref = mpc.v_ref;
    let straight = mpc.profiles.straight;
    let mut controller = MpcController::new(mpc.clone())?;
    let resolution = settings.resolution_policy();
    let correction = settings.turn_policy();
    let flags = settings.flags;
    let gamma = flags.gamma.unwrap_or(SearchFraction::FULL);

    let mut ep = Episode {
        map,
        settings,
        seed,
        sequencer: Sequencer::new(flags.sequencer_method, gamma),
        known: BTreeSet::new(),
        graph: build_graph(map, &BTreeSet::new()),
        pending: map.waypoints.clone(),
        decisions: 0,
        route: BTreeSet::new(),
        log: EpisodeLog {
            step: h,
            samples: Vec::new(),
            events: Vec::new(),
            outcome: Outcome::Timeout,
            paths: Vec::new(),
        },
    };

    let start = map.start.center::<f64>();
    let mut plant = State::new(start.x, start.y, 0.0);
    let mut target = ep.choose_target(map.start)?;
    let mut path: Option<PosePath<f64>> = None;
    let mut needs_plan = true;
    let mut first_plan = true;
    let mut label: Option<ProfileLabel> = None;
    // lowest admissible window start on the current path
    let mut floor = 0usize;

    for tick in 0usize.. {
        let t = tick as f64 * h;
        let clock = Instant::now();
        let here = wrapped(&plant);
        let current_cell =
            GridCell::containing(Point2::new(here.x, here.y), map.width, map.height).unwrap_or(map.start);

        let seen = sense(map, &here, &ep.settings.sensor, &ep.known);
        for cell in &seen {
            ep.event(t, EventKind::ObstacleDetected, Some(*cell));
            ep.known.insert(*cell);
            ep.graph.remove(cell);
            // a path that avoids every known obstacle is kept
            if path.is_none() || ep.route.contains(cell) {
                needs_plan = true;
            }
        }

        let target_center = target.cell.center::<f64>();
        if (here.x - target_center.x).hypot(here.y - target_center.y) <= settings.arrival.position_tolerance {
            match target.pending_index {
                None => {
                    ep.event(t, EventKind::GoalReached, Some(target.cell));
                    let wheel = to_wheel_command(&Control::zero(), mpc.d_base, mpc.r_wheel);
                    let compute_s = if settings.record_timing {
                        clock.elapsed().as_secs_f64()
                    } else {
                        0.0
                    };
                    ep.log.samples.push(Sample {
                        t,
                        x: here.x,
                        y: here.y,
                        yaw: here.yaw,
                        v: 0.0,
                        omega: 0.0,
                        v_left: wheel.v_left,
                        v_right: wheel.v_right,
                        ref_x: target_center.x,
                        ref_y: target_center.y,
                        ref_yaw: here.yaw,
                        iterations: 0,
                        converged: true,
                        cost: 0.0,
                        defect: 0.0,
                        profile: label.unwrap_or(ProfileLabel::Straight),
                        compute_s,
                    });
                    ep.log.outcome = Outcome::Success;
                    break;
                }
                Some(i) => {
                    ep.event(t, EventKind::WaypointReached, Some(target.cell));
                    ep.pending.remove(i);
                    target = ep.choose_target(target.cell)?;
                    needs_plan = true;
                }
            }
        }

        if needs_plan {
            path = ep.plan(current_cell, target.cell, &resolution);
            if first_plan {
                if let Some(p) = &path {
                    plant.yaw = p.points[0].yaw_ref;
                }
                first_plan = false;
            } else {
                ep.event(t, EventKind::Replanned, None);
            }
            needs_plan = false;
            floor = 0;
        }
        let here = wrapped(&plant);

        let (control, reference, diagnostics) = match &path {
            Some(p) => {
                let filtered = corrective_turn_filter(p, &here, &correction);
                let nearest = nearest_index(&filtered, here.x, here.y).unwrap_or(0);
                let window = window_at(&filtered, nearest.max(floor), horizon, v_ref);
                let profile = if flags.adaptive_weights {
                    select_weight_profile(&window.states, &mpc, label).0
                } else {
                    straight
                };
                label = Some(profile.label);
                let problem = MpcProblem {
                    x0: here,
                    ref_states: window.states,
                    ref_controls: window.controls,
                    profile,
                };
                let sol = controller.solve(&problem)?;
                let wheel = to_wheel_command(&sol.first_control(), mpc.d_base, mpc.r_wheel);
                let rim = wheel.v_left.abs().max(wheel.v_right.abs()) * mpc.r_wheel;
                // a stalled robot drags its window forward one point per tick
                floor = if rim < STALL_SPEED {
                    window.start + 1
                } else {
                    window.start
                };
                let diag = (sol.iterations, sol.converged, sol.cost, sol.defect_norm, profile.label);
                (sol.first_control(), problem.ref_states[0], diag)
            }
            None => {
                controller.reset();
                let l = label.unwrap_or(ProfileLabel::Straight);
                (Control::zero(), here, (0, false, 0.0, 0.0, l))
            }
        };
        let wheel = to_wheel_command(&control, mpc.d_base, mpc.r_wheel);
        let compute_s = if settings.record_timing {
            clock.elapsed().as_secs_f64()
        } else {
            0.0
        };
        ep.log.samples.push(Sample {
            t,
            x: here.x,
            y: here.y,
            yaw: here.yaw,
            v: control.v,
            omega: control.omega,
            v_left: wheel.v_left,
            v_right: wheel.v_right,
            ref_x: reference.x,
            ref_y: reference.y,
            ref_yaw: reference.yaw,
            iterations: diagnostics.0,
            converged: diagnostics.1,
            cost: diagnostics.2,
            defect: diagnostics.3,
            profile: diagnostics.4,
            compute_s,
        });

        plant = plant_step(&plant, &control, h);
        let next_t = (tick + 1) as f64 * h;
        if check_collision(&plant, &map.obstacles, settings.robot_radius)
            || leaves_grid(&plant, map.width, map.height, settings.robot_radius)
        {
            ep.event(next_t, EventKind::Collision, None);
            ep.log.outcome = Outcome::Collision;
            break;
        }
        if next_t >= settings.timeout {
            ep.event(next_t, EventKind::Timeout, None);
            ep.log.outcome = Outcome::Timeout;
            break;
        }
    }
    Ok(ep.log)
}
