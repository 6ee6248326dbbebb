use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::{write_file, ExperimentConfig, HarnessError, MetricsReport};
use crate::simulator::{run_episode, write_log, EpisodeLog, FeatureFlags, Outcome};
use crate::world::{GridCell, WorldMap};

pub const ABLATION_CSV_HEADER: &str =
    "adaptive_resolution,turn_correction,adaptive_weights,cte_rms,j_lin,j_ang,traversal_s,compute_hz,success_rate";

/// The eight on/off combinations of the three path-shaping features, all-off first.
pub fn ablation_flags(base: FeatureFlags) -> Vec<FeatureFlags> {
    (0..8u8)
        .map(|bits| FeatureFlags {
            adaptive_resolution: bits & 4 != 0,
            turn_correction: bits & 2 != 0,
            adaptive_weights: bits & 1 != 0,
            ..base
        })
        .collect()
}

/// One episode of the grid.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub flags: FeatureFlags,
    pub map_seed: u64,
    pub result: Result<(EpisodeLog, MetricsReport), String>,
}

/// Per-combination means across maps. Episodes that failed to run count against the
/// success rate and are otherwise left out.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub flags: FeatureFlags,
    pub episodes: usize,
    pub errors: Vec<String>,
    pub cte_rms: Option<f64>,
    pub j_lin: Option<f64>,
    pub j_ang: Option<f64>,
    /// Mean over successful episodes only.
    pub traversal_s: Option<f64>,
    pub compute_hz: Option<f64>,
    pub success_rate: f64,
    pub collisions: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl AblationRow {
    pub fn from_runs(flags: FeatureFlags, runs: &[&EpisodeRun]) -> Self {
        let reports: Vec<&MetricsReport> = runs
            .iter()
            .filter_map(|r| r.result.as_ref().ok().map(|(_, m)| m))
            .collect();
        let errors = runs
            .iter()
            .filter_map(|r| r.result.as_ref().err().map(|e| format!("seed {}: {e}", r.map_seed)))
            .collect();
        let successes = reports.iter().filter(|m| m.outcome == Outcome::Success).count();
        Self {
            flags,
            episodes: runs.len(),
            errors,
            cte_rms: mean(reports.iter().map(|m| m.cte_rms)),
            j_lin: mean(reports.iter().map(|m| m.j_lin)),
            j_ang: mean(reports.iter().map(|m| m.j_ang)),
            traversal_s: mean(reports.iter().filter_map(|m| m.traversal_time)),
            compute_hz: mean(reports.iter().filter_map(|m| m.mean_compute_hz)),
            success_rate: if runs.is_empty() {
                0.0
            } else {
                successes as f64 / runs.len() as f64
            },
            collisions: reports.iter().filter(|m| m.outcome == Outcome::Collision).count(),
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.flags.adaptive_resolution,
            self.flags.turn_correction,
            self.flags.adaptive_weights,
            opt(self.cte_rms),
            opt(self.j_lin),
            opt(self.j_ang),
            opt(self.traversal_s),
            opt(self.compute_hz),
            self.success_rate
        )
    }
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub runs: Vec<EpisodeRun>,
}

impl AblationReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{ABLATION_CSV_HEADER}\n");
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    /// Fixed-width table with three decimals.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"));
        let on = |b: bool| if b { "on" } else { "off" };
        let mut out = format!(
            "{:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>11} {:>10} {:>8}\n",
            "res", "turn", "wts", "cte_rms", "j_lin", "j_ang", "traversal_s", "compute_hz", "success"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>11} {:>10} {:>8.3}",
                on(r.flags.adaptive_resolution),
                on(r.flags.turn_correction),
                on(r.flags.adaptive_weights),
                opt(r.cte_rms),
                opt(r.j_lin),
                opt(r.j_ang),
                opt(r.traversal_s),
                opt(r.compute_hz),
                r.success_rate
            );
            for e in &r.errors {
                let _ = writeln!(out, "      error: {e}");
            }
        }
        out
    }

    /// Writes `ablation.csv` and one log (plus sidecar) per episode under `episodes/`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        write_file(&dir.join("ablation.csv"), &self.to_csv())?;
        let episodes = dir.join("episodes");
        std::fs::create_dir_all(&episodes).map_err(|source| HarnessError::Io {
            path: episodes.display().to_string(),
            source,
        })?;
        for run in &self.runs {
            if let Ok((log, _)) = &run.result {
                let f = run.flags;
                let name = format!(
                    "res{}_turn{}_wts{}_seed{}.csv",
                    u8::from(f.adaptive_resolution),
                    u8::from(f.turn_correction),
                    u8::from(f.adaptive_weights),
                    run.map_seed
                );
                write_log(log, &episodes.join(name))?;
            }
        }
        Ok(())
    }
}

/// Runs every `(flags, map)` pair on a pool of `jobs` threads (0 picks the default).
/// Results come back in input order.
pub fn run_grid(
    maps: &[WorldMap],
    config: &ExperimentConfig,
    flag_sets: &[FeatureFlags],
    jobs: usize,
) -> Result<Vec<EpisodeRun>, HarnessError> {
    let pairs: Vec<(FeatureFlags, &WorldMap)> = flag_sets
        .iter()
        .flat_map(|f| maps.iter().map(move |m| (*f, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let runs = pool.install(|| {
        pairs
            .par_iter()
            .map(|(flags, map)| {
                let settings = config.episode.with_flags(*flags);
                let result = run_episode(map, &settings, config.seed)
                    .map_err(|e| e.to_string())
                    .and_then(|log| {
                        let report = MetricsReport::from_log(&log).map_err(|e| e.to_string())?;
                        Ok((log, report))
                    });
                EpisodeRun {
                    flags: *flags,
                    map_seed: map.seed,
                    result,
                }
            })
            .collect()
    });
    Ok(runs)
}

/// All eight feature combinations on every configured map, averaged per
/// combination. Episode failures are recorded in their row and do not stop the grid.
pub fn run_ablation(config: &ExperimentConfig, jobs: usize) -> Result<AblationReport, HarnessError> {
    config.validate()?;
    let spec = config.scenario(config.waypoint_counts[0]);
    let maps = config
        .map_seeds
        .iter()
        .map(|&s| spec.generate(s))
        .collect::<Result<Vec<_>, _>>()?;
    let flag_sets = ablation_flags(config.episode.flags);
    let runs = run_grid(&maps, config, &flag_sets, jobs)?;
    let rows = flag_sets
        .iter()
        .map(|f| {
            let mine: Vec<&EpisodeRun> = runs.iter().filter(|r| r.flags == *f).collect();
            AblationRow::from_runs(*f, &mine)
        })
        .collect();
    Ok(AblationReport { rows, runs })
}

/// A single-corner corridor: the free cells are row 0 plus the last column
/// (`east_first`) or column 0 plus the last row, everything else is obstacle. Start is
/// `(0, 0)`, goal the opposite corner, so every path has one turn hugged by obstacles.
pub fn l_corridor_map(width: usize, height: usize, east_first: bool) -> WorldMap {
    let mut obstacles = BTreeSet::new();
    for row in 0..height {
        for col in 0..width {
            let free = if east_first {
                row == 0 || col + 1 == width
            } else {
                col == 0 || row + 1 == height
            };
            if !free {
                obstacles.insert(GridCell::new(row, col));
            }
        }
    }
    WorldMap {
        width,
        height,
        obstacles,
        waypoints: Vec::new(),
        start: GridCell::new(0, 0),
        goal: GridCell::new(height - 1, width - 1),
        seed: 0,
    }
}

/// Both orientations of every corridor with legs of 3 to 8 cells.
pub fn l_corridor_corpus() -> Vec<WorldMap> {
    let mut maps = Vec::new();
    for width in 3..9 {
        for height in 3..9 {
            for east_first in [true, false] {
                let mut map = l_corridor_map(width, height, east_first);
                map.seed = maps.len() as u64;
                maps.push(map);
            }
        }
    }
    maps
}
