use std::fmt::Write as _;
use std::path::Path;

use super::plot::{line_plot_svg, Series};
use super::{write_file, ExperimentConfig, HarnessError};
use crate::geometry::Point2;
use crate::sequencer::{
    accuracy_trial, bcp_next, decision_seed, factorial, retained_optimal_count, Method,
    SearchFraction, SequencerError, TrialRow, COST_TOLERANCE, TRIAL_CSV_HEADER,
};
use crate::world::WorldMap;

pub const STUDY_CSV_HEADER: &str =
    "waypoints,method,gamma,trials,accuracy,mean_elapsed_s,mean_perms_evaluated,mean_tour_cost,mean_retained_optimal,skipped";

/// Aggregate of one `(waypoint count, method, gamma)` cell of the study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub waypoints: usize,
    pub method: Method,
    pub gamma: Option<f64>,
    pub trials: usize,
    pub accuracy: f64,
    pub mean_elapsed_s: f64,
    pub mean_perms_evaluated: f64,
    pub mean_tour_cost: f64,
    /// Probabilistic rows only: retained orderings of the first decision that reach the
    /// optimal cost, averaged over maps and repeats.
    pub mean_retained_optimal: Option<f64>,
    /// Set when the instance size is beyond the enumeration budget.
    pub skipped: Option<String>,
}

impl StudyRow {
    fn skipped(waypoints: usize, method: Method, gamma: Option<f64>, reason: String) -> Self {
        Self {
            waypoints,
            method,
            gamma,
            trials: 0,
            accuracy: 0.0,
            mean_elapsed_s: 0.0,
            mean_perms_evaluated: 0.0,
            mean_tour_cost: 0.0,
            mean_retained_optimal: None,
            skipped: Some(reason),
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        if self.skipped.is_some() {
            return format!(
                "{},{},{},,,,,,,true",
                self.waypoints,
                self.method,
                opt(self.gamma)
            );
        }
        format!(
            "{},{},{},{},{},{},{},{},{},false",
            self.waypoints,
            self.method,
            opt(self.gamma),
            self.trials,
            self.accuracy,
            self.mean_elapsed_s,
            self.mean_perms_evaluated,
            self.mean_tour_cost,
            opt(self.mean_retained_optimal)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SequencerStudy {
    pub rows: Vec<StudyRow>,
    pub trials: Vec<TrialRow>,
}

impl SequencerStudy {
    /// Every trial, in the sequencer module's column layout.
    pub fn trials_csv(&self) -> String {
        let mut out = format!("{TRIAL_CSV_HEADER}\n");
        for t in &self.trials {
            out.push_str(&t.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{STUDY_CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:>9} {:>13} {:>6} {:>9} {:>12} {:>12} {:>10}\n",
            "waypoints", "method", "gamma", "accuracy", "elapsed_ms", "perms", "optimal"
        );
        for r in &self.rows {
            let gamma = r.gamma.map_or_else(|| "-".into(), |g| format!("{g:.2}"));
            if let Some(reason) = &r.skipped {
                let _ = writeln!(out, "{:>9} {:>13} {:>6} skipped: {reason}", r.waypoints, r.method, gamma);
                continue;
            }
            let optimal = r.mean_retained_optimal.map_or_else(|| "-".into(), |v| format!("{v:.3}"));
            let _ = writeln!(
                out,
                "{:>9} {:>13} {:>6} {:>8.1}% {:>12.3} {:>12.3} {:>10}",
                r.waypoints,
                r.method,
                gamma,
                100.0 * r.accuracy,
                1e3 * r.mean_elapsed_s,
                r.mean_perms_evaluated,
                optimal
            );
        }
        out
    }

    fn probabilistic_series(&self, value: impl Fn(&StudyRow) -> Option<f64>) -> Vec<Series> {
        let mut counts: Vec<usize> = self.rows.iter().map(|r| r.waypoints).collect();
        counts.dedup();
        counts
            .into_iter()
            .map(|m| Series {
                label: format!("{m} waypoints"),
                points: self
                    .rows
                    .iter()
                    .filter(|r| r.waypoints == m && r.method == Method::Probabilistic)
                    .filter(|r| r.skipped.is_none())
                    .filter_map(|r| Some((r.gamma?, value(r)?)))
                    .collect(),
            })
            .filter(|s| !s.points.is_empty())
            .collect()
    }

    /// Accuracy, relative computation and optimal-ordering count against gamma.
    pub fn plots(&self) -> Vec<(&'static str, String)> {
        let accuracy = self.probabilistic_series(|r| Some(100.0 * r.accuracy));
        let compute = self.probabilistic_series(|r| {
            Some(100.0 * r.mean_perms_evaluated / factorial(r.waypoints) as f64)
        });
        let optimal = self.probabilistic_series(|r| r.mean_retained_optimal);
        vec![
            (
                "accuracy_vs_gamma.svg",
                line_plot_svg("Probabilistic accuracy", "gamma", "accuracy (%)", &accuracy),
            ),
            (
                "compute_vs_gamma.svg",
                line_plot_svg(
                    "Relative computation",
                    "gamma",
                    "orderings scored (% of m!)",
                    &compute,
                ),
            ),
            (
                "optimal_vs_gamma.svg",
                line_plot_svg(
                    "Optimal orderings retained",
                    "gamma",
                    "mean count",
                    &optimal,
                ),
            ),
        ]
    }

    /// Writes `sequencer.csv`, `sequencer_summary.csv` and the SVG plots.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        write_file(&dir.join("sequencer.csv"), &self.trials_csv())?;
        write_file(&dir.join("sequencer_summary.csv"), &self.summary_csv())?;
        for (name, svg) in self.plots() {
            write_file(&dir.join(name), &svg)?;
        }
        Ok(())
    }
}

/// Mean, over maps and repeats, of how many orderings retained by the first
/// probabilistic decision cost the optimum.
pub fn mean_retained_optimal(
    maps: &[WorldMap],
    gamma: SearchFraction,
    repeats: usize,
    seed: u64,
) -> Result<f64, SequencerError> {
    let mut total = 0u64;
    let mut count = 0usize;
    for map in maps {
        let start: Point2<f64> = map.start.center();
        let goal: Point2<f64> = map.goal.center();
        let pending: Vec<Point2<f64>> = map.waypoints.iter().map(|w| w.center()).collect();
        if pending.is_empty() {
            continue;
        }
        let best = bcp_next(start, &pending, goal)?.tour_cost;
        for repeat in 0..repeats {
            total += retained_optimal_count(
                start,
                &pending,
                goal,
                gamma,
                decision_seed(seed, map.seed, repeat, 0),
                best,
                COST_TOLERANCE,
            )?;
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { total as f64 / count as f64 })
}

fn study_cell(
    maps: &[WorldMap],
    waypoints: usize,
    method: Method,
    gamma: SearchFraction,
    config: &ExperimentConfig,
    trials: &mut Vec<TrialRow>,
) -> Result<StudyRow, SequencerError> {
    let label = (method == Method::Probabilistic).then_some(gamma.value());
    let stats = match accuracy_trial(maps, method, gamma, config.repeats, config.seed) {
        Ok(stats) => stats,
        Err(e @ SequencerError::EnumerationBudgetExceeded { .. }) => {
            return Ok(StudyRow::skipped(waypoints, method, label, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let retained = if method == Method::Probabilistic {
        Some(mean_retained_optimal(maps, gamma, config.repeats, config.seed)?)
    } else {
        None
    };
    trials.extend(stats.rows.iter().cloned());
    Ok(StudyRow {
        waypoints,
        method,
        gamma: label,
        trials: stats.trials,
        accuracy: stats.accuracy,
        mean_elapsed_s: stats.mean_elapsed_s,
        mean_perms_evaluated: stats.mean_perms_evaluated,
        mean_tour_cost: stats.mean_tour_cost,
        mean_retained_optimal: retained,
        skipped: None,
    })
}

/// Accuracy table and gamma curves: every method on every waypoint count, the
/// probabilistic method once per gamma. Instances too large to enumerate are marked
/// skipped.
pub fn run_sequencer_study(config: &ExperimentConfig) -> Result<SequencerStudy, HarnessError> {
    config.validate()?;
    let mut study = SequencerStudy::default();
    for &m in &config.waypoint_counts {
        let spec = config.scenario(m);
        let maps = config
            .map_seeds
            .iter()
            .map(|&s| spec.generate(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cells = vec![(Method::Greedy, SearchFraction::FULL), (Method::Bcp, SearchFraction::FULL)];
        cells.extend(config.gammas.iter().map(|&g| (Method::Probabilistic, g)));
        for (method, gamma) in cells {
            let row = study_cell(&maps, m, method, gamma, config, &mut study.trials)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            study.rows.push(row);
        }
    }
    Ok(study)
}
