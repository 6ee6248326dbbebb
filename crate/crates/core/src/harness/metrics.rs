//! Trajectory quality metrics computed from an episode log.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{point_polyline_distance, Point2};
use crate::simulator::{EpisodeLog, EventKind, Outcome};

/// Root mean square of the distance from each point to its polyline. Pairs whose
/// polyline is empty are skipped; `None` if nothing remains.
pub fn rms_polyline_distance<'a, I>(pairs: I) -> Option<f64>
where
    I: IntoIterator<Item = (Point2<f64>, &'a [Point2<f64>])>,
{
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, line) in pairs {
        if let Some(d) = point_polyline_distance(p, line) {
            sum += d * d;
            count += 1;
        }
    }
    (count > 0).then(|| (sum / count as f64).sqrt())
}

/// RMS distance from the robot to the unfiltered reference path active at each sample.
pub fn cross_track_error(log: &EpisodeLog) -> Result<f64, HarnessError> {
    if log.samples.is_empty() {
        return Err(HarnessError::TooFewSamples { needed: 1, got: 0 });
    }
    let polylines: Vec<Vec<Point2<f64>>> = log
        .paths
        .iter()
        .map(|s| s.path.points.iter().map(|p| Point2::new(p.x, p.y)).collect())
        .collect();
    let mut segment = 0;
    let mut pairs = Vec::with_capacity(log.samples.len());
    for (i, s) in log.samples.iter().enumerate() {
        while segment + 1 < log.paths.len() && log.paths[segment + 1].from_sample <= i {
            segment += 1;
        }
        if log.paths.get(segment).is_some_and(|p| p.from_sample <= i) {
            pairs.push((Point2::new(s.x, s.y), polylines[segment].as_slice()));
        }
    }
    rms_polyline_distance(pairs).ok_or(HarnessError::NoReferencePath)
}

/// Mean absolute second central difference times the step, over interior samples.
pub fn average_jerk(values: &[f64], dt: f64) -> Result<f64, HarnessError> {
    let n = values.len();
    if n < 3 {
        return Err(HarnessError::TooFewSamples { needed: 3, got: n });
    }
    let sum: f64 = values
        .windows(3)
        .map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (dt * dt)).abs() * dt)
        .sum();
    Ok(sum / (n - 2) as f64)
}

/// `(J_lin, J_ang)` of the applied linear and angular velocities.
pub fn jerk_metrics(log: &EpisodeLog) -> Result<(f64, f64), HarnessError> {
    let v: Vec<f64> = log.samples.iter().map(|s| s.v).collect();
    let w: Vec<f64> = log.samples.iter().map(|s| s.omega).collect();
    Ok((average_jerk(&v, log.step)?, average_jerk(&w, log.step)?))
}

/// Time of the goal arrival, for successful episodes only.
pub fn traversal_time(log: &EpisodeLog) -> Option<f64> {
    if log.outcome != Outcome::Success {
        return None;
    }
    log.events_of(EventKind::GoalReached).next().map(|e| e.t)
}

/// Ticks per second of pipeline compute time; `None` when no time was recorded.
pub fn compute_frequency(log: &EpisodeLog) -> Option<f64> {
    let total: f64 = log.samples.iter().map(|s| s.compute_s).sum();
    (total > 0.0).then(|| log.samples.len() as f64 / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cte_rms: f64,
    pub j_lin: f64,
    pub j_ang: f64,
    pub traversal_time: Option<f64>,
    pub mean_compute_hz: Option<f64>,
    pub outcome: Outcome,
}

impl MetricsReport {
    pub fn from_log(log: &EpisodeLog) -> Result<Self, HarnessError> {
        let (j_lin, j_ang) = jerk_metrics(log)?;
        Ok(Self {
            cte_rms: cross_track_error(log)?,
            j_lin,
            j_ang,
            traversal_time: traversal_time(log),
            mean_compute_hz: compute_frequency(log),
            outcome: log.outcome,
        })
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"));
        format!(
            "outcome: {:?}\ncte_rms: {:.3}\nj_lin: {:.3}\nj_ang: {:.3}\ntraversal_s: {}\ncompute_hz: {}\n",
            self.outcome,
            self.cte_rms,
            self.j_lin,
            self.j_ang,
            opt(self.traversal_time),
            opt(self.mean_compute_hz)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ProfileLabel;
    use crate::planner::{PosePath, PosePoint};
    use crate::simulator::{Event, PathSegment, Sample};
    use proptest::prelude::*;

    fn sample(t: f64, x: f64, y: f64, v: f64, omega: f64, compute_s: f64) -> Sample {
        Sample {
            t,
            x,
            y,
            yaw: 0.0,
            v,
            omega,
            v_left: 0.0,
            v_right: 0.0,
            ref_x: 0.0,
            ref_y: 0.0,
            ref_yaw: 0.0,
            iterations: 0,
            converged: true,
            cost: 0.0,
            defect: 0.0,
            profile: ProfileLabel::Straight,
            compute_s,
        }
    }

    fn x_axis() -> PathSegment {
        PathSegment {
            from_sample: 0,
            path: PosePath {
                points: (0..6).map(|i| PosePoint::new(i as f64, 0.0, 0.0)).collect(),
                turn_indices: vec![],
            },
        }
    }

    fn log_from(samples: Vec<Sample>, outcome: Outcome, events: Vec<Event>) -> EpisodeLog {
        EpisodeLog {
            step: 0.1,
            samples,
            events,
            outcome,
            paths: vec![x_axis()],
        }
    }

    #[test]
    fn cte_examples() {
        let on = (0..5).map(|i| sample(0.1 * i as f64, 0.3 * i as f64, 0.0, 0.0, 0.0, 0.0)).collect();
        assert_eq!(cross_track_error(&log_from(on, Outcome::Success, vec![])).unwrap(), 0.0);
        let offset = (0..5).map(|i| sample(0.1 * i as f64, 0.7 * i as f64 + 0.1, 1.0, 0.0, 0.0, 0.0)).collect();
        assert_eq!(cross_track_error(&log_from(offset, Outcome::Success, vec![])).unwrap(), 1.0);
        let two = vec![sample(0.0, 1.0, 0.0, 0.0, 0.0, 0.0), sample(0.1, 2.5, 1.0, 0.0, 0.0, 0.0)];
        let cte = cross_track_error(&log_from(two, Outcome::Success, vec![])).unwrap();
        assert!((cte - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cte_uses_segments_not_vertices() {
        let mut log = log_from(vec![sample(0.0, 0.5, 0.25, 0.0, 0.0, 0.0)], Outcome::Success, vec![]);
        log.paths[0].path.points = vec![PosePoint::new(0.0, 0.0, 0.0), PosePoint::new(5.0, 0.0, 0.0)];
        assert_eq!(cross_track_error(&log).unwrap(), 0.25);
    }

    #[test]
    fn cte_switches_with_replanned_path() {
        let mut log = log_from(
            vec![sample(0.0, 1.0, 0.0, 0.0, 0.0, 0.0), sample(0.1, 1.0, 0.0, 0.0, 0.0, 0.0)],
            Outcome::Success,
            vec![],
        );
        let mut shifted = x_axis();
        shifted.from_sample = 1;
        shifted.path.points.iter_mut().for_each(|p| p.y = 2.0);
        log.paths.push(shifted);
        assert!((cross_track_error(&log).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jerk_examples() {
        let dt = 0.1;
        assert_eq!(average_jerk(&[0.4; 10], dt).unwrap(), 0.0);
        for n in 3..12 {
            let quad: Vec<f64> = (0..n).map(|i| (i as f64 * dt).powi(2)).collect();
            let j = average_jerk(&quad, dt).unwrap();
            assert!((j - 2.0 * dt).abs() < 1e-12, "{j}");
        }
        assert!((average_jerk(&[0.0, 1.0, 0.0], dt).unwrap() - 20.0).abs() < 1e-12);
        assert!(matches!(average_jerk(&[1.0, 2.0], dt), Err(HarnessError::TooFewSamples { .. })));
    }

    #[test]
    fn quadratic_profile_is_exact_on_dyadic_step() {
        // With a power-of-two step every operation is exact.
        let dt = 0.125;
        let quad: Vec<f64> = (0..9).map(|i| (i as f64 * dt).powi(2)).collect();
        assert_eq!(average_jerk(&quad, dt).unwrap(), 2.0 * dt);
    }

    #[test]
    fn timing_metrics() {
        let samples: Vec<Sample> = (0..100).map(|i| sample(0.1 * i as f64, 0.0, 0.0, 0.0, 0.0, 0.005)).collect();
        let goal = Event {
            t: 42.0,
            kind: EventKind::GoalReached,
            cell: None,
        };
        let log = log_from(samples.clone(), Outcome::Success, vec![goal]);
        assert_eq!(traversal_time(&log), Some(42.0));
        assert!((compute_frequency(&log).unwrap() - 200.0).abs() < 1e-9);
        let timeout = log_from(samples, Outcome::Timeout, vec![]);
        assert_eq!(traversal_time(&timeout), None);
        let report = MetricsReport::from_log(&timeout).unwrap();
        assert_eq!(report.traversal_time, None);
        assert!(report.mean_compute_hz.is_some());
    }

    proptest! {
        #[test]
        fn affine_profiles_have_zero_jerk(a in -2i32..=2, b in -8i32..=8, n in 3usize..40) {
            // Coefficients on a dyadic grid keep the differences exact.
            let dt = 0.125;
            let v: Vec<f64> = (0..n).map(|i| a as f64 * 0.25 + b as f64 * 0.5 * (i as f64 * dt)).collect();
            prop_assert_eq!(average_jerk(&v, dt).unwrap(), 0.0);
        }

        #[test]
        fn affine_profiles_have_negligible_jerk(a in -2.0f64..2.0, b in -2.0f64..2.0, n in 3usize..40) {
            let v: Vec<f64> = (0..n).map(|i| a + b * i as f64 * 0.1).collect();
            prop_assert!(average_jerk(&v, 0.1).unwrap() < 1e-12);
        }

        #[test]
        fn cte_translation_invariant(dx in -5.0f64..5.0, dy in -5.0f64..5.0, ys in prop::collection::vec(-1.0f64..1.0, 1..8)) {
            let samples: Vec<Sample> = ys.iter().enumerate().map(|(i, y)| sample(0.1 * i as f64, 0.5 * i as f64, *y, 0.0, 0.0, 0.0)).collect();
            let log = log_from(samples, Outcome::Success, vec![]);
            let mut moved = log.clone();
            for s in &mut moved.samples {
                s.x += dx;
                s.y += dy;
            }
            for p in &mut moved.paths[0].path.points {
                p.x += dx;
                p.y += dy;
            }
            let a = cross_track_error(&log).unwrap();
            let b = cross_track_error(&moved).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
