use serde::{Deserialize, Serialize};

use super::cost::{ProfileLabel, StateBounds, WeightProfile};
use super::ControlError;
use crate::scalar::Real;

/// Weight profiles keyed by path shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profiles<T> {
    pub straight: WeightProfile<T>,
    pub turn: WeightProfile<T>,
}

impl<T> Profiles<T> {
    pub fn get(&self, label: ProfileLabel) -> &WeightProfile<T> {
        match label {
            ProfileLabel::Straight => &self.straight,
            ProfileLabel::Turn => &self.turn,
        }
    }
}

/// SQP termination and globalization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SolverConfig<T> {
    pub max_iterations: usize,
    /// Bound on the projected KKT stationarity residual.
    pub stationarity_tol: T,
    /// Bound on the initial-state and dynamics defects.
    pub constraint_tol: T,
    /// Initial weight of the ℓ₁ constraint penalty in the merit function.
    pub penalty_init: T,
    /// Margin by which the merit penalty must exceed the largest multiplier.
    pub penalty_margin: T,
    pub max_backtracks: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            stationarity_tol: T::lit(1e-6),
            constraint_tol: T::lit(1e-8),
            penalty_init: T::lit(10.0),
            penalty_margin: T::lit(1.0),
            max_backtracks: 30,
        }
    }
}

/// Everything the tracking controller needs besides the problem data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct MpcConfig<T> {
    pub horizon: usize,
    pub step: T,
    pub v_min: T,
    pub v_max: T,
    pub omega_max: T,
    pub d_base: T,
    pub r_wheel: T,
    /// Forward speed requested along the reference path.
    pub v_ref: T,
    pub profiles: Profiles<T>,
    pub turn_lookahead: usize,
    pub turn_angle_threshold: T,
    pub solver: SolverConfig<T>,
    /// Soft position box, usually the grid extent.
    pub state_bounds: Option<StateBounds<T>>,
}

impl<T: Real> Default for MpcConfig<T> {
    fn default() -> Self {
        let l = T::lit;
        Self {
            horizon: 10,
            step: l(0.2),
            v_min: l(0.0),
            v_max: l(1.0),
            omega_max: l(1.5),
            d_base: l(0.2022),
            r_wheel: l(0.0985),
            v_ref: l(0.5),
            profiles: Profiles {
                straight: WeightProfile {
                    q: [l(5.0), l(5.0), l(0.5)],
                    r: [l(0.05), l(0.5)],
                    label: ProfileLabel::Straight,
                },
                turn: WeightProfile {
                    q: [l(5.0), l(5.0), l(3.0)],
                    r: [l(0.5), l(0.05)],
                    label: ProfileLabel::Turn,
                },
            },
            turn_lookahead: 5,
            turn_angle_threshold: T::FRAC_PI_6(),
            solver: SolverConfig::default(),
            state_bounds: None,
        }
    }
}

impl<T: Real> MpcConfig<T> {
    pub fn validate(&self) -> Result<(), ControlError> {
        let fail = |msg: &str| Err(ControlError::Config(msg.to_string()));
        if self.horizon == 0 {
            return fail("horizon must be at least 1");
        }
        if !(self.step > T::zero()) {
            return fail("step must be positive");
        }
        if !(self.v_min < self.v_max) {
            return fail("v_min must be below v_max");
        }
        if !(self.omega_max > T::zero()) {
            return fail("omega_max must be positive");
        }
        if !(self.r_wheel > T::zero()) {
            return fail("r_wheel must be positive");
        }
        if !(self.solver.stationarity_tol > T::zero() && self.solver.constraint_tol > T::zero()) {
            return fail("solver tolerances must be positive");
        }
        if !(self.profiles.straight.is_valid() && self.profiles.turn.is_valid()) {
            return fail("weight profiles need strictly positive weights");
        }
        if let Some(b) = &self.state_bounds {
            if !(b.x[0] <= b.x[1] && b.y[0] <= b.y[1] && b.weight >= T::zero()) {
                return fail("state bounds must be ordered with a non-negative weight");
            }
        }
        Ok(())
    }

    pub fn clamp_control(&self, v: T, omega: T) -> (T, T) {
        (
            v.max(self.v_min).min(self.v_max),
            omega.max(-self.omega_max).min(self.omega_max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        MpcConfig::<f64>::default().validate().unwrap();
        MpcConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = MpcConfig::<f64>::default();
        c.horizon = 0;
        assert!(c.validate().is_err());
        let mut c = MpcConfig::<f64>::default();
        c.v_min = 2.0;
        assert!(c.validate().is_err());
        let mut c = MpcConfig::<f64>::default();
        c.profiles.turn.r[1] = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: MpcConfig<f64> = serde_json::from_str(r#"{"horizon": 4, "step": 0.05}"#).unwrap();
        assert_eq!(c.horizon, 4);
        assert_eq!(c.v_max, 1.0);
    }
}
