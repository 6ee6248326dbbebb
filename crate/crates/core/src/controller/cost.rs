//! Quadratic tracking cost over a horizon.

use serde::{Deserialize, Serialize};

use super::model::{Control, State};
use crate::planner::yaw_residual;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileLabel {
    Straight,
    Turn,
}

impl ProfileLabel {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileLabel::Straight => "STRAIGHT",
            ProfileLabel::Turn => "TURN",
        }
    }
}

/// Diagonal state (`q`: x, y, yaw) and control (`r`: v, ω) weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile<T> {
    pub q: [T; 3],
    pub r: [T; 2],
    pub label: ProfileLabel,
}

impl<T: Real> WeightProfile<T> {
    pub fn is_valid(&self) -> bool {
        self.q.iter().chain(self.r.iter()).all(|w| *w > T::zero() && w.is_finite())
    }
}

/// Soft box on planar position; violations cost `weight · distance²` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBounds<T> {
    pub x: [T; 2],
    pub y: [T; 2],
    pub weight: T,
}

impl<T: Real> StateBounds<T> {
    fn excess(lo_hi: [T; 2], v: T) -> T {
        if v < lo_hi[0] {
            v - lo_hi[0]
        } else if v > lo_hi[1] {
            v - lo_hi[1]
        } else {
            T::zero()
        }
    }

    pub fn penalty(&self, s: &State<T>) -> T {
        let ex = Self::excess(self.x, s.x);
        let ey = Self::excess(self.y, s.y);
        self.weight * (ex * ex + ey * ey)
    }
}

/// State residual with the heading component taken after yaw alignment.
pub fn state_residual<T: Real>(state: &State<T>, reference: &State<T>) -> [T; 3] {
    [
        state.x - reference.x,
        state.y - reference.y,
        yaw_residual(state.yaw, reference.yaw),
    ]
}

/// `Σ_{i<N} (Xᵢ−Xᵢʳᵉᶠ)ᵀQ(Xᵢ−Xᵢʳᵉᶠ) + (Uᵢ−Uᵢʳᵉᶠ)ᵀR(Uᵢ−Uᵢʳᵉᶠ)` with `N = controls.len()`.
pub fn trajectory_cost<T: Real>(
    states: &[State<T>],
    controls: &[Control<T>],
    ref_states: &[State<T>],
    ref_controls: &[Control<T>],
    profile: &WeightProfile<T>,
) -> T {
    let mut total = T::zero();
    for i in 0..controls.len() {
        let e = state_residual(&states[i], &ref_states[i]);
        let dv = controls[i].v - ref_controls[i].v;
        let dw = controls[i].omega - ref_controls[i].omega;
        total = total
            + profile.q[0] * e[0] * e[0]
            + profile.q[1] * e[1] * e[1]
            + profile.q[2] * e[2] * e[2]
            + profile.r[0] * dv * dv
            + profile.r[1] * dw * dw;
    }
    total
}

/// Position of each decision variable in the flat vector
/// `W = [u₀ … u_{N−1}, x₀ … x_N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub horizon: usize,
}

impl Layout {
    pub fn len(&self) -> usize {
        2 * self.horizon + 3 * (self.horizon + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn control(&self, i: usize) -> usize {
        2 * i
    }

    pub fn state(&self, i: usize) -> usize {
        2 * self.horizon + 3 * i
    }

    pub fn pack<T: Real>(&self, controls: &[Control<T>], states: &[State<T>]) -> Vec<T> {
        let mut w = Vec::with_capacity(self.len());
        for u in controls {
            w.extend([u.v, u.omega]);
        }
        for s in states {
            w.extend(s.as_array());
        }
        w
    }

    pub fn unpack<T: Real>(&self, w: &[T]) -> (Vec<Control<T>>, Vec<State<T>>) {
        let controls = (0..self.horizon)
            .map(|i| Control::new(w[self.control(i)], w[self.control(i) + 1]))
            .collect();
        let states = (0..=self.horizon)
            .map(|i| {
                let k = self.state(i);
                State::new(w[k], w[k + 1], w[k + 2])
            })
            .collect();
        (controls, states)
    }
}

/// Solver objective: tracking cost plus the optional soft position box on every state.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a, T> {
    pub ref_states: &'a [State<T>],
    pub ref_controls: &'a [Control<T>],
    pub profile: &'a WeightProfile<T>,
    pub bounds: Option<&'a StateBounds<T>>,
}

impl<T: Real> Objective<'_, T> {
    pub fn value(&self, controls: &[Control<T>], states: &[State<T>]) -> T {
        let tracking = trajectory_cost(
            states,
            controls,
            self.ref_states,
            self.ref_controls,
            self.profile,
        );
        let soft = self
            .bounds
            .map(|b| states.iter().fold(T::zero(), |acc, s| acc + b.penalty(s)))
            .unwrap_or_else(T::zero);
        tracking + soft
    }

    /// Gradient in [`Layout`] order.
    pub fn gradient(&self, controls: &[Control<T>], states: &[State<T>]) -> Vec<T> {
        let layout = Layout { horizon: controls.len() };
        let two = T::two();
        let mut g = vec![T::zero(); layout.len()];
        for (i, u) in controls.iter().enumerate() {
            let k = layout.control(i);
            g[k] = two * self.profile.r[0] * (u.v - self.ref_controls[i].v);
            g[k + 1] = two * self.profile.r[1] * (u.omega - self.ref_controls[i].omega);
            let e = state_residual(&states[i], &self.ref_states[i]);
            let k = layout.state(i);
            for d in 0..3 {
                g[k + d] = two * self.profile.q[d] * e[d];
            }
        }
        if let Some(b) = self.bounds {
            for (i, s) in states.iter().enumerate() {
                let k = layout.state(i);
                g[k] = g[k] + two * b.weight * StateBounds::excess(b.x, s.x);
                g[k + 1] = g[k + 1] + two * b.weight * StateBounds::excess(b.y, s.y);
            }
        }
        g
    }

    /// Diagonal of the objective Hessian in [`Layout`] order (exact away from box edges).
    pub fn hessian_diagonal(&self, states: &[State<T>]) -> Vec<T> {
        let horizon = states.len() - 1;
        let layout = Layout { horizon };
        let two = T::two();
        let mut h = vec![T::zero(); layout.len()];
        for i in 0..horizon {
            let k = layout.control(i);
            h[k] = two * self.profile.r[0];
            h[k + 1] = two * self.profile.r[1];
            let k = layout.state(i);
            for d in 0..3 {
                h[k + d] = two * self.profile.q[d];
            }
        }
        if let Some(b) = self.bounds {
            for (i, s) in states.iter().enumerate() {
                let k = layout.state(i);
                if StateBounds::excess(b.x, s.x) != T::zero() {
                    h[k] = h[k] + two * b.weight;
                }
                if StateBounds::excess(b.y, s.y) != T::zero() {
                    h[k + 1] = h[k + 1] + two * b.weight;
                }
            }
        }
        h
    }
}
