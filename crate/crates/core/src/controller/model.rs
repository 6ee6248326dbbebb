//! Unicycle kinematics of a differential-drive robot and its RK4 discretization.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Planar pose `(x, y, yaw)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

impl<T: Real> State<T> {
    pub fn new(x: T, y: T, yaw: T) -> Self {
        Self { x, y, yaw }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.x, self.y, self.yaw]
    }

    pub fn from_array([x, y, yaw]: [T; 3]) -> Self {
        Self { x, y, yaw }
    }

    fn axpy(&self, h: T, d: &[T; 3]) -> Self {
        Self::new(self.x + h * d[0], self.y + h * d[1], self.yaw + h * d[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.yaw.is_finite()
    }
}

/// Body-frame command: linear speed `v` (m/s) and yaw rate `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control<T> {
    pub v: T,
    pub omega: T,
}

impl<T: Real> Control<T> {
    pub fn new(v: T, omega: T) -> Self {
        Self { v, omega }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Left/right wheel angular speeds in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelCommand<T> {
    pub v_left: T,
    pub v_right: T,
}

/// `(v cos θ, v sin θ, ω)`.
pub fn ddmr_derivative<T: Real>(state: &State<T>, control: &Control<T>) -> [T; 3] {
    let (s, c) = state.yaw.sin_cos();
    [control.v * c, control.v * s, control.omega]
}

/// One classical RK4 step with the control held over the step. Yaw is not wrapped.
pub fn rk4_step<T: Real>(state: &State<T>, control: &Control<T>, h: T) -> State<T> {
    let half = h / T::two();
    let k1 = ddmr_derivative(state, control);
    let k2 = ddmr_derivative(&state.axpy(half, &k1), control);
    let k3 = ddmr_derivative(&state.axpy(half, &k2), control);
    let k4 = ddmr_derivative(&state.axpy(h, &k3), control);
    let sixth = h / T::lit(6.0);
    let two = T::two();
    let blend = |i: usize| k1[i] + two * k2[i] + two * k3[i] + k4[i];
    State::new(
        state.x + sixth * blend(0),
        state.y + sixth * blend(1),
        state.yaw + sixth * blend(2),
    )
}

/// Sensitivities of [`rk4_step`]: `(∂x⁺/∂x, ∂x⁺/∂u)`, row-major 3×3 and 3×2.
pub type StepJacobians<T> = ([[T; 3]; 3], [[T; 2]; 3]);

/// Next state and its exact first derivatives with respect to state and control.
pub fn rk4_step_with_jacobians<T: Real>(
    state: &State<T>,
    control: &Control<T>,
    h: T,
) -> (State<T>, StepJacobians<T>) {
    let zero = T::zero();
    let one = T::one();
    let half = h / T::two();

    // Jacobians of the continuous dynamics at a stage pose.
    let fx = |s: &State<T>| {
        let (sn, cs) = s.yaw.sin_cos();
        [
            [zero, zero, -control.v * sn],
            [zero, zero, control.v * cs],
            [zero, zero, zero],
        ]
    };
    let fu = |s: &State<T>| {
        let (sn, cs) = s.yaw.sin_cos();
        [[cs, zero], [sn, zero], [zero, one]]
    };
    let mul33 = |a: &[[T; 3]; 3], b: &[[T; 3]; 3]| {
        let mut out = [[zero; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).fold(zero, |acc, k| acc + a[i][k] * b[k][j]);
            }
        }
        out
    };
    let mul32 = |a: &[[T; 3]; 3], b: &[[T; 2]; 3]| {
        let mut out = [[zero; 2]; 3];
        for i in 0..3 {
            for j in 0..2 {
                out[i][j] = (0..3).fold(zero, |acc, k| acc + a[i][k] * b[k][j]);
            }
        }
        out
    };
    let identity = [[one, zero, zero], [zero, one, zero], [zero, zero, one]];
    // Stage input pose sensitivity: I + c·dk.
    let shift_x = |c: T, dk: &[[T; 3]; 3]| {
        let mut out = identity;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = out[i][j] + c * dk[i][j];
            }
        }
        out
    };
    let shift_u = |c: T, dk: &[[T; 2]; 3]| {
        let mut out = [[zero; 2]; 3];
        for i in 0..3 {
            for j in 0..2 {
                out[i][j] = c * dk[i][j];
            }
        }
        out
    };
    let add_u = |a: [[T; 2]; 3], b: [[T; 2]; 3]| {
        let mut out = a;
        for i in 0..3 {
            for j in 0..2 {
                out[i][j] = out[i][j] + b[i][j];
            }
        }
        out
    };

    let s1 = *state;
    let k1 = ddmr_derivative(&s1, control);
    let dk1x = fx(&s1);
    let dk1u = fu(&s1);

    let s2 = s1.axpy(half, &k1);
    let k2 = ddmr_derivative(&s2, control);
    let a2 = fx(&s2);
    let dk2x = mul33(&a2, &shift_x(half, &dk1x));
    let dk2u = add_u(mul32(&a2, &shift_u(half, &dk1u)), fu(&s2));

    let s3 = s1.axpy(half, &k2);
    let k3 = ddmr_derivative(&s3, control);
    let a3 = fx(&s3);
    let dk3x = mul33(&a3, &shift_x(half, &dk2x));
    let dk3u = add_u(mul32(&a3, &shift_u(half, &dk2u)), fu(&s3));

    let s4 = s1.axpy(h, &k3);
    let k4 = ddmr_derivative(&s4, control);
    let a4 = fx(&s4);
    let dk4x = mul33(&a4, &shift_x(h, &dk3x));
    let dk4u = add_u(mul32(&a4, &shift_u(h, &dk3u)), fu(&s4));

    let sixth = h / T::lit(6.0);
    let two = T::two();
    let next = State::new(
        s1.x + sixth * (k1[0] + two * k2[0] + two * k3[0] + k4[0]),
        s1.y + sixth * (k1[1] + two * k2[1] + two * k3[1] + k4[1]),
        s1.yaw + sixth * (k1[2] + two * k2[2] + two * k3[2] + k4[2]),
    );
    let mut jx = identity;
    let mut ju = [[zero; 2]; 3];
    for i in 0..3 {
        for j in 0..3 {
            jx[i][j] = jx[i][j]
                + sixth * (dk1x[i][j] + two * dk2x[i][j] + two * dk3x[i][j] + dk4x[i][j]);
        }
        for j in 0..2 {
            ju[i][j] = sixth * (dk1u[i][j] + two * dk2u[i][j] + two * dk3u[i][j] + dk4u[i][j]);
        }
    }
    (next, (jx, ju))
}

/// States produced by applying `controls` in sequence from `x0`; length `controls.len() + 1`.
pub fn rollout_single_shooting<T: Real>(x0: &State<T>, controls: &[Control<T>], h: T) -> Vec<State<T>> {
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(*x0);
    for u in controls {
        let last = *states.last().expect("non-empty");
        states.push(rk4_step(&last, u, h));
    }
    states
}

/// Wheel speeds `((v − ω·d)/r, (v + ω·d)/r)`.
pub fn to_wheel_command<T: Real>(control: &Control<T>, d_base: T, r_wheel: T) -> WheelCommand<T> {
    WheelCommand {
        v_left: (control.v - control.omega * d_base) / r_wheel,
        v_right: (control.v + control.omega * d_base) / r_wheel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    /// Exact pose after holding `(v, ω)` for `t` seconds from the origin at heading 0.
    fn constant_twist(v: f64, w: f64, t: f64) -> State<f64> {
        State::new(v / w * (w * t).sin(), v / w * (1.0 - (w * t).cos()), w * t)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(ddmr_derivative(&State::new(0.0, 0.0, 0.0), &Control::new(1.0, 0.0)), [1.0, 0.0, 0.0]);
        let d = ddmr_derivative(&State::new(3.0, 1.0, FRAC_PI_2), &Control::new(2.0, 0.5));
        assert!(d[0].abs() < 1e-15);
        assert_eq!((d[1], d[2]), (2.0, 0.5));
        assert_eq!(ddmr_derivative(&State::new(1.0, 2.0, 0.3), &Control::zero()), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn straight_step_is_exact() {
        let next = rk4_step(&State::new(0.0, 0.0, 0.0), &Control::new(1.0, 0.0), 0.1);
        assert_eq!(next, State::new(0.1, 0.0, 0.0));
    }

    #[test]
    fn arc_step_matches_closed_form() {
        let next = rk4_step(&State::new(0.0, 0.0, 0.0), &Control::new(1.0, 1.0), 0.1);
        let exact = constant_twist(1.0, 1.0, 0.1);
        assert!((next.x - exact.x).abs() < 1e-7);
        assert!((next.y - exact.y).abs() < 1e-7);
        assert!((next.yaw - 0.1).abs() < 1e-15);
        assert!((exact.x - 0.0998334).abs() < 1e-7 && (exact.y - 0.0049958).abs() < 1e-7);
    }

    #[test]
    fn local_error_scales_with_fifth_power() {
        let err = |h: f64| {
            let a = rk4_step(&State::new(0.0, 0.0, 0.0), &Control::new(1.0, 1.0), h);
            let b = constant_twist(1.0, 1.0, h);
            ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
        };
        // Halving h shrinks the one-step error by about 2^5 (≥ 16 required).
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 16.0, "ratio {ratio}");
    }

    #[test]
    fn rollout_examples() {
        let x0 = State::new(1.0, 2.0, 0.3);
        let still = rollout_single_shooting(&x0, &[Control::zero(); 4], 0.1);
        assert!(still.iter().all(|s| *s == x0));
        let one = rollout_single_shooting(&x0, &[Control::new(0.4, 0.2)], 0.1);
        assert_eq!(one, vec![x0, rk4_step(&x0, &Control::new(0.4, 0.2), 0.1)]);
        let line = rollout_single_shooting(&State::new(0.0, 0.0, 0.0), &[Control::new(1.0, 0.0); 5], 0.1);
        for (i, s) in line.iter().enumerate() {
            assert_relative_eq!(s.x, 0.1 * i as f64, epsilon = 1e-12);
        }
        assert_relative_eq!(line[5].x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn wheel_examples() {
        let w = to_wheel_command(&Control::new(1.0, 0.0), 0.25, 0.1);
        assert_relative_eq!(w.v_left, 10.0, epsilon = 1e-12);
        assert_relative_eq!(w.v_right, 10.0, epsilon = 1e-12);
        let w = to_wheel_command(&Control::new(0.0, 1.0), 0.25, 0.1);
        assert_relative_eq!(w.v_left, -2.5, epsilon = 1e-12);
        assert_relative_eq!(w.v_right, 2.5, epsilon = 1e-12);
        let w = to_wheel_command(&Control::new(0.5, -1.0), 0.2, 0.05);
        assert_relative_eq!(w.v_left, 14.0, epsilon = 1e-12);
        assert_relative_eq!(w.v_right, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_step() {
        let next = rk4_step(&State::new(0.0f32, 0.0, 0.0), &Control::new(1.0, 1.0), 0.1);
        assert!((next.x - 0.099_833_4).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn wheel_command_is_linear(v in -2.0f64..2.0, w in -2.0f64..2.0, alpha in -3.0f64..3.0) {
            let base = to_wheel_command(&Control::new(v, w), 0.25, 0.1);
            let scaled = to_wheel_command(&Control::new(alpha * v, alpha * w), 0.25, 0.1);
            prop_assert!((scaled.v_left - alpha * base.v_left).abs() < 1e-9);
            prop_assert!((scaled.v_right - alpha * base.v_right).abs() < 1e-9);
        }

        #[test]
        fn jacobians_match_central_differences(
            x in -5.0f64..5.0, y in -5.0f64..5.0, yaw in -3.0f64..3.0,
            v in -1.0f64..1.0, w in -1.5f64..1.5,
        ) {
            let s = State::new(x, y, yaw);
            let u = Control::new(v, w);
            let h = 0.1;
            let (next, (jx, ju)) = rk4_step_with_jacobians(&s, &u, h);
            prop_assert_eq!(next, rk4_step(&s, &u, h));
            let eps = 1e-6;
            for j in 0..3 {
                let mut p = s.as_array();
                let mut m = s.as_array();
                p[j] += eps;
                m[j] -= eps;
                let fp = rk4_step(&State::from_array(p), &u, h).as_array();
                let fm = rk4_step(&State::from_array(m), &u, h).as_array();
                for i in 0..3 {
                    prop_assert!((jx[i][j] - (fp[i] - fm[i]) / (2.0 * eps)).abs() < 1e-7);
                }
            }
            for j in 0..2 {
                let bump = |d: f64| if j == 0 { Control::new(v + d, w) } else { Control::new(v, w + d) };
                let fp = rk4_step(&s, &bump(eps), h).as_array();
                let fm = rk4_step(&s, &bump(-eps), h).as_array();
                for i in 0..3 {
                    prop_assert!((ju[i][j] - (fp[i] - fm[i]) / (2.0 * eps)).abs() < 1e-7);
                }
            }
        }
    }
}
