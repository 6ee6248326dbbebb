//! Heading bookkeeping at the ±π discontinuity.

use crate::scalar::{wrap_angle, Real};

/// Tolerance for recognizing a reference heading of exactly ±π.
pub const YAW_EQ_TOL: f64 = 1e-9;

/// Re-expresses a `(current, reference)` heading pair so that turning from one to the
/// other takes the short way round and never straddles the ±π seam.
///
/// Both inputs are expected in `[-π, π]`. Each output is congruent to its input modulo
/// 2π, and the outputs differ by at most π.
pub fn fix_yaw<T: Real>(yaw_cur: T, yaw_ref: T) -> (T, T) {
    let pi = T::PI();
    let two_pi = T::two_pi();
    let tol = T::lit(YAW_EQ_TOL);
    let mut cur = yaw_cur;
    let mut reference = yaw_ref;

    if (reference - pi).abs() <= tol && cur < T::zero() {
        cur = cur + two_pi;
    } else if (reference + pi).abs() <= tol && cur > T::zero() {
        cur = cur - two_pi;
    }
    if cur * reference < T::zero() && (cur - reference).abs() > pi {
        if cur < T::zero() {
            reference = reference - two_pi;
        } else {
            reference = reference + two_pi;
        }
    }
    (cur, reference)
}

/// `reference` shifted by a multiple of 2π to lie within π of `current`. Accepts
/// unwrapped inputs; the pairing itself goes through [`fix_yaw`].
pub fn align_yaw<T: Real>(current: T, reference: T) -> T {
    let (cur, r) = fix_yaw(wrap_angle(current), wrap_angle(reference));
    r + (current - cur)
}

/// Signed heading error `current − reference` after alignment, in `[-π, π]`.
pub fn yaw_residual<T: Real>(current: T, reference: T) -> T {
    let (cur, r) = fix_yaw(wrap_angle(current), wrap_angle(reference));
    cur - r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn reference_at_pi_lifts_negative_current() {
        let (c, r) = fix_yaw(-3.0, PI);
        assert!((c - (-3.0 + 2.0 * PI)).abs() < 1e-12);
        assert!((c - 3.28319).abs() < 1e-5);
        assert_eq!(r, PI);
    }

    #[test]
    fn reference_at_minus_pi_lowers_positive_current() {
        let (c, r) = fix_yaw(3.0, -PI);
        assert!((c - (3.0 - 2.0 * PI)).abs() < 1e-12);
        assert_eq!(r, -PI);
    }

    #[test]
    fn small_same_sign_gap_is_untouched() {
        assert_eq!(fix_yaw(0.5, 0.7), (0.5, 0.7));
    }

    #[test]
    fn shorter_turn_through_pi() {
        let (c, r) = fix_yaw(3.0, -FRAC_PI_2);
        assert_eq!(c, 3.0);
        assert!((r - (-FRAC_PI_2 + 2.0 * PI)).abs() < 1e-12);
        assert!((r - 4.71239).abs() < 1e-5);
        let (c, r) = fix_yaw(-3.0, FRAC_PI_2);
        assert_eq!(c, -3.0);
        assert!((r - (FRAC_PI_2 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn sweep_postconditions() {
        let n = 100;
        let at = |i: usize| -PI + 2.0 * PI * i as f64 / (n - 1) as f64;
        for i in 0..n {
            for j in 0..n {
                let (c0, r0) = (at(i), at(j));
                let (c, r) = fix_yaw(c0, r0);
                assert!((c - r).abs() <= PI, "{c0} {r0}");
                let k = ((c - c0) / (2.0 * PI)).round();
                assert!((c - c0 - 2.0 * PI * k).abs() <= 1e-12);
                let k = ((r - r0) / (2.0 * PI)).round();
                assert!((r - r0 - 2.0 * PI * k).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn alignment_of_unwrapped_headings() {
        let aligned = align_yaw(7.0, 0.5);
        assert!((aligned - (0.5 + 2.0 * PI)).abs() < 1e-12);
        assert!((yaw_residual(7.0, 0.5) - (7.0 - 2.0 * PI - 0.5)).abs() < 1e-12);
        assert!((yaw_residual(3.1, -3.1) - (6.2 - 2.0 * PI)).abs() < 1e-12);
    }
}
