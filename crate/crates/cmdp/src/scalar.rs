//! Scalar abstraction for the solver.
//!
//! All numerical code in this crate is generic over [`Real`], which bundles
//! the `num-traits` float machinery with the handful of tolerance constants
//! the solver needs. It is implemented for `f64` (the default used by the
//! CLI and the test suites) and `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solver.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + AddAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only for values outside the
    /// scalar's range, which none of our constants are.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Tolerance for checking that a transition row sums to one.
    fn prob_tol() -> Self;

    /// Relative nudge applied before `floor` so that exact grid multiples are
    /// not pushed down a cell by representation error.
    fn floor_nudge() -> Self;

    /// Smallest admissible anchor for the geometric grid; instances whose
    /// anchor would fall below this are rejected.
    fn grid_underflow_floor() -> Self;

    /// Relative guard factor for the geometric partial-sum floor. Positive
    /// partial sums below `anchor * guard` collapse to the zero point and the
    /// collapse error is bounded by this factor.
    fn psum_guard_factor() -> Self;

    /// Slack used when the identity-grid difference recursion tests
    /// admissibility, absorbing the round-off of re-deriving a sum as a
    /// chain of subtractions.
    fn diff_slack() -> Self;
}

impl Real for f64 {
    fn prob_tol() -> Self {
        1e-9
    }
    fn floor_nudge() -> Self {
        1e-12
    }
    fn grid_underflow_floor() -> Self {
        1e-300
    }
    fn psum_guard_factor() -> Self {
        1e-12
    }
    fn diff_slack() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn prob_tol() -> Self {
        1e-5
    }
    fn floor_nudge() -> Self {
        1e-6
    }
    fn grid_underflow_floor() -> Self {
        1e-30
    }
    fn psum_guard_factor() -> Self {
        1e-6
    }
    fn diff_slack() -> Self {
        1e-4
    }
}

/// Sorts a slice of finite scalars ascending and removes exact duplicates.
///
/// `-0.0` is normalized to `+0.0` so that deduplication is stable.
pub(crate) fn sort_dedup<F: Real>(values: &mut Vec<F>) {
    for v in values.iter_mut() {
        if *v == F::zero() {
            *v = F::zero();
        }
        debug_assert!(v.is_finite(), "non-finite value in scalar set");
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values.dedup_by(|a, b| a == b);
}

/// Binary-searches a sorted slice for an exact scalar match.
pub(crate) fn position_of<F: Real>(sorted: &[F], v: F) -> Option<usize> {
    sorted
        .binary_search_by(|probe| probe.partial_cmp(&v).expect("finite values"))
        .ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_normalizes_signed_zero() {
        let mut xs = vec![1.0_f64, -0.0, 0.0, 1.0];
        sort_dedup(&mut xs);
        assert_eq!(xs, vec![0.0, 1.0]);
        assert!(xs[0].is_sign_positive());
    }

    #[test]
    fn position_finds_exact_members_only() {
        let xs = vec![0.0_f64, 0.5, 2.0];
        assert_eq!(position_of(&xs, 0.5), Some(1));
        assert_eq!(position_of(&xs, 0.25), None);
    }
}
