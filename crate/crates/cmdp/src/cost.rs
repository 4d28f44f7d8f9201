//! Extended-real cost values.
//!
//! Costs in this crate live in `R ∪ {+∞}`. Infinity marks infeasibility and
//! must propagate exactly through every recursion, so it is a tagged variant
//! rather than a sentinel float: `Finite(x) + Infinite = Infinite` with no
//! room for NaN surprises, and the minimum of an empty candidate set is
//! `Infinite` by convention.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::scalar::Real;

/// A cost value in `R ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtCost<F> {
    /// A finite cost.
    Finite(F),
    /// Infeasible / unbounded cost.
    Infinite,
}

impl<F: Real> ExtCost<F> {
    /// Zero cost.
    pub fn zero() -> Self {
        ExtCost::Finite(F::zero())
    }

    /// The characteristic cost of a predicate: `0` when it holds, `+∞`
    /// otherwise.
    pub fn indicator(holds: bool) -> Self {
        if holds {
            ExtCost::zero()
        } else {
            ExtCost::Infinite
        }
    }

    /// Returns the finite payload, if any.
    pub fn finite(self) -> Option<F> {
        match self {
            ExtCost::Finite(x) => Some(x),
            ExtCost::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtCost::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtCost::Infinite)
    }

    /// Saturating multiplication by a non-negative probability.
    ///
    /// `0 · ∞ = 0` by convention: a zero-probability branch contributes
    /// nothing regardless of how bad it is.
    pub fn scale(self, p: F) -> Self {
        debug_assert!(p >= F::zero());
        match self {
            ExtCost::Finite(x) => ExtCost::Finite(p * x),
            ExtCost::Infinite => {
                if p > F::zero() {
                    ExtCost::Infinite
                } else {
                    ExtCost::zero()
                }
            }
        }
    }

    /// Total order: finite values by magnitude, `Infinite` above everything.
    pub fn total_cmp(self, other: Self) -> Ordering {
        match (self, other) {
            (ExtCost::Infinite, ExtCost::Infinite) => Ordering::Equal,
            (ExtCost::Infinite, ExtCost::Finite(_)) => Ordering::Greater,
            (ExtCost::Finite(_), ExtCost::Infinite) => Ordering::Less,
            (ExtCost::Finite(a), ExtCost::Finite(b)) => {
                a.partial_cmp(&b).expect("finite costs are never NaN")
            }
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.total_cmp(other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.total_cmp(other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Minimum over a candidate set, `Infinite` when the set is empty.
    pub fn min_over(iter: impl IntoIterator<Item = Self>) -> Self {
        iter.into_iter().fold(ExtCost::Infinite, ExtCost::min)
    }
}

impl<F: Real> Add for ExtCost<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => ExtCost::Finite(a + b),
            _ => ExtCost::Infinite,
        }
    }
}

impl<F: Real> Add<F> for ExtCost<F> {
    type Output = Self;

    fn add(self, rhs: F) -> Self {
        self + ExtCost::Finite(rhs)
    }
}

impl<F: Real> PartialOrd for ExtCost<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(*other))
    }
}

impl<F: fmt::Display> fmt::Display for ExtCost<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(x) => write!(f, "{x}"),
            ExtCost::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = ExtCost<f64>;

    #[test]
    fn addition_saturates() {
        assert_eq!(C::Finite(1.0) + C::Finite(2.0), C::Finite(3.0));
        assert_eq!(C::Finite(1.0) + C::Infinite, C::Infinite);
        assert_eq!(C::Infinite + C::Finite(-5.0), C::Infinite);
        assert_eq!(C::Infinite + C::Infinite, C::Infinite);
    }

    #[test]
    fn min_of_empty_set_is_infinite() {
        assert_eq!(C::min_over(std::iter::empty()), C::Infinite);
        assert_eq!(
            C::min_over([C::Infinite, C::Finite(2.0), C::Finite(1.0)]),
            C::Finite(1.0)
        );
    }

    #[test]
    fn zero_probability_absorbs_infinity() {
        assert_eq!(C::Infinite.scale(0.0), C::zero());
        assert_eq!(C::Infinite.scale(0.5), C::Infinite);
        assert_eq!(C::Finite(4.0).scale(0.5), C::Finite(2.0));
    }

    #[test]
    fn ordering_puts_infinity_on_top() {
        assert!(C::Finite(1e300) < C::Infinite);
        assert!(C::Finite(-1.0) < C::Finite(0.0));
        assert_eq!(C::Infinite.min(C::Finite(3.0)), C::Finite(3.0));
        assert_eq!(C::Infinite.max(C::Finite(3.0)), C::Infinite);
    }
}
