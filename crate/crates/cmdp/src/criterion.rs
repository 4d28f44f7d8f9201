//! Cost-criterion algebra.
//!
//! Every criterion supported here decomposes recursively over time and over
//! successor states: the cost of a policy from epoch `h` is
//! `c_h(s, a) + f(...)`, where `f` folds the successor costs through a pair
//! of scalar functions `(alpha, beta)`:
//!
//! ```text
//! g(S+1) = 0,    g(t) = alpha(beta(P_h(t | s, a), C_{h+1}(t)), g(t+1))
//! ```
//!
//! with `f = g(1)`. `beta(0, ·) = 0` so unsupported successors drop out of
//! the fold, and `alpha(·, ∞) = ∞` so infeasibility propagates.
//!
//! - **Expectation**: `alpha(x, y) = x + y`, `beta(p, z) = p·z` — the fold is
//!   the expected successor cost.
//! - **Almost-sure**: `alpha = max`, `beta(p, z) = [p > 0]·z` — the fold is
//!   the worst supported successor cost.
//! - **Anytime**: `alpha(x, y) = max(0, max(x, y))` with the same `beta` —
//!   the running cost is clamped at zero so every prefix must stay within
//!   budget on every supported trajectory.

use std::fmt;
use std::str::FromStr;

use crate::cost::ExtCost;
use crate::scalar::Real;

/// The supported cost criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    Expectation,
    AlmostSure,
    Anytime,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 3] =
        [CriterionKind::Expectation, CriterionKind::AlmostSure, CriterionKind::Anytime];

    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Expectation => "expectation",
            CriterionKind::AlmostSure => "almost_sure",
            CriterionKind::Anytime => "anytime",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expectation" => Ok(CriterionKind::Expectation),
            "almost_sure" => Ok(CriterionKind::AlmostSure),
            "anytime" => Ok(CriterionKind::Anytime),
            other => Err(format!("unknown criterion {other:?}")),
        }
    }
}

/// A time-space-recursive cost criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Criterion {
    kind: CriterionKind,
}

/// Builds the criterion for the given kind.
pub fn make_criterion(kind: CriterionKind) -> Criterion {
    Criterion { kind }
}

impl From<CriterionKind> for Criterion {
    fn from(kind: CriterionKind) -> Self {
        make_criterion(kind)
    }
}

impl Criterion {
    pub fn kind(self) -> CriterionKind {
        self.kind
    }

    /// The space-recursive combiner; non-decreasing in both arguments with
    /// `alpha(·, ∞) = ∞`.
    #[inline]
    pub fn alpha<F: Real>(self, x: ExtCost<F>, y: ExtCost<F>) -> ExtCost<F> {
        match self.kind {
            CriterionKind::Expectation => x + y,
            CriterionKind::AlmostSure => x.max(y),
            CriterionKind::Anytime => ExtCost::zero().max(x.max(y)),
        }
    }

    /// Weights a successor cost by its transition probability; `beta(0, ·)`
    /// is the identity element of `alpha` so zero-probability successors are
    /// ignored, even when their cost is infinite.
    #[inline]
    pub fn beta<F: Real>(self, p: F, z: ExtCost<F>) -> ExtCost<F> {
        match self.kind {
            CriterionKind::Expectation => z.scale(p),
            CriterionKind::AlmostSure | CriterionKind::Anytime => {
                if p > F::zero() {
                    z
                } else {
                    ExtCost::zero()
                }
            }
        }
    }

    /// The neutral tail of the fold, `g(S+1) = 0`.
    #[inline]
    pub fn fold_base<F: Real>(self) -> ExtCost<F> {
        ExtCost::zero()
    }

    /// Folds successor `(probability, cost)` pairs right-to-left:
    /// `f = alpha(beta(p_1, c_1), alpha(beta(p_2, c_2), ... alpha(beta(p_S, c_S), 0)))`.
    ///
    /// The pairs must be supplied in successor-state order `1..=S`; the fold
    /// is evaluated in that fixed association so results are reproducible
    /// bit-for-bit across the different solvers.
    pub fn fold<F: Real>(self, pairs: &[(F, ExtCost<F>)]) -> ExtCost<F> {
        let mut acc = self.fold_base();
        for &(p, c) in pairs.iter().rev() {
            acc = self.alpha(self.beta(p, c), acc);
        }
        acc
    }

    /// Terminal cost of the value-demand augmentation: `0` when the residual
    /// demand is non-positive, `∞` otherwise.
    #[inline]
    pub fn terminal_cost<F: Real>(self, demand: F) -> ExtCost<F> {
        ExtCost::indicator(demand <= F::zero())
    }
}
