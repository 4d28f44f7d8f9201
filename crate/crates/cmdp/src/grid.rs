//! Value grids: the rounding schemes behind the approximate solvers.
//!
//! A grid fixes a finite set of representable value demands plus a
//! round-down map and a relaxed lower bound `kappa`:
//!
//! - **Identity**: no rounding; the demand set is the exact value space.
//!   Used by the exact solve path.
//! - **Additive** (arithmetic): multiples of `delta = eps / (H(S+1) + 1)`
//!   covering `[-H r_max, H r_max]`, with `round(v) = floor(v/delta)·delta`
//!   so `v - delta <= round(v) <= v`, and `kappa(v) = v - delta(S+1)`.
//! - **Relative** (geometric): powers `anchor · (1/(1-delta))^k` covering
//!   `(0, H r_max]` plus an explicit zero point, with
//!   `v(1-delta) <= round(v) <= v` for `v >= anchor`, and
//!   `kappa(v) = v (1-delta)^{S+1}`. The anchor is `p_min^H` times the
//!   smallest strictly positive reward.
//!
//! Demand sets are canonical: every grid value is produced by one code path
//! from its integer index, so exact float equality is reliable for set
//! membership downstream. Partial sums inside the Bellman recursions are
//! rounded by [`ValueGrid::round_psum`], whose geometric domain extends below
//! the demand anchor; without those extra lattice points a small positive
//! running sum would collapse to zero and could spuriously reject the action
//! that certifies feasibility.

use crate::error::SolveError;
use crate::model::Cmdp;
use crate::scalar::{position_of, sort_dedup, Real};

/// The rounding scheme of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScheme {
    Identity,
    Additive,
    Relative,
}

impl GridScheme {
    pub fn name(self) -> &'static str {
        match self {
            GridScheme::Identity => "identity",
            GridScheme::Additive => "additive",
            GridScheme::Relative => "relative",
        }
    }
}

/// A demand grid with its rounding and lower-bound maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid<F> {
    scheme: GridScheme,
    epsilon: F,
    delta: F,
    v_min: F,
    v_max: F,
    demands: Vec<F>,
    /// Additive: lowest representable partial sum.
    add_floor: F,
    /// Relative: lattice anchor of the demand set (exponent 0).
    rel_base: F,
    /// Relative: lattice ratio `1/(1-delta)`.
    rel_rho: F,
    /// Relative: positive partial sums below this collapse to the zero point.
    rel_psum_floor: F,
    /// `delta * (S+1)`, the additive kappa slack.
    kappa_slack: F,
    /// `(1-delta)^{S+1}`, the relative kappa factor.
    kappa_factor: F,
}

impl<F: Real> ValueGrid<F> {
    /// The identity grid over an explicit, exact demand set.
    pub fn identity(mut demands: Vec<F>) -> Self {
        sort_dedup(&mut demands);
        assert!(!demands.is_empty(), "demand set must be non-empty");
        let v_min = demands[0];
        let v_max = *demands.last().unwrap();
        ValueGrid {
            scheme: GridScheme::Identity,
            epsilon: F::zero(),
            delta: F::zero(),
            v_min,
            v_max,
            demands,
            add_floor: F::neg_infinity(),
            rel_base: F::one(),
            rel_rho: F::one(),
            rel_psum_floor: F::zero(),
            kappa_slack: F::zero(),
            kappa_factor: F::one(),
        }
    }

    /// Arithmetic grid for accuracy `epsilon > 0`.
    pub fn additive(epsilon: F, cmdp: &Cmdp<F>) -> Result<Self, SolveError> {
        if !(epsilon > F::zero()) {
            return Err(SolveError::NonPositiveEpsilon);
        }
        let s = cmdp.num_states();
        let h = cmdp.horizon();
        let delta = epsilon / F::from_f64_lossy((h * (s + 1) + 1) as f64);
        let h_rmax = F::from_f64_lossy(h as f64) * cmdp.r_max();
        let v_min = -h_rmax;
        let v_max = h_rmax;

        let k_lo = floor_ratio(v_min / delta);
        let k_hi = floor_ratio(v_max / delta);
        let demands: Vec<F> =
            (k_lo..=k_hi).map(|k| F::from_i64(k).expect("small index") * delta).collect();

        let two = F::from_f64_lossy(2.0);
        let slack = delta * F::from_f64_lossy((s + 2) as f64);
        Ok(ValueGrid {
            scheme: GridScheme::Additive,
            epsilon,
            delta,
            v_min,
            v_max,
            demands,
            add_floor: -two * h_rmax - slack,
            rel_base: F::one(),
            rel_rho: F::one(),
            rel_psum_floor: F::zero(),
            kappa_slack: delta * F::from_f64_lossy((s + 1) as f64),
            kappa_factor: F::one(),
        })
    }

    /// Geometric grid for accuracy `epsilon > 0`; rewards must be
    /// non-negative.
    pub fn relative(epsilon: F, cmdp: &Cmdp<F>) -> Result<Self, SolveError> {
        Self::relative_inner(epsilon, cmdp, false)
    }

    /// Geometric grid tuned for the difference recursion: its accuracy
    /// parameter absorbs the extra per-epoch rounding of the shifted demand
    /// lookup, and the demand set extends `H` lattice steps below the anchor
    /// so the shifted optimum is still representable.
    pub fn relative_for_difference(epsilon: F, cmdp: &Cmdp<F>) -> Result<Self, SolveError> {
        Self::relative_inner(epsilon, cmdp, true)
    }

    fn relative_inner(epsilon: F, cmdp: &Cmdp<F>, difference: bool) -> Result<Self, SolveError> {
        if !(epsilon > F::zero()) {
            return Err(SolveError::NonPositiveEpsilon);
        }
        if cmdp.has_negative_reward() {
            return Err(SolveError::NegativeRewards);
        }
        let s = cmdp.num_states();
        let h = cmdp.horizon();
        let denom = if difference { h * (s + 2) + 1 } else { h * (s + 1) + 1 };
        let delta = epsilon / F::from_f64_lossy(denom as f64);
        let one = F::one();
        let rho = one / (one - delta);
        let h_rmax = F::from_f64_lossy(h as f64) * cmdp.r_max();

        // Anchor: p_min^H times the smallest strictly positive reward. When
        // no reward is positive every achievable value is <= 0 and the grid
        // degenerates to the zero point.
        let Some(r_pos) = cmdp.r_min_positive() else {
            return Ok(ValueGrid {
                scheme: GridScheme::Relative,
                epsilon,
                delta,
                v_min: F::zero(),
                v_max: F::zero(),
                demands: vec![F::zero()],
                add_floor: F::neg_infinity(),
                rel_base: one,
                rel_rho: rho,
                rel_psum_floor: F::infinity(),
                kappa_slack: F::zero(),
                kappa_factor: (one - delta).powi((s + 1) as i32),
            });
        };
        let anchor = cmdp.p_min().powi(h as i32) * r_pos;
        if anchor < F::grid_underflow_floor() {
            return Err(SolveError::GridUnderflow);
        }
        let base = if difference { anchor * (one - delta).powi(h as i32) } else { anchor };

        let k_hi = floor_log(v_max_of(h_rmax, base) / base, rho);
        let mut demands = Vec::with_capacity((k_hi.max(0) + 2) as usize);
        demands.push(F::zero());
        for k in 0..=k_hi {
            demands.push(base * rho.powi(k as i32));
        }
        sort_dedup(&mut demands);

        // Partial sums can legitimately fall below the anchor (a small
        // probability times the smallest demand); extend the rounding domain
        // far enough that any such sum still has a lattice point under it and
        // collapse losses are negligible relative to the kappa slack.
        let guard =
            base * cmdp.p_min() * F::psum_guard_factor() * (one - delta).powi((h + s + 2) as i32);
        let k_floor = floor_log(guard / base, rho);
        let psum_floor = base * rho.powi(k_floor as i32);

        Ok(ValueGrid {
            scheme: GridScheme::Relative,
            epsilon,
            delta,
            v_min: base,
            v_max: h_rmax,
            demands,
            add_floor: F::neg_infinity(),
            rel_base: base,
            rel_rho: rho,
            rel_psum_floor: psum_floor,
            kappa_slack: F::zero(),
            kappa_factor: (one - delta).powi((s + 1) as i32),
        })
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn is_identity(&self) -> bool {
        self.scheme == GridScheme::Identity
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn v_min(&self) -> F {
        self.v_min
    }

    pub fn v_max(&self) -> F {
        self.v_max
    }

    /// The demand set, sorted ascending.
    pub fn demands(&self) -> &[F] {
        &self.demands
    }

    pub fn demand_value(&self, index: usize) -> F {
        self.demands[index]
    }

    /// Index of an exact demand value.
    pub fn demand_index(&self, v: F) -> Option<usize> {
        position_of(&self.demands, v)
    }

    /// Index of the largest demand `<= v`, if any.
    pub fn demand_index_at_or_below(&self, v: F) -> Option<usize> {
        match self.demands.binary_search_by(|probe| probe.partial_cmp(&v).expect("finite")) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// Rounds `v` down to a representable value.
    ///
    /// Identity grids return `v` unchanged. The relative scheme sends any
    /// `v` below the anchor (zero and negative values included) to the zero
    /// point. The additive scheme rejects values below its partial-sum floor.
    pub fn round_down(&self, v: F) -> Result<F, SolveError> {
        match self.scheme {
            GridScheme::Identity => Ok(v),
            GridScheme::Additive => {
                if v < self.add_floor {
                    return Err(SolveError::OutOfRange(format!("{v}")));
                }
                Ok(self.additive_point(v))
            }
            GridScheme::Relative => {
                if v < self.v_min {
                    Ok(F::zero())
                } else {
                    Ok(self.relative_point(v))
                }
            }
        }
    }

    /// Rounds a running partial sum inside the Bellman recursions.
    ///
    /// Same lattice as [`Self::round_down`], but the geometric domain extends
    /// below the demand anchor down to the collapse guard.
    #[inline]
    pub fn round_psum(&self, v: F) -> F {
        match self.scheme {
            GridScheme::Identity => v,
            GridScheme::Additive => {
                debug_assert!(v >= self.add_floor, "partial sum below additive floor");
                self.additive_point(v)
            }
            GridScheme::Relative => {
                if v < self.rel_psum_floor {
                    F::zero()
                } else {
                    self.relative_point(v)
                }
            }
        }
    }

    /// The relaxed demand lower bound used when testing admissibility.
    pub fn kappa(&self, v: F) -> F {
        match self.scheme {
            GridScheme::Identity => v,
            GridScheme::Additive => v - self.kappa_slack,
            GridScheme::Relative => v * self.kappa_factor,
        }
    }

    /// The reward threshold used by the difference recursion's base case.
    pub fn kappa_reward(&self, r: F) -> F {
        match self.scheme {
            GridScheme::Identity | GridScheme::Relative => r,
            GridScheme::Additive => r + self.delta,
        }
    }

    /// Admissibility slack for the difference recursion's base case; nonzero
    /// only on identity grids, where re-deriving a sum as a chain of exact
    /// subtractions picks up representation noise.
    pub fn diff_slack(&self) -> F {
        match self.scheme {
            GridScheme::Identity => F::diff_slack(),
            _ => F::zero(),
        }
    }

    #[inline]
    fn additive_point(&self, v: F) -> F {
        F::from_i64(floor_ratio(v / self.delta)).expect("grid index in range") * self.delta
    }

    #[inline]
    fn relative_point(&self, v: F) -> F {
        debug_assert!(v > F::zero());
        let k = floor_log(v / self.rel_base, self.rel_rho);
        self.rel_base * self.rel_rho.powi(k as i32)
    }
}

/// `floor(x)` with a relative upward nudge so that exact lattice ratios are
/// not pushed down a cell by representation error.
fn floor_ratio<F: Real>(x: F) -> i64 {
    let nudge = F::floor_nudge() * F::one().max(x.abs());
    (x + nudge).floor().to_i64().expect("grid index fits i64")
}

/// `floor(log_rho(x))` with the same nudge discipline.
fn floor_log<F: Real>(x: F, rho: F) -> i64 {
    floor_ratio(x.ln() / rho.ln())
}

fn v_max_of<F: Real>(h_rmax: F, base: F) -> F {
    // The demand range never extends below the anchor itself.
    h_rmax.max(base)
}
