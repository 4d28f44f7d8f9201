//! Tabular finite-horizon constrained MDP.
//!
//! An instance is a tuple `(S, A, P, r, c, H)` with an initial state: `S`
//! states, `A` actions, per-epoch transition distributions `P[h][s][a]`,
//! rewards `r[h][s][a]`, and costs `c[h][s][a]`. Epochs are `1..=H` in the
//! math and `0..H` in the code; states, actions, and files are 0-based
//! throughout.

use crate::error::ModelError;
use crate::scalar::Real;

/// A tabular, finite-horizon constrained MDP.
///
/// Immutable after construction; all accessors take `&self` and the type is
/// `Send + Sync`, so instances can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Cmdp<F> {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    initial_state: usize,
    /// Flat `[h][s][a][s']` transition probabilities.
    transitions: Vec<F>,
    /// Flat `[h][s][a]` rewards.
    rewards: Vec<F>,
    /// Flat `[h][s][a]` costs.
    costs: Vec<F>,
    r_max: F,
    r_min: F,
    p_min: F,
}

impl<F: Real> Cmdp<F> {
    /// Builds an instance from nested tables shaped `[h][s][a][s']` /
    /// `[h][s][a]`, validating shapes, probability rows, and finiteness.
    pub fn from_tables(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        initial_state: usize,
        transitions: Vec<Vec<Vec<Vec<F>>>>,
        rewards: Vec<Vec<Vec<F>>>,
        costs: Vec<Vec<Vec<F>>>,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::EmptyDimension("horizon"));
        }
        if num_states == 0 {
            return Err(ModelError::EmptyDimension("num_states"));
        }
        if num_actions == 0 {
            return Err(ModelError::EmptyDimension("num_actions"));
        }
        if initial_state >= num_states {
            return Err(ModelError::InitialStateOutOfRange {
                got: initial_state,
                num_states,
            });
        }

        let mut flat_p = Vec::with_capacity(horizon * num_states * num_actions * num_states);
        let mut flat_r = Vec::with_capacity(horizon * num_states * num_actions);
        let mut flat_c = flat_r.clone();

        if transitions.len() != horizon {
            return Err(ModelError::BadShape { table: "transitions", index: transitions.len() });
        }
        if rewards.len() != horizon {
            return Err(ModelError::BadShape { table: "rewards", index: rewards.len() });
        }
        if costs.len() != horizon {
            return Err(ModelError::BadShape { table: "costs", index: costs.len() });
        }
        for h in 0..horizon {
            if transitions[h].len() != num_states
                || rewards[h].len() != num_states
                || costs[h].len() != num_states
            {
                return Err(ModelError::BadShape { table: "per-state tables", index: h });
            }
            for s in 0..num_states {
                if transitions[h][s].len() != num_actions
                    || rewards[h][s].len() != num_actions
                    || costs[h][s].len() != num_actions
                {
                    return Err(ModelError::BadShape { table: "per-action tables", index: s });
                }
                for a in 0..num_actions {
                    let row = &transitions[h][s][a];
                    if row.len() != num_states {
                        return Err(ModelError::BadShape { table: "transition row", index: a });
                    }
                    flat_p.extend_from_slice(row);
                    flat_r.push(rewards[h][s][a]);
                    flat_c.push(costs[h][s][a]);
                }
            }
        }
        Self::from_flat(horizon, num_states, num_actions, initial_state, flat_p, flat_r, flat_c)
    }

    /// Builds an instance from flat tables; the fast path used by generators.
    pub fn from_flat(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        initial_state: usize,
        transitions: Vec<F>,
        rewards: Vec<F>,
        costs: Vec<F>,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::EmptyDimension("horizon"));
        }
        if num_states == 0 {
            return Err(ModelError::EmptyDimension("num_states"));
        }
        if num_actions == 0 {
            return Err(ModelError::EmptyDimension("num_actions"));
        }
        if initial_state >= num_states {
            return Err(ModelError::InitialStateOutOfRange { got: initial_state, num_states });
        }
        let n_sa = horizon * num_states * num_actions;
        if transitions.len() != n_sa * num_states {
            return Err(ModelError::BadShape { table: "transitions", index: transitions.len() });
        }
        if rewards.len() != n_sa {
            return Err(ModelError::BadShape { table: "rewards", index: rewards.len() });
        }
        if costs.len() != n_sa {
            return Err(ModelError::BadShape { table: "costs", index: costs.len() });
        }
        if rewards.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite("rewards"));
        }
        if costs.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite("costs"));
        }

        let one = F::one();
        let tol = F::prob_tol();
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let base = ((h * num_states + s) * num_actions + a) * num_states;
                    let row = &transitions[base..base + num_states];
                    if row.iter().any(|x| !x.is_finite()) {
                        return Err(ModelError::NonFinite("transitions"));
                    }
                    if let Some(next) = row.iter().position(|&p| p < F::zero()) {
                        return Err(ModelError::NegativeProbability { h, s, a, next });
                    }
                    let mut sum = F::zero();
                    for &p in row {
                        sum += p;
                    }
                    if (sum - one).abs() > tol {
                        return Err(ModelError::RowSum { h, s, a, sum: format!("{sum}") });
                    }
                }
            }
        }

        let mut mdp = Cmdp {
            num_states,
            num_actions,
            horizon,
            initial_state,
            transitions,
            rewards,
            costs,
            r_max: F::zero(),
            r_min: F::zero(),
            p_min: F::one(),
        };
        let (r_max, r_min, p_min) = mdp.recompute_derived();
        mdp.r_max = r_max;
        mdp.r_min = r_min;
        mdp.p_min = p_min;
        Ok(mdp)
    }

    /// Recomputes `(r_max, r_min, p_min)` from the raw tables.
    ///
    /// `p_min` is the minimum *strictly positive* transition probability, so
    /// that sparse instances keep a nonzero geometric-grid anchor; when every
    /// row is deterministic this is 1.
    pub fn recompute_derived(&self) -> (F, F, F) {
        let mut r_max = F::zero();
        let mut r_min = F::infinity();
        for &r in &self.rewards {
            r_max = r_max.max(r.abs());
            r_min = r_min.min(r);
        }
        let mut p_min = F::one();
        for &p in &self.transitions {
            if p > F::zero() {
                p_min = p_min.min(p);
            }
        }
        (r_max, r_min, p_min)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    /// Maximum reward magnitude, `max |r|`.
    pub fn r_max(&self) -> F {
        self.r_max
    }

    /// True minimum reward, `min r`.
    pub fn r_min(&self) -> F {
        self.r_min
    }

    /// Minimum strictly positive transition probability.
    pub fn p_min(&self) -> F {
        self.p_min
    }

    /// Minimum strictly positive reward, if any reward is positive.
    pub fn r_min_positive(&self) -> Option<F> {
        let mut out: Option<F> = None;
        for &r in &self.rewards {
            if r > F::zero() {
                out = Some(match out {
                    Some(cur) => cur.min(r),
                    None => r,
                });
            }
        }
        out
    }

    pub fn has_negative_reward(&self) -> bool {
        self.rewards.iter().any(|&r| r < F::zero())
    }

    #[inline]
    fn sa_index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.num_states && a < self.num_actions);
        (h * self.num_states + s) * self.num_actions + a
    }

    /// Transition probability `P_h(s' | s, a)`; `h` is 0-based.
    #[inline]
    pub fn p(&self, h: usize, s: usize, a: usize, next: usize) -> F {
        debug_assert!(next < self.num_states);
        self.transitions[self.sa_index(h, s, a) * self.num_states + next]
    }

    /// The transition row `P_h(· | s, a)`.
    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[F] {
        let base = self.sa_index(h, s, a) * self.num_states;
        &self.transitions[base..base + self.num_states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> F {
        self.rewards[self.sa_index(h, s, a)]
    }

    #[inline]
    pub fn cost(&self, h: usize, s: usize, a: usize) -> F {
        self.costs[self.sa_index(h, s, a)]
    }

    /// Successor states with strictly positive probability under `(h, s, a)`.
    pub fn support(&self, h: usize, s: usize, a: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        self.row(h, s, a)
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > F::zero())
    }

    /// True when every transition row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.transitions.iter().all(|&p| p == F::zero() || p == F::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Cmdp<f64> {
        // Two states, one action; always moves to state 1.
        Cmdp::from_tables(
            2,
            2,
            1,
            0,
            vec![
                vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
                vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
            ],
            vec![vec![vec![1.0], vec![2.0]], vec![vec![3.0], vec![-4.0]]],
            vec![vec![vec![0.5], vec![0.0]], vec![vec![1.0], vec![2.0]]],
        )
        .unwrap()
    }

    #[test]
    fn derived_stats_match_recompute() {
        let m = chain();
        assert_eq!(m.r_max(), 4.0);
        assert_eq!(m.r_min(), -4.0);
        assert_eq!(m.p_min(), 1.0);
        let (r_max, r_min, p_min) = m.recompute_derived();
        assert_eq!((m.r_max(), m.r_min(), m.p_min()), (r_max, r_min, p_min));
    }

    #[test]
    fn rejects_bad_probability_rows() {
        let bad = Cmdp::from_tables(
            1,
            1,
            1,
            0,
            vec![vec![vec![vec![0.5]]]],
            vec![vec![vec![0.0]]],
            vec![vec![vec![0.0]]],
        );
        assert!(matches!(bad, Err(ModelError::RowSum { .. })));

        let neg = Cmdp::from_tables(
            1,
            2,
            1,
            0,
            vec![vec![vec![vec![1.5, -0.5]], vec![vec![0.5, 0.5]]]],
            vec![vec![vec![0.0], vec![0.0]]],
            vec![vec![vec![0.0], vec![0.0]]],
        );
        assert!(matches!(neg, Err(ModelError::NegativeProbability { .. })));
    }

    #[test]
    fn rejects_initial_state_out_of_range() {
        let bad = Cmdp::<f64>::from_tables(
            1,
            1,
            1,
            7,
            vec![vec![vec![vec![1.0]]]],
            vec![vec![vec![0.0]]],
            vec![vec![vec![0.0]]],
        );
        assert!(matches!(bad, Err(ModelError::InitialStateOutOfRange { got: 7, .. })));
    }

    #[test]
    fn p_min_ignores_zero_entries() {
        let m = Cmdp::from_tables(
            1,
            2,
            1,
            0,
            vec![vec![vec![vec![0.25, 0.75]], vec![vec![0.0, 1.0]]]],
            vec![vec![vec![0.0], vec![0.0]]],
            vec![vec![vec![0.0], vec![0.0]]],
        )
        .unwrap();
        assert_eq!(m.p_min(), 0.25);
        assert_eq!(m.support(0, 1, 0).collect::<Vec<_>>(), vec![(1, 1.0)]);
    }
}
