//! Deterministic policies over observed histories.
//!
//! A deterministic policy maps each observed history to an action. Since the
//! policy itself fixes the actions along the way, a history reachable under
//! the policy is identified by its state path `(s_0, s_1, ..., s_{h-1})`;
//! that path is the key used everywhere in this crate.

use std::collections::HashMap;

use crate::error::EvalError;

/// Anything that deterministically picks actions from state paths.
///
/// `epoch` is 0-based and `path` holds the states observed so far, starting
/// with the initial state (`path.len() == epoch + 1`).
pub trait DecisionRule {
    fn action(&self, epoch: usize, path: &[usize]) -> Result<usize, EvalError>;
}

/// An explicit deterministic policy, either Markov (one action per epoch and
/// state) or a table over state paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryPolicy {
    /// `actions[h][s]` is the action at epoch `h` in state `s`.
    Markov(Vec<Vec<usize>>),
    /// Map from state path to action; must cover every path reachable under
    /// the policy itself.
    Tree(HashMap<Vec<usize>, usize>),
}

impl HistoryPolicy {
    /// A policy playing a fixed action everywhere.
    pub fn constant(horizon: usize, num_states: usize, action: usize) -> Self {
        HistoryPolicy::Markov(vec![vec![action; num_states]; horizon])
    }

    pub fn from_paths(entries: impl IntoIterator<Item = (Vec<usize>, usize)>) -> Self {
        HistoryPolicy::Tree(entries.into_iter().collect())
    }
}

impl DecisionRule for HistoryPolicy {
    fn action(&self, epoch: usize, path: &[usize]) -> Result<usize, EvalError> {
        debug_assert_eq!(path.len(), epoch + 1);
        match self {
            HistoryPolicy::Markov(actions) => actions
                .get(epoch)
                .and_then(|row| row.get(*path.last().expect("non-empty path")))
                .copied()
                .ok_or(EvalError::UndefinedAction { h: epoch }),
            HistoryPolicy::Tree(map) => {
                map.get(path).copied().ok_or(EvalError::UndefinedAction { h: epoch })
            }
        }
    }
}

impl<R: DecisionRule + ?Sized> DecisionRule for &R {
    fn action(&self, epoch: usize, path: &[usize]) -> Result<usize, EvalError> {
        (**self).action(epoch, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markov_lookup_uses_last_state() {
        let pol = HistoryPolicy::Markov(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(pol.action(0, &[1]).unwrap(), 1);
        assert_eq!(pol.action(1, &[1, 0]).unwrap(), 1);
        assert!(pol.action(2, &[0, 0, 0]).is_err());
    }

    #[test]
    fn tree_lookup_requires_exact_path() {
        let pol = HistoryPolicy::from_paths([(vec![0], 1), (vec![0, 1], 0)]);
        assert_eq!(pol.action(0, &[0]).unwrap(), 1);
        assert_eq!(pol.action(1, &[0, 1]).unwrap(), 0);
        assert_eq!(pol.action(1, &[0, 0]), Err(EvalError::UndefinedAction { h: 1 }));
    }
}
