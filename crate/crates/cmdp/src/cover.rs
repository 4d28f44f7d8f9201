//! Value-demand augmentation: the exact covering reduction.
//!
//! The packing problem "maximize value subject to a cost budget" is solved
//! through its covering dual "minimize cost subject to a value demand". States
//! are augmented with a demanded future value `(s, v)`; an action now also
//! commits to a demand vector, one entry per successor state, and is
//! admissible at `(s, v)` when
//!
//! ```text
//! r_h(s, a) + sum_{s'} P_h(s' | s, a) * v_{s'}  >=  v.
//! ```
//!
//! Minimizing the criterion cost over this augmented MDP (terminal cost `0`
//! iff the residual demand is non-positive) yields, for every initial demand
//! `v`, the cheapest deterministic policy that is guaranteed to deliver value
//! at least `v`. Scanning the root costs for the largest demand within budget
//! then solves the original problem.
//!
//! This module is the exact reference path: demands range over the full
//! finite value space, which is exponential in general and enumerable only at
//! desk scale. The rounded, polynomial path lives in [`crate::bellman`] and
//! [`crate::fptas`].

use crate::cost::ExtCost;
use crate::criterion::Criterion;
use crate::error::{ExecError, SolveError};
use crate::fptas::{Mode, SolveOutcome, Variant};
use crate::grid::ValueGrid;
use crate::model::Cmdp;
use crate::policy::DecisionRule;
use crate::scalar::{position_of, sort_dedup, Real};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default cap on the total number of value-space entries.
pub const DEFAULT_VALUE_CAP: usize = 1_000_000;

// ---------------------------------------------------------------------------
// Value space
// ---------------------------------------------------------------------------

/// The exact per-epoch, per-state sets of achievable policy values.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSpace<F> {
    /// `per_state[h][s]`, `h = 0..=H`, sorted ascending; layer `H` is `{0}`.
    per_state: Vec<Vec<Vec<F>>>,
    /// Union of all layers, sorted ascending.
    union: Vec<F>,
}

impl<F: Real> ValueSpace<F> {
    pub fn layer(&self, h: usize, s: usize) -> &[F] {
        &self.per_state[h][s]
    }

    pub fn union(&self) -> &[F] {
        &self.union
    }

    pub fn len(&self) -> usize {
        self.union.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }
}

/// Enumerates the value space by backward recursion.
///
/// Layer `H` is `{0}`; layer `h` collects, over actions and over every
/// combination of successor values from layer `h+1`, the sums
/// `r_h(s,a) + sum_{s'} P_h(s'|s,a) v_{s'}`. Candidates are computed in a
/// fixed front-to-back summation order and deduplicated by exact equality,
/// so algebraically identical values collapse reproducibly. Zero-probability
/// successors contribute nothing and are skipped.
pub fn value_space<F: Real>(cmdp: &Cmdp<F>, cap: usize) -> Result<ValueSpace<F>, SolveError> {
    let (num_states, num_actions, horizon) = (cmdp.num_states(), cmdp.num_actions(), cmdp.horizon());
    let mut per_state: Vec<Vec<Vec<F>>> = vec![Vec::new(); horizon + 1];
    per_state[horizon] = vec![vec![F::zero()]; num_states];
    let mut total = num_states;

    for h in (0..horizon).rev() {
        let mut layer = Vec::with_capacity(num_states);
        for s in 0..num_states {
            let mut values = Vec::new();
            for a in 0..num_actions {
                let support: Vec<(usize, F)> = cmdp.support(h, s, a).collect();
                // Cross product over the supported successors' value sets.
                let mut combos: usize = 1;
                for &(t, _) in &support {
                    combos = combos.saturating_mul(per_state[h + 1][t].len());
                }
                if combos.saturating_add(total) > cap {
                    return Err(SolveError::CapExceeded { size: combos.saturating_add(total), cap });
                }
                let mut odometer = vec![0usize; support.len()];
                loop {
                    let mut v = cmdp.reward(h, s, a);
                    for (i, &(t, p)) in support.iter().enumerate() {
                        v = v + p * per_state[h + 1][t][odometer[i]];
                    }
                    values.push(v);
                    // Advance the odometer.
                    let mut i = 0;
                    loop {
                        if i == support.len() {
                            break;
                        }
                        odometer[i] += 1;
                        if odometer[i] < per_state[h + 1][support[i].0].len() {
                            break;
                        }
                        odometer[i] = 0;
                        i += 1;
                    }
                    if i == support.len() {
                        break;
                    }
                }
            }
            sort_dedup(&mut values);
            total += values.len();
            if total > cap {
                return Err(SolveError::CapExceeded { size: total, cap });
            }
            layer.push(values);
        }
        per_state[h] = layer;
    }

    let mut union: Vec<F> = per_state.iter().flatten().flatten().copied().collect();
    sort_dedup(&mut union);
    Ok(ValueSpace { per_state, union })
}

// ---------------------------------------------------------------------------
// Cover MDP handle
// ---------------------------------------------------------------------------

/// A view of the value-augmented cost-minimization problem.
#[derive(Debug, Clone, Copy)]
pub struct CoverMdp<'a, F> {
    pub cmdp: &'a Cmdp<F>,
    pub criterion: Criterion,
    pub space: &'a ValueSpace<F>,
}

/// Builds the cover problem handle for an already-enumerated value space.
pub fn build_cover_mdp<'a, F: Real>(
    cmdp: &'a Cmdp<F>,
    criterion: Criterion,
    space: &'a ValueSpace<F>,
) -> CoverMdp<'a, F> {
    CoverMdp { cmdp, criterion, space }
}

impl<'a, F: Real> CoverMdp<'a, F> {
    /// Number of augmented states `S x |V|`.
    pub fn augmented_state_count(&self) -> usize {
        self.cmdp.num_states() * self.space.union.len()
    }

    /// The demand-admissibility test: does `(a, demands)` cover demand `v`
    /// at `(h, s)`?
    pub fn admissible(&self, h: usize, s: usize, a: usize, v: F, demands: &[F]) -> bool {
        debug_assert_eq!(demands.len(), self.cmdp.num_states());
        let mut lhs = self.cmdp.reward(h, s, a);
        for (t, p) in self.cmdp.support(h, s, a) {
            lhs = lhs + p * demands[t];
        }
        lhs >= v
    }

    /// Terminal cost of an augmented state: `0` iff the demand is met by the
    /// empty continuation.
    pub fn terminal_cost(&self, v: F) -> ExtCost<F> {
        self.criterion.terminal_cost(v)
    }
}

// ---------------------------------------------------------------------------
// Cost tables and augmented policies
// ---------------------------------------------------------------------------

/// Optimal cost per `(epoch, state, demand index)`; layer `H` is terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable<F> {
    horizon: usize,
    num_states: usize,
    num_demands: usize,
    data: Vec<ExtCost<F>>,
}

impl<F: Real> CostTable<F> {
    /// A table whose terminal layer is filled with the demand indicator and
    /// whose other layers start at `Infinite`.
    pub fn new(horizon: usize, num_states: usize, demands: &[F]) -> Self {
        let num_demands = demands.len();
        let mut data = vec![ExtCost::Infinite; (horizon + 1) * num_states * num_demands];
        for s in 0..num_states {
            for (i, &v) in demands.iter().enumerate() {
                let idx = ((horizon * num_states) + s) * num_demands + i;
                data[idx] = ExtCost::indicator(v <= F::zero());
            }
        }
        CostTable { horizon, num_states, num_demands, data }
    }

    #[inline]
    fn index(&self, h: usize, s: usize, v: usize) -> usize {
        debug_assert!(h <= self.horizon && s < self.num_states && v < self.num_demands);
        (h * self.num_states + s) * self.num_demands + v
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, v: usize) -> ExtCost<F> {
        self.data[self.index(h, s, v)]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, v: usize, cost: ExtCost<F>) {
        let idx = self.index(h, s, v);
        self.data[idx] = cost;
    }

    /// The cost row of one `(epoch, state)` over all demand indices.
    pub fn row(&self, h: usize, s: usize) -> &[ExtCost<F>] {
        let base = self.index(h, s, 0);
        &self.data[base..base + self.num_demands]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_demands(&self) -> usize {
        self.num_demands
    }
}

/// One augmented decision: an action plus the committed demand index per
/// successor state (entries for zero-probability successors are present but
/// cost-irrelevant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyEntry {
    pub action: usize,
    pub demand_indices: Vec<u32>,
}

/// A deterministic policy over augmented states `(epoch, state, demand)`.
///
/// Entries exist for every augmented state whose optimal cost is finite;
/// `None` marks demands that cannot be covered from that state.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPolicy<F> {
    grid: ValueGrid<F>,
    horizon: usize,
    num_states: usize,
    entries: Vec<Option<PolicyEntry>>,
}

impl<F: Real> AugmentedPolicy<F> {
    pub fn new(grid: ValueGrid<F>, horizon: usize, num_states: usize) -> Self {
        let n = horizon * num_states * grid.demands().len();
        AugmentedPolicy { grid, horizon, num_states, entries: vec![None; n] }
    }

    pub fn grid(&self) -> &ValueGrid<F> {
        &self.grid
    }

    pub fn demands(&self) -> &[F] {
        self.grid.demands()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    fn index(&self, h: usize, s: usize, v: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.num_states && v < self.demands().len());
        (h * self.num_states + s) * self.demands().len() + v
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, v: usize) -> Option<&PolicyEntry> {
        self.entries[self.index(h, s, v)].as_ref()
    }

    pub fn set(&mut self, h: usize, s: usize, v: usize, entry: PolicyEntry) {
        let idx = self.index(h, s, v);
        self.entries[idx] = Some(entry);
    }
}

// ---------------------------------------------------------------------------
// Augmented evaluation
// ---------------------------------------------------------------------------

/// Exact expected value of the policy from every augmented state, by the
/// policy-evaluation recursion over the augmented structure. `None` marks
/// states from which the policy is undefined.
pub fn augmented_value_table<F: Real>(
    cmdp: &Cmdp<F>,
    policy: &AugmentedPolicy<F>,
) -> Vec<Vec<Vec<Option<F>>>> {
    let (num_states, horizon) = (cmdp.num_states(), cmdp.horizon());
    let nd = policy.demands().len();
    let mut table = vec![vec![vec![None; nd]; num_states]; horizon + 1];
    table[horizon] = vec![vec![Some(F::zero()); nd]; num_states];

    for h in (0..horizon).rev() {
        for s in 0..num_states {
            for v in 0..nd {
                let Some(entry) = policy.get(h, s, v) else { continue };
                let mut out = Some(cmdp.reward(h, s, entry.action));
                for (t, p) in cmdp.support(h, s, entry.action) {
                    let child = table[h + 1][t][entry.demand_indices[t] as usize];
                    out = match (out, child) {
                        (Some(acc), Some(c)) => Some(acc + p * c),
                        _ => None,
                    };
                }
                table[h][s][v] = out;
            }
        }
    }
    table
}

/// Exact criterion cost of the policy from every augmented state, by the
/// time-recursive fold over the augmented structure. Augmented states with no
/// entry cost `Infinite`; the terminal layer is the demand indicator.
pub fn augmented_cost_table<F: Real>(
    cmdp: &Cmdp<F>,
    criterion: Criterion,
    policy: &AugmentedPolicy<F>,
) -> CostTable<F> {
    let (num_states, horizon) = (cmdp.num_states(), cmdp.horizon());
    let demands = policy.demands().to_vec();
    let nd = demands.len();
    let mut table = CostTable::new(horizon, num_states, &demands);

    for h in (0..horizon).rev() {
        for s in 0..num_states {
            for v in 0..nd {
                let Some(entry) = policy.get(h, s, v) else { continue };
                let a = entry.action;
                let mut acc = criterion.fold_base();
                for t in (0..num_states).rev() {
                    let p = cmdp.p(h, s, a, t);
                    let child = table.get(h + 1, t, entry.demand_indices[t] as usize);
                    acc = criterion.alpha(criterion.beta(p, child), acc);
                }
                table.set(h, s, v, acc + cmdp.cost(h, s, a));
            }
        }
    }
    table
}

/// Adapts an augmented policy (with a fixed initial demand) into a
/// deterministic history policy: the demand coordinate is replayed along the
/// observed state path.
pub struct InducedRule<'a, F> {
    policy: &'a AugmentedPolicy<F>,
    initial_demand: usize,
}

impl<'a, F: Real> InducedRule<'a, F> {
    pub fn new(policy: &'a AugmentedPolicy<F>, initial_demand: usize) -> Self {
        InducedRule { policy, initial_demand }
    }
}

impl<'a, F: Real> DecisionRule for InducedRule<'a, F> {
    fn action(&self, epoch: usize, path: &[usize]) -> Result<usize, crate::error::EvalError> {
        let mut v = self.initial_demand;
        for t in 0..epoch {
            let entry = self
                .policy
                .get(t, path[t], v)
                .ok_or(crate::error::EvalError::UndefinedAction { h: t })?;
            v = entry.demand_indices[path[t + 1]] as usize;
        }
        self.policy
            .get(epoch, path[epoch], v)
            .map(|e| e.action)
            .ok_or(crate::error::EvalError::UndefinedAction { h: epoch })
    }
}

// ---------------------------------------------------------------------------
// Exact solve
// ---------------------------------------------------------------------------

/// Solves the covering problem exactly and scans the root row for the
/// largest demand within budget.
///
/// The returned outcome carries the full cost table, the augmented policy,
/// and exact value/cost certificates for the selected initial demand.
pub fn solve_exact<F: Real>(
    cmdp: &Cmdp<F>,
    criterion: Criterion,
    budget: F,
) -> Result<SolveOutcome<F>, SolveError> {
    solve_exact_with_cap(cmdp, criterion, budget, DEFAULT_VALUE_CAP)
}

/// [`solve_exact`] with an explicit value-space cap.
pub fn solve_exact_with_cap<F: Real>(
    cmdp: &Cmdp<F>,
    criterion: Criterion,
    budget: F,
    cap: usize,
) -> Result<SolveOutcome<F>, SolveError> {
    let space = value_space(cmdp, cap)?;
    let grid = ValueGrid::identity(space.union().to_vec());
    let (policy, table) = solve_cover(cmdp, criterion, &grid);
    Ok(crate::fptas::assemble_outcome(
        cmdp,
        criterion,
        Mode::Exact,
        Variant::Sum,
        None,
        policy,
        table,
        budget,
    ))
}

/// Backward induction over the cover MDP with exact partial-sum bookkeeping.
///
/// Each Bellman update minimizes over the action and the demand vector; the
/// inner minimization over demand vectors runs as a per-successor dynamic
/// program on the exact set of reachable partial sums
/// `r + sum_{s' < t} P(s') v_{s'}`. Ties break toward the lowest action
/// index, then the front-to-back smallest demand-index vector.
fn solve_cover<F: Real>(
    cmdp: &Cmdp<F>,
    criterion: Criterion,
    grid: &ValueGrid<F>,
) -> (AugmentedPolicy<F>, CostTable<F>) {
    let (num_states, num_actions, horizon) = (cmdp.num_states(), cmdp.num_actions(), cmdp.horizon());
    let demands: Vec<F> = grid.demands().to_vec();
    let nd = demands.len();
    let mut table = CostTable::new(horizon, num_states, &demands);
    let mut policy = AugmentedPolicy::new(grid.clone(), horizon, num_states);

    struct ActionPlan<F> {
        /// `sums[t]`: reachable partial sums before choosing successor `t`'s
        /// demand (`sums[0] = {r}`), sorted ascending.
        sums: Vec<Vec<F>>,
        /// `succ[t][u * nd + v]`: position in `sums[t+1]` after demand `v`;
        /// empty for zero-probability successors (position carries over).
        succ: Vec<Vec<u32>>,
        /// `beta[t][v]`: criterion-weighted child cost for successor `t`.
        beta: Vec<Vec<ExtCost<F>>>,
        /// `g[t]` / `arg[t]`: tail cost and argmin demand per partial sum.
        g: Vec<Vec<ExtCost<F>>>,
        arg: Vec<Vec<u32>>,
    }

    for h in (0..horizon).rev() {
        for s in 0..num_states {
            // Forward pass per action: reachable sums, successor positions,
            // and weighted child costs. Shared across all demand targets.
            let mut plans: Vec<ActionPlan<F>> = Vec::with_capacity(num_actions);
            for a in 0..num_actions {
                let mut sums: Vec<Vec<F>> = Vec::with_capacity(num_states + 1);
                sums.push(vec![cmdp.reward(h, s, a)]);
                let mut succ: Vec<Vec<u32>> = Vec::with_capacity(num_states);
                let mut beta: Vec<Vec<ExtCost<F>>> = Vec::with_capacity(num_states);
                for t in 0..num_states {
                    let p = cmdp.p(h, s, a, t);
                    beta.push(
                        (0..nd).map(|v| criterion.beta(p, table.get(h + 1, t, v))).collect(),
                    );
                    if p > F::zero() {
                        let cur = &sums[t];
                        let mut next: Vec<F> = Vec::with_capacity(cur.len() * nd);
                        for &u in cur {
                            for &v in &demands {
                                next.push(u + p * v);
                            }
                        }
                        sort_dedup(&mut next);
                        let mut map = Vec::with_capacity(cur.len() * nd);
                        for &u in cur {
                            for &v in &demands {
                                let pos = position_of(&next, u + p * v)
                                    .expect("sum inserted by the same expression");
                                map.push(pos as u32);
                            }
                        }
                        succ.push(map);
                        sums.push(next);
                    } else {
                        succ.push(Vec::new());
                        let carried = sums[t].clone();
                        sums.push(carried);
                    }
                }
                let g = sums.iter().map(|layer| vec![ExtCost::Infinite; layer.len()]).collect();
                let arg = sums.iter().map(|layer| vec![0u32; layer.len()]).collect();
                plans.push(ActionPlan { sums, succ, beta, g, arg });
            }

            for v_idx in 0..nd {
                let target = demands[v_idx];
                let mut best = ExtCost::Infinite;
                let mut best_a = usize::MAX;
                for (a, plan) in plans.iter_mut().enumerate() {
                    // Base case over the final sums: demand met iff the full
                    // committed sum reaches the target.
                    for (i, &u) in plan.sums[num_states].iter().enumerate() {
                        plan.g[num_states][i] = ExtCost::indicator(u >= target);
                    }
                    for t in (0..num_states).rev() {
                        let p = cmdp.p(h, s, a, t);
                        if p > F::zero() {
                            let (head, tail) = plan.g.split_at_mut(t + 1);
                            let g_next = &tail[0];
                            let g_cur = &mut head[t];
                            let beta_t = &plan.beta[t];
                            let succ_t = &plan.succ[t];
                            for i in 0..plan.sums[t].len() {
                                let mut cur = ExtCost::Infinite;
                                let mut arg = 0u32;
                                let row = &succ_t[i * nd..(i + 1) * nd];
                                for v in 0..nd {
                                    let cand = criterion
                                        .alpha(beta_t[v], g_next[row[v] as usize]);
                                    if cand < cur {
                                        cur = cand;
                                        arg = v as u32;
                                    }
                                }
                                g_cur[i] = cur;
                                plan.arg[t][i] = arg;
                            }
                        } else {
                            // No transition mass: the fold still applies one
                            // combiner step, and the committed demand is
                            // pinned to the lowest index.
                            let (head, tail) = plan.g.split_at_mut(t + 1);
                            let g_next = &tail[0];
                            let g_cur = &mut head[t];
                            let step = plan.beta[t][0];
                            for i in 0..plan.sums[t].len() {
                                g_cur[i] = criterion.alpha(step, g_next[i]);
                                plan.arg[t][i] = 0;
                            }
                        }
                    }
                    let total = plan.g[0][0] + cmdp.cost(h, s, a);
                    if total < best {
                        best = total;
                        best_a = a;
                    }
                }
                table.set(h, s, v_idx, best);
                if best.is_finite() {
                    let plan = &plans[best_a];
                    let mut demand_indices = Vec::with_capacity(num_states);
                    let mut pos = 0usize;
                    for t in 0..num_states {
                        let v = plan.arg[t][pos] as usize;
                        demand_indices.push(v as u32);
                        if cmdp.p(h, s, best_a, t) > F::zero() {
                            pos = plan.succ[t][pos * nd + v] as usize;
                        }
                    }
                    policy.set(h, s, v_idx, PolicyEntry { action: best_a, demand_indices });
                }
            }
        }
    }
    (policy, table)
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// One executed episode of an augmented policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    /// Visited states, length `H + 1`.
    pub states: Vec<usize>,
    /// Chosen actions, length `H`.
    pub actions: Vec<usize>,
    /// Immediate rewards, length `H`.
    pub rewards: Vec<F>,
    /// Immediate costs, length `H`.
    pub costs: Vec<F>,
    /// Demand held entering each epoch plus the terminal residual demand,
    /// length `H + 1`.
    pub demands: Vec<F>,
}

impl<F: Real> Trajectory<F> {
    pub fn total_reward(&self) -> F {
        let mut out = F::zero();
        for &r in &self.rewards {
            out += r;
        }
        out
    }

    pub fn total_cost(&self) -> F {
        let mut out = F::zero();
        for &c in &self.costs {
            out += c;
        }
        out
    }
}

/// Runs the augmented interaction for `H` steps from the initial state with
/// initial value demand `v0`, sampling transitions with a seeded generator.
///
/// The policy is read at `(h, s, demand)`, the demand for the sampled
/// successor is carried forward, and the whole record is returned.
pub fn execute<F: Real>(
    policy: &AugmentedPolicy<F>,
    cmdp: &Cmdp<F>,
    v0: F,
    seed: u64,
) -> Result<Trajectory<F>, ExecError> {
    if policy.horizon() != cmdp.horizon() || policy.num_states() != cmdp.num_states() {
        return Err(ExecError::DimensionMismatch);
    }
    let mut v_idx = policy
        .grid()
        .demand_index(v0)
        .ok_or_else(|| ExecError::InvalidDemand(format!("{v0}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = cmdp.initial_state();
    let mut out = Trajectory {
        states: vec![s],
        actions: Vec::with_capacity(cmdp.horizon()),
        rewards: Vec::with_capacity(cmdp.horizon()),
        costs: Vec::with_capacity(cmdp.horizon()),
        demands: vec![policy.grid().demand_value(v_idx)],
    };

    for h in 0..cmdp.horizon() {
        let entry = policy
            .get(h, s, v_idx)
            .ok_or(ExecError::MissingEntry { h, s, demand: v_idx })?;
        out.actions.push(entry.action);
        out.rewards.push(cmdp.reward(h, s, entry.action));
        out.costs.push(cmdp.cost(h, s, entry.action));

        let draw = F::from_f64_lossy(rng.random::<f64>());
        let mut acc = F::zero();
        let mut next = None;
        for (t, p) in cmdp.support(h, s, entry.action) {
            acc += p;
            next = Some(t);
            if draw < acc {
                break;
            }
        }
        let next = next.expect("every row has support");
        v_idx = entry.demand_indices[next] as usize;
        s = next;
        out.states.push(s);
        out.demands.push(policy.grid().demand_value(v_idx));
    }
    Ok(out)
}
