//! Finite tabular MDP data model.
//!
//! States and actions are dense integer indices `0..n`; environment builders
//! own any mapping to domain values (e.g. inventory level -10..10 maps to
//! index 0..20). All types are immutable after construction and all
//! operations are pure given their RNG stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability rows summing to one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A finite MDP: cost table `c(s, a, s')`, discount, and the cached cost
/// bound `c_bar = max |c|`.
#[derive(Clone, Debug, Serialize)]
pub struct MdpModel {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    cost: Vec<f64>,
    c_bar: f64,
}

impl MdpModel {
    /// Builds a model from a dense cost table laid out as `[s][a][s']`.
    pub fn new(n_states: usize, n_actions: usize, gamma: f64, cost: Vec<f64>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::DimensionMismatch {
                context: "model needs at least one state and one action".into(),
            });
        }
        if cost.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "cost table has {} entries, expected {}",
                    cost.len(),
                    n_states * n_actions * n_states
                ),
            });
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::DimensionMismatch {
                context: format!("gamma must lie in (0, 1), got {gamma}"),
            });
        }
        if let Some(bad) = cost.iter().find(|c| !c.is_finite()) {
            return Err(Error::DimensionMismatch {
                context: format!("non-finite cost entry {bad}"),
            });
        }
        let c_bar = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Ok(Self {
            n_states,
            n_actions,
            gamma,
            cost,
            c_bar,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `max_{s,a,s'} |c(s,a,s')|`.
    pub fn c_bar(&self) -> f64 {
        self.c_bar
    }

    /// `c_bar / (1 - gamma)`, the bound every value function respects.
    pub fn value_bound(&self) -> f64 {
        self.c_bar / (1.0 - self.gamma)
    }

    pub fn cost(&self, s: usize, a: usize, next: usize) -> f64 {
        self.cost[(s * self.n_actions + a) * self.n_states + next]
    }

    /// The slice `c(s, a, ·)` over next states.
    pub fn cost_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.cost[base..base + self.n_states]
    }
}

/// Row-stochastic transition table `q(s' | s, a)`.
///
/// Doubles as a sampled posterior draw: posterior sampling produces values of
/// this same type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernel {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TransitionKernel {
    /// Builds and validates a kernel from a dense `[s][a][s']` table.
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        let k = Self::new_unchecked(n_states, n_actions, probs)?;
        validate_kernel(&k)?;
        Ok(k)
    }

    /// Builds a kernel without the stochasticity check, for constructing
    /// candidates that `validate_kernel` will judge.
    pub fn new_unchecked(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "kernel table has {} entries, expected {}",
                    probs.len(),
                    n_states * n_actions * n_states
                ),
            });
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.probs[base..base + self.n_states]
    }

    pub(crate) fn row_mut(&mut self, s: usize, a: usize) -> &mut [f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &mut self.probs[base..base + self.n_states]
    }
}

/// Accepts iff every row of the kernel is a probability vector within
/// [`ROW_SUM_TOL`].
pub fn validate_kernel(kernel: &TransitionKernel) -> Result<()> {
    for s in 0..kernel.n_states {
        for a in 0..kernel.n_actions {
            validate_row(kernel.row(s, a), s, a)?;
        }
    }
    Ok(())
}

fn validate_row(row: &[f64], s: usize, a: usize) -> Result<()> {
    for (next, &p) in row.iter().enumerate() {
        if p.is_nan() || p < 0.0 {
            return Err(Error::NegativeEntry {
                s,
                a,
                next,
                value: p,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    let deviation = sum - 1.0;
    if deviation.abs() > ROW_SUM_TOL {
        return Err(Error::RowSumMismatch { s, a, deviation });
    }
    Ok(())
}

/// Stochastic Markov policy `pi(a | s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl Policy {
    /// Builds and validates a policy from a dense `[s][a]` table.
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "policy table has {} entries, expected {}",
                    probs.len(),
                    n_states * n_actions
                ),
            });
        }
        let p = Self {
            n_states,
            n_actions,
            probs,
        };
        for s in 0..n_states {
            validate_row(p.row(s), s, 0)?;
        }
        Ok(p)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// Point mass on one action in every state.
    pub fn point_mass(n_states: usize, n_actions: usize, action: usize) -> Self {
        let mut probs = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            probs[s * n_actions + action] = 1.0;
        }
        Self {
            n_states,
            n_actions,
            probs,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    /// The action with the highest probability, lowest index on ties.
    pub fn greedy_action(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = a;
            }
        }
        best
    }
}

/// One continuing trajectory: ordered `(state, action, next_state)` triples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub start_state: usize,
    pub steps: Vec<(usize, usize, usize)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Last state reached, i.e. where a continuation would start.
    pub fn final_state(&self) -> usize {
        self.steps.last().map_or(self.start_state, |t| t.2)
    }

    /// Checks that consecutive triples chain.
    pub fn is_chained(&self) -> bool {
        let mut cur = self.start_state;
        for &(s, _, next) in &self.steps {
            if s != cur {
                return false;
            }
            cur = next;
        }
        true
    }
}

/// Occurrence counts `m(s, a, s')` from an observed trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionCounts {
    n_states: usize,
    n_actions: usize,
    counts: Vec<u64>,
}

impl TransitionCounts {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            counts: vec![0; n_states * n_actions * n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, s: usize, a: usize, next: usize) -> u64 {
        self.counts[(s * self.n_actions + a) * self.n_states + next]
    }

    pub fn record(&mut self, s: usize, a: usize, next: usize) {
        self.counts[(s * self.n_actions + a) * self.n_states + next] += 1;
    }

    pub fn row(&self, s: usize, a: usize) -> &[u64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.counts[base..base + self.n_states]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &TransitionCounts) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
    }
}

/// Draws an index from a probability row with a single uniform variate.
pub(crate) fn sample_index(row: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Row sums to 1 within tolerance; fall back to the last positive entry.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// Simulates `steps` transitions of the Markov chain induced by `kernel` and
/// `policy`, starting at `start`. Deterministic given the RNG stream.
pub fn simulate(
    kernel: &TransitionKernel,
    policy: &Policy,
    start: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    if start >= kernel.n_states {
        return Err(Error::InvalidStart {
            state: start,
            n_states: kernel.n_states,
        });
    }
    let mut traj = Trajectory {
        start_state: start,
        steps: Vec::with_capacity(steps),
    };
    let mut state = start;
    for _ in 0..steps {
        let action = sample_index(policy.row(state), rng);
        let next = sample_index(kernel.row(state, action), rng);
        traj.steps.push((state, action, next));
        state = next;
    }
    Ok(traj)
}

/// Exact occurrence counts of every `(s, a, s')` tuple in the trajectory.
pub fn count_transitions(
    traj: &Trajectory,
    n_states: usize,
    n_actions: usize,
) -> TransitionCounts {
    let mut counts = TransitionCounts::zeros(n_states, n_actions);
    for &(s, a, next) in &traj.steps {
        counts.record(s, a, next);
    }
    counts
}

/// Action-marginalized state chain `P(s' | s) = sum_a pi(a|s) q(s'|s,a)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateChain {
    n_states: usize,
    probs: Vec<f64>,
}

impl StateChain {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_states..(s + 1) * self.n_states]
    }
}

pub fn induced_chain(kernel: &TransitionKernel, policy: &Policy) -> StateChain {
    let n = kernel.n_states;
    let mut probs = vec![0.0; n * n];
    for s in 0..n {
        let row = &mut probs[s * n..(s + 1) * n];
        for a in 0..kernel.n_actions {
            let pa = policy.prob(s, a);
            if pa == 0.0 {
                continue;
            }
            for (next, &q) in kernel.row(s, a).iter().enumerate() {
                row[next] += pa * q;
            }
        }
    }
    StateChain { n_states: n, probs }
}

const STATIONARY_CAP: usize = 1_000_000;

/// Stationary distribution of a state chain, by damped power iteration with
/// a Cesaro-averaged fallback, starting from the uniform vector.
///
/// The damped update `x <- (x + xP) / 2` converges geometrically on any
/// unichain; the running Cesaro average covers periodic corner cases. Returns
/// the first iterate whose residual `||mu P - mu||_1` falls below `tol`.
pub fn stationary_distribution(chain: &StateChain, tol: f64) -> Result<Vec<f64>> {
    let n = chain.n_states;
    let apply = |x: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (s, &xs) in x.iter().enumerate() {
            if xs == 0.0 {
                continue;
            }
            for (next, &p) in chain.row(s).iter().enumerate() {
                out[next] += xs * p;
            }
        }
    };
    let residual = |x: &[f64], scratch: &mut [f64]| {
        apply(x, scratch);
        x.iter()
            .zip(scratch.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    };

    let mut x = vec![1.0 / n as f64; n];
    let mut step = vec![0.0; n];
    let mut cesaro = x.clone();
    let mut scratch = vec![0.0; n];
    let mut best_res = f64::INFINITY;

    for it in 0..STATIONARY_CAP {
        let res = residual(&x, &mut scratch);
        best_res = best_res.min(res);
        if res <= tol {
            normalize(&mut x);
            return Ok(x);
        }
        apply(&x, &mut step);
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi = 0.5 * (*xi + si);
        }
        let k = (it + 2) as f64;
        for (ci, xi) in cesaro.iter_mut().zip(&x) {
            *ci += (xi - *ci) / k;
        }
        if it % 1024 == 1023 && residual(&cesaro, &mut scratch) <= tol {
            normalize(&mut cesaro);
            return Ok(cesaro);
        }
    }
    Err(Error::NonConvergence {
        residual: best_res,
        iterations: STATIONARY_CAP,
    })
}

fn normalize(x: &mut [f64]) {
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= sum);
}
