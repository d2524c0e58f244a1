//! Risk Bellman operators and value iteration.
//!
//! Two backup routes exist for every operator: the exact route against a
//! known kernel (point-mass posterior, where the outer measure degenerates
//! to the identity), and the sampled route against a Dirichlet posterior,
//! which evaluates the inner risk on each sampled kernel and applies the
//! outer risk across the sample. Freezing one sample set across a stage's
//! sweeps makes the sampled backup a genuine gamma-contraction, so value
//! iteration terminates on both routes.

use serde::Serialize;

use crate::bayes::{DirichletPosterior, KernelSampleSet};
use crate::error::{Error, Result};
use crate::mdp::{MdpModel, Policy, TransitionKernel};
use crate::risk::{beta_eval, sigma_eval, InnerRiskSpec, OuterRiskSpec};
use crate::rng::stream;

/// A state-indexed value vector in cost units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueFunction {
    v: Vec<f64>,
}

impl ValueFunction {
    pub fn zeros(n_states: usize) -> Self {
        Self {
            v: vec![0.0; n_states],
        }
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self { v }
    }

    pub fn n_states(&self) -> usize {
        self.v.len()
    }

    pub fn get(&self, s: usize) -> f64 {
        self.v[s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sup_dist(&self, other: &ValueFunction) -> f64 {
        self.v
            .iter()
            .zip(&other.v)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A `(s, a)`-indexed action-value table in cost units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            q: vec![0.0; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, value: f64) {
        self.q[s * self.n_actions + a] = value;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn sup_dist(&self, other: &QTable) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Lowest-index minimizing action per state.
    pub fn argmin_action(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, &q) in row.iter().enumerate() {
            if q < row[best] {
                best = a;
            }
        }
        best
    }
}

/// Outcome of an iterative fixed-point computation.
#[derive(Clone, Debug, Serialize)]
pub struct IterationResult {
    pub value: ValueFunction,
    /// The action-value table whose minimization produced `value`.
    pub q: QTable,
    pub iterations: usize,
    /// Sup-norm of the last step; below theta on success.
    pub final_residual: f64,
}

/// Scratch for `c(s, a, .) + gamma * v(.)`.
fn target_row(model: &MdpModel, s: usize, a: usize, v: &ValueFunction, buf: &mut [f64]) {
    let gamma = model.gamma();
    for ((b, &c), &vs) in buf.iter_mut().zip(model.cost_row(s, a)).zip(v.as_slice()) {
        *b = c + gamma * vs;
    }
}

/// Exact risk Q-table against a known kernel:
/// `Q(s,a) = sigma(c(s,a,.) + gamma v(.), q(.|s,a))`.
pub fn exact_q(
    model: &MdpModel,
    kernel: &TransitionKernel,
    v: &ValueFunction,
    inner: &InnerRiskSpec,
) -> Result<QTable> {
    let (ns, na) = (model.n_states(), model.n_actions());
    let mut q = QTable::zeros(ns, na);
    let mut buf = vec![0.0; ns];
    for s in 0..ns {
        for a in 0..na {
            target_row(model, s, a, v, &mut buf);
            q.set(s, a, sigma_eval(inner, &buf, kernel.row(s, a))?);
        }
    }
    Ok(q)
}

/// Sampled risk Q-table from a frozen posterior sample set: per `(s, a)`,
/// evaluate the inner risk on every sampled row, then apply the outer risk
/// across the sample.
pub fn estimate_q_from_samples(
    model: &MdpModel,
    samples: &KernelSampleSet,
    v: &ValueFunction,
    inner: &InnerRiskSpec,
    outer: &OuterRiskSpec,
) -> Result<QTable> {
    let (ns, na) = (model.n_states(), model.n_actions());
    let n = samples.n();
    let mut q = QTable::zeros(ns, na);
    let mut buf = vec![0.0; ns];
    let mut sigmas = vec![0.0; n];
    for s in 0..ns {
        for a in 0..na {
            target_row(model, s, a, v, &mut buf);
            for (i, sig) in sigmas.iter_mut().enumerate() {
                *sig = sigma_eval(inner, &buf, samples.row(s, a, i))?;
            }
            q.set(s, a, beta_eval(outer, &sigmas)?);
        }
    }
    Ok(q)
}

/// One-shot sampled Q-table: draws `n` kernels (shared across all `(s, a)`)
/// and delegates to [`estimate_q_from_samples`] semantics without
/// materializing the sample set. Deterministic given the seed and
/// bit-identical to the frozen-set route.
pub fn estimate_q(
    model: &MdpModel,
    post: &DirichletPosterior,
    v: &ValueFunction,
    inner: &InnerRiskSpec,
    outer: &OuterRiskSpec,
    n: usize,
    seed: u64,
) -> Result<QTable> {
    assert!(n >= 1, "estimator needs at least one sample");
    let (ns, na) = (model.n_states(), model.n_actions());
    let mut q = QTable::zeros(ns, na);
    let mut buf = vec![0.0; ns];
    let mut row = vec![0.0; ns];
    let mut sigmas = vec![0.0; n];
    for s in 0..ns {
        for a in 0..na {
            target_row(model, s, a, v, &mut buf);
            // Same draw protocol as KernelSampleSet: n sequential row draws
            // per (s, a) stream.
            let mut rng = stream(seed, "dirichlet", &[s as u64, a as u64]);
            for sig in sigmas.iter_mut() {
                post.sample_row_into(s, a, &mut rng, &mut row);
                *sig = sigma_eval(inner, &buf, &row)?;
            }
            q.set(s, a, beta_eval(outer, &sigmas)?);
        }
    }
    Ok(q)
}

/// V-update: per-state minimum over actions.
pub fn optimality_step(q: &QTable) -> ValueFunction {
    let v = (0..q.n_states())
        .map(|s| q.row(s).iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    ValueFunction::from_vec(v)
}

/// Iteration cap from the geometric convergence bound, with a 4x safety
/// margin; exceeding it signals a contraction violation rather than silent
/// truncation.
pub fn default_iteration_cap(c_bar: f64, gamma: f64, theta: f64) -> usize {
    let bound = (2.0 * c_bar / ((1.0 - gamma).powi(2) * theta)).max(2.0);
    let k = (bound.ln() / (1.0 / gamma).ln()).ceil().max(1.0);
    4 * k as usize + 16
}

/// Repeats `backup` + [`optimality_step`] from `v0` until the sup-norm step
/// falls below `theta`. Reports the iterate count and the producing Q-table.
pub fn value_iteration<B>(
    mut backup: B,
    v0: ValueFunction,
    theta: f64,
    cap: usize,
) -> Result<IterationResult>
where
    B: FnMut(&ValueFunction) -> Result<QTable>,
{
    assert!(theta > 0.0, "tolerance must be positive");
    let mut v = v0;
    let mut residual = f64::INFINITY;
    for k in 1..=cap {
        let q = backup(&v)?;
        let next = optimality_step(&q);
        residual = v.sup_dist(&next);
        v = next;
        if residual < theta {
            return Ok(IterationResult {
                value: v,
                q,
                iterations: k,
                final_residual: residual,
            });
        }
    }
    Err(Error::IterationCapExceeded { cap, residual })
}

/// Fixed-point policy evaluation under the exact backup:
/// `V(s) <- sum_a pi(a|s) sigma(c(s,a,.) + gamma V, q(.|s,a))` from `V = 0`.
pub fn policy_evaluation(
    model: &MdpModel,
    kernel: &TransitionKernel,
    policy: &Policy,
    inner: &InnerRiskSpec,
    theta: f64,
) -> Result<IterationResult> {
    assert!(theta > 0.0, "tolerance must be positive");
    let (ns, na) = (model.n_states(), model.n_actions());
    let cap = default_iteration_cap(model.c_bar(), model.gamma(), theta);
    let mut v = ValueFunction::zeros(ns);
    let mut buf = vec![0.0; ns];
    let mut residual = f64::INFINITY;
    for k in 1..=cap {
        let mut q = QTable::zeros(ns, na);
        let mut next = vec![0.0; ns];
        for (s, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..na {
                target_row(model, s, a, &v, &mut buf);
                let sig = sigma_eval(inner, &buf, kernel.row(s, a))?;
                q.set(s, a, sig);
                acc += policy.prob(s, a) * sig;
            }
            *slot = acc;
        }
        let next = ValueFunction::from_vec(next);
        residual = v.sup_dist(&next);
        v = next;
        if residual < theta {
            return Ok(IterationResult {
                value: v,
                q,
                iterations: k,
                final_residual: residual,
            });
        }
    }
    Err(Error::IterationCapExceeded { cap, residual })
}

/// Epsilon-greedy policy extraction: the argmin action (lowest index on
/// ties) gets `1 - (1 - 1/|A|) eps`, every other action gets `eps / |A|`.
pub fn epsilon_greedy(q: &QTable, epsilon: f64) -> Policy {
    assert!((0.0..=1.0).contains(&epsilon), "epsilon in [0, 1]");
    let (ns, na) = (q.n_states(), q.n_actions());
    let explore = epsilon / na as f64;
    let greedy = 1.0 - (1.0 - 1.0 / na as f64) * epsilon;
    let mut probs = vec![explore; ns * na];
    for s in 0..ns {
        probs[s * na + q.argmin_action(s)] = greedy;
    }
    Policy::new(ns, na, probs).expect("rows sum to one by construction")
}

/// Greedy (epsilon = 0) policy extraction.
pub fn greedy_policy(q: &QTable) -> Policy {
    epsilon_greedy(q, 0.0)
}
