//! Benchmark environments, oracle solvers, and policy evaluation.
//!
//! Two tabular environments ship with the crate:
//!
//! - **Coin toss**: the state is the number of heads among 10 coins, the
//!   action bets on the next count being lower / abstains / higher. Every
//!   kernel row is the same binomial pmf.
//! - **Inventory**: the state is the previous period's excess demand in
//!   `-n..n`, the action is a target inventory position in `0..n`, demand is
//!   drawn from an (optionally exponentially tilted) pmf on `0..n`.
//!
//! Evaluation follows the stationary-weighted convention: the value function
//! of a policy under the true kernel, averaged under the stationary
//! distribution of the policy-induced chain.

use rand::Rng;

use crate::bellman::{
    self, exact_q, greedy_policy, value_iteration, IterationResult, QTable, ValueFunction,
};
use crate::driver::EpsilonSchedule;
use crate::error::Result;
use crate::mdp::{
    induced_chain, stationary_distribution, MdpModel, Policy, TransitionKernel,
};
use crate::risk::InnerRiskSpec;
use crate::rng::stream;

/// An environment: model, true training kernel, and domain labels for the
/// states.
#[derive(Clone, Debug)]
pub struct EnvBundle {
    pub name: String,
    pub model: MdpModel,
    pub kernel: TransitionKernel,
    /// Domain value of each state index (heads count, or inventory level).
    pub state_labels: Vec<i64>,
    /// Domain value of each action index (bet direction, or target level).
    pub action_labels: Vec<i64>,
}

/// Binomial(10, p) pmf over 0..=10.
fn binomial_10_pmf(p: f64) -> Vec<f64> {
    let choose = [1.0, 10.0, 45.0, 120.0, 210.0, 252.0, 210.0, 120.0, 45.0, 10.0, 1.0];
    let mut pmf: Vec<f64> = (0..=10)
        .map(|k| choose[k] * p.powi(k as i32) * (1.0 - p).powi(10 - k as i32))
        .collect();
    let sum: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= sum);
    pmf
}

/// The coin-toss game: 11 states (heads count 0..10), 3 actions
/// (bet lower = -1, abstain = 0, bet higher = +1), discount 0.9. Betting
/// pays -1 on a win, +1 on a loss, and +1 on a tie; abstaining is free.
/// Every kernel row equals the Binomial(10, `p_head`) pmf.
pub fn build_coin_toss(p_head: f64) -> EnvBundle {
    let n_states = 11;
    let actions: [i64; 3] = [-1, 0, 1];
    let pmf = binomial_10_pmf(p_head);
    let mut cost = Vec::with_capacity(n_states * 3 * n_states);
    let mut probs = Vec::with_capacity(n_states * 3 * n_states);
    for x in 0..n_states {
        for &a in &actions {
            for next in 0..n_states {
                let af = a as f64;
                let c = if x < next {
                    -af
                } else if x > next {
                    af
                } else {
                    af.abs()
                };
                cost.push(c);
            }
            probs.extend_from_slice(&pmf);
        }
    }
    EnvBundle {
        name: format!("coin_toss(p={p_head})"),
        model: MdpModel::new(n_states, 3, 0.9, cost).expect("valid coin toss model"),
        kernel: TransitionKernel::new(n_states, 3, probs).expect("binomial rows are stochastic"),
        state_labels: (0..=10).collect(),
        action_labels: actions.to_vec(),
    }
}

/// Normalized demand pmf `P(D = i) ∝ exp(theta (i - n/2))` on `0..=n`.
pub fn exponential_tilt(n: usize, theta: f64) -> Vec<f64> {
    let half = n as f64 / 2.0;
    // Subtract the max exponent so extreme tilts stay finite.
    let exps: Vec<f64> = (0..=n).map(|i| theta * (i as f64 - half)).collect();
    let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = exps.iter().map(|e| (e - m).exp()).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    w
}

/// The inventory environment: states are excess demand `-n..=n` (index
/// `s + n`), actions are target positions `0..=n`. Post-order stock is
/// `max(a, s^+)`; the next state is stock minus demand. Costs: `k` per order
/// placed, `h` per unit held, `p` per unit of unmet demand.
pub fn build_inventory(n: usize, k: f64, h: f64, p: f64, tilt: f64) -> EnvBundle {
    let n_states = 2 * n + 1;
    let n_actions = n + 1;
    let demand = exponential_tilt(n, tilt);
    let mut cost = vec![0.0; n_states * n_actions * n_states];
    let mut probs = vec![0.0; n_states * n_actions * n_states];
    for idx in 0..n_states {
        let s = idx as i64 - n as i64;
        let on_hand = s.max(0);
        for a in 0..n_actions {
            let target = a as i64;
            let order = (target - on_hand).max(0);
            let stock = on_hand + order; // max(a, s^+)
            let base = (idx * n_actions + a) * n_states;
            for (d, &pd) in demand.iter().enumerate() {
                let next = stock - d as i64;
                assert!(
                    (-(n as i64)..=n as i64).contains(&next),
                    "inventory dynamics left the state space: {next}"
                );
                let next_idx = (next + n as i64) as usize;
                probs[base + next_idx] += pd;
            }
            for next_idx in 0..n_states {
                let next = next_idx as i64 - n as i64;
                let holding = h * next.max(0) as f64;
                let shortage = p * (-next).max(0) as f64;
                let ordering = if order > 0 { k } else { 0.0 };
                cost[base + next_idx] = ordering + holding + shortage;
            }
        }
    }
    // Rows accumulate floating error; renormalize to exact stochasticity.
    for row in probs.chunks_mut(n_states) {
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
    }
    EnvBundle {
        name: format!("inventory(n={n},k={k},h={h},p={p},tilt={tilt})"),
        model: MdpModel::new(n_states, n_actions, 0.9, cost).expect("valid inventory model"),
        kernel: TransitionKernel::new(n_states, n_actions, probs).expect("demand rows stochastic"),
        state_labels: (-(n as i64)..=n as i64).collect(),
        action_labels: (0..=n as i64).collect(),
    }
}

/// Exact value iteration against the true kernel (point-mass posterior, so
/// the outer measure is the identity), with the greedy policy extracted.
pub fn oracle_solve(
    env: &EnvBundle,
    inner: &InnerRiskSpec,
    theta: f64,
) -> Result<(ValueFunction, Policy)> {
    let cap = bellman::default_iteration_cap(env.model.c_bar(), env.model.gamma(), theta);
    let backup = |v: &ValueFunction| exact_q(&env.model, &env.kernel, v, inner);
    let res = value_iteration(backup, ValueFunction::zeros(env.model.n_states()), theta, cap)?;
    let policy = greedy_policy(&res.q);
    Ok((res.value, policy))
}

/// Value of a fixed policy under the true kernel.
pub fn policy_value(
    env: &EnvBundle,
    policy: &Policy,
    inner: &InnerRiskSpec,
    theta: f64,
) -> Result<ValueFunction> {
    let res: IterationResult =
        bellman::policy_evaluation(&env.model, &env.kernel, policy, inner, theta)?;
    Ok(res.value)
}

/// Stationary-weighted policy value: `sum_s mu_pi(s) V_pi(s)` with `mu_pi`
/// the stationary distribution of the policy-induced chain.
pub fn stationary_weighted_value(
    env: &EnvBundle,
    policy: &Policy,
    inner: &InnerRiskSpec,
    theta: f64,
) -> Result<f64> {
    let v = policy_value(env, policy, inner, theta)?;
    let chain = induced_chain(&env.kernel, policy);
    let mu = stationary_distribution(&chain, 1e-10)?;
    Ok(mu.iter().zip(v.as_slice()).map(|(m, v)| m * v).sum())
}

/// Stationary-weighted values of one policy across deployment environments.
#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub deployment_labels: Vec<String>,
    pub values: Vec<f64>,
    /// Worst (largest, costs) value across deployments.
    pub worst: f64,
}

/// Evaluates a trained policy in each deployment environment; the worst
/// entry is the maximum since values are costs.
pub fn robustness_sweep(
    policy: &Policy,
    deployments: &[EnvBundle],
    inner: &InnerRiskSpec,
    theta: f64,
) -> Result<RobustnessReport> {
    let mut labels = Vec::with_capacity(deployments.len());
    let mut values = Vec::with_capacity(deployments.len());
    for env in deployments {
        labels.push(env.name.clone());
        values.push(stationary_weighted_value(env, policy, inner, theta)?);
    }
    let worst = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RobustnessReport {
        deployment_labels: labels,
        values,
        worst,
    })
}

/// Learning-rate schedule for the Q-learning baseline.
#[derive(Clone, Copy, Debug)]
pub enum LearningRate {
    /// `eta_t(s, a) = 1 / (1 + visits(s, a))^exponent`.
    PolynomialVisits { exponent: f64 },
    Constant(f64),
}

impl LearningRate {
    fn rate(&self, visits: u64) -> f64 {
        match self {
            LearningRate::PolynomialVisits { exponent } => {
                (1.0 + visits as f64).powf(-exponent)
            }
            LearningRate::Constant(c) => *c,
        }
    }
}

/// One logged point of the Q-learning baseline.
#[derive(Clone, Copy, Debug)]
pub struct BaselineMetric {
    pub step: usize,
    pub oracle_value: f64,
}

/// Tabular Watkins Q-learning with cost minimization:
/// `Q(s,a) <- (1 - eta) Q(s,a) + eta (c + gamma min_a' Q(s', a'))`.
///
/// The epsilon schedule advances once per `stage_len` steps, matching the
/// stage-wise schedule used in training. When `eval_every > 0`, the greedy
/// policy's stationary-weighted value is logged at that cadence.
#[allow(clippy::too_many_arguments)]
pub fn q_learning_baseline(
    env: &EnvBundle,
    steps: usize,
    epsilon: &EpsilonSchedule,
    stage_len: usize,
    lr: LearningRate,
    inner: &InnerRiskSpec,
    eval_every: usize,
    seed: u64,
) -> Result<(Policy, Vec<BaselineMetric>)> {
    let (ns, na) = (env.model.n_states(), env.model.n_actions());
    let mut q = QTable::zeros(ns, na);
    let mut visits = vec![0u64; ns * na];
    let mut metrics = Vec::new();
    let mut rng = stream(seed, "q-learning", &[]);
    let mut state = sample_index_uniform(ns, &mut rng);
    for t in 0..steps {
        let stage = t / stage_len.max(1) + 1;
        let eps = epsilon.at(stage);
        let action = if rng.random::<f64>() < eps {
            rng.random_range(0..na)
        } else {
            q.argmin_action(state)
        };
        let next = crate::mdp::sample_index(env.kernel.row(state, action), &mut rng);
        let c = env.model.cost(state, action, next);
        let v_next = q.row(next).iter().cloned().fold(f64::INFINITY, f64::min);
        let eta = lr.rate(visits[state * na + action]);
        visits[state * na + action] += 1;
        let target = c + env.model.gamma() * v_next;
        q.set(state, action, (1.0 - eta) * q.get(state, action) + eta * target);
        state = next;
        if eval_every > 0 && (t + 1) % eval_every == 0 {
            let value =
                stationary_weighted_value(env, &greedy_policy(&q), inner, 1e-6)?;
            metrics.push(BaselineMetric {
                step: t + 1,
                oracle_value: value,
            });
        }
    }
    Ok((greedy_policy(&q), metrics))
}

fn sample_index_uniform(n: usize, rng: &mut impl Rng) -> usize {
    rng.random_range(0..n)
}

/// Post-order stock level implied by taking `action` in `state`; the
/// canonical way to compare inventory policies (every action at or below
/// current stock keeps it unchanged).
pub fn inventory_order_up_to(env: &EnvBundle, state_idx: usize, action_idx: usize) -> i64 {
    let s = env.state_labels[state_idx];
    let a = env.action_labels[action_idx];
    a.max(s.max(0))
}
