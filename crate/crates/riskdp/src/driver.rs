//! Stage-wise Bayesian dynamic programming.
//!
//! Each stage rolls the behavior policy in the true environment, folds the
//! observed transition counts into the Dirichlet posterior, freezes one
//! posterior sample set, runs value iteration to tolerance with the sampled
//! backup, and refreshes the epsilon-greedy policy. Stage boundaries come
//! from either a fixed step count or the sweep rule (a stage closes whenever
//! a not-yet-known `(s, a)` pair is observed; a sweep closes when all pairs
//! are known).
//!
//! Randomness is split into named streams per stage ("rollout" vs the
//! posterior-sampling streams), so changing the Monte Carlo sample count
//! never changes the trajectory.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bayes::{DirichletPosterior, KernelSampleSet};
use crate::bellman::{
    default_iteration_cap, epsilon_greedy, estimate_q_from_samples, greedy_policy,
    value_iteration, ValueFunction,
};
use crate::error::{Error, Result};
use crate::mdp::{count_transitions, sample_index, MdpModel, Policy, Trajectory, TransitionKernel};
use crate::risk::{InnerRiskSpec, OuterRiskSpec};
use crate::rng::{derive_seed, stream};

/// Exploration schedule `eps_u = max(floor, start * decay^(u-1))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, decay: f64, floor: f64) -> Result<Self> {
        let field = |name: &str, reason: String| Error::SchemaViolation {
            field: format!("epsilon.{name}"),
            reason,
        };
        if !(0.0..=1.0).contains(&start) {
            return Err(field("start", format!("must lie in [0, 1], got {start}")));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(field("decay", format!("must lie in (0, 1], got {decay}")));
        }
        if !(0.001..=1.0).contains(&floor) {
            return Err(field("floor", format!("must lie in [0.001, 1], got {floor}")));
        }
        Ok(Self { start, decay, floor })
    }

    /// Exploration rate at stage `u >= 1`; never drops below the floor.
    pub fn at(&self, stage: usize) -> f64 {
        let raw = self.start * self.decay.powi(stage.saturating_sub(1) as i32);
        raw.max(self.floor)
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 0.3,
            decay: 0.9,
            floor: 0.05,
        }
    }
}

/// Stage-boundary rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageScheduler {
    /// Every stage lasts exactly `delta` steps.
    FixedDelta { delta: usize },
    /// Stages close on newly observed `(s, a)` pairs; sweeps close when all
    /// pairs have been observed.
    SweepBased,
}

/// Initial state distribution `mu_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Fixed { state: usize },
    Uniform,
    Pmf { probs: Vec<f64> },
}

impl InitialState {
    fn sample(&self, n_states: usize, rng: &mut impl rand::Rng) -> Result<usize> {
        match self {
            InitialState::Fixed { state } => {
                if *state >= n_states {
                    return Err(Error::InvalidStart {
                        state: *state,
                        n_states,
                    });
                }
                Ok(*state)
            }
            InitialState::Uniform => Ok(rng.random_range(0..n_states)),
            InitialState::Pmf { probs } => {
                if probs.len() != n_states {
                    return Err(Error::DimensionMismatch {
                        context: format!(
                            "initial distribution has {} entries for {} states",
                            probs.len(),
                            n_states
                        ),
                    });
                }
                Ok(sample_index(probs, rng))
            }
        }
    }
}

/// Training-loop configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Number of stages `L` (an upper cap under the sweep scheduler).
    pub stages: usize,
    pub scheduler: StageScheduler,
    /// Value-iteration tolerance `theta > 0`.
    pub theta: f64,
    /// Posterior sample count `N` per stage.
    pub mc_samples: usize,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    pub inner: InnerRiskSpec,
    pub outer: OuterRiskSpec,
    pub initial_state: InitialState,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::SchemaViolation {
                field: "training.theta".into(),
                reason: format!("must be positive, got {}", self.theta),
            });
        }
        if self.mc_samples == 0 {
            return Err(Error::SchemaViolation {
                field: "training.mc_samples".into(),
                reason: "must be at least 1".into(),
            });
        }
        if let StageScheduler::FixedDelta { delta } = self.scheduler {
            if delta == 0 {
                return Err(Error::SchemaViolation {
                    field: "training.delta".into(),
                    reason: "must be at least 1".into(),
                });
            }
        }
        EpsilonSchedule::new(self.epsilon.start, self.epsilon.decay, self.epsilon.floor)?;
        Ok(())
    }
}

/// Everything one stage produces.
#[derive(Clone, Debug, Serialize)]
pub struct StageResult {
    pub stage: usize,
    /// Observations added this stage (`Delta_u`).
    pub steps: usize,
    pub epsilon: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub value: ValueFunction,
    /// Epsilon-greedy behavior policy for the next stage.
    pub policy: Policy,
    /// Greedy policy scored by the evaluation metrics.
    pub greedy: Policy,
    pub wall_ms: f64,
    /// Whether this stage completed a sweep (sweep scheduler only).
    pub closed_sweep: bool,
    /// Evaluation metrics filled in by the experiment layer.
    pub metrics: BTreeMap<String, f64>,
}

/// The mutable state threaded through stages.
#[derive(Clone, Debug)]
pub struct StageState {
    pub posterior: DirichletPosterior,
    pub policy: Policy,
    pub last_state: usize,
    pub value: ValueFunction,
}

/// Full training record.
#[derive(Clone, Debug, Serialize)]
pub struct TrainingLog {
    pub stages: Vec<StageResult>,
    pub posterior: DirichletPosterior,
    pub config: TrainingConfig,
    /// Set when the sweep scheduler observed a full sweep in which every
    /// stage converged within one iteration.
    pub terminated_by_sweep: bool,
}

impl TrainingLog {
    pub fn final_greedy_policy(&self) -> Option<&Policy> {
        self.stages.last().map(|s| &s.greedy)
    }
}

/// Decision returned by the sweep rule after each observed step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepDecision {
    Continue,
    CloseStage,
    /// Implies the stage closes too; the known-set resets.
    CloseSweep,
}

/// Known-set tracker for the sweep scheduler.
#[derive(Clone, Debug)]
pub struct SweepTracker {
    known: Vec<bool>,
    n_known: usize,
    n_actions: usize,
    /// Iteration counts of the stages completed in the current sweep.
    stage_iterations: Vec<usize>,
}

impl SweepTracker {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            known: vec![false; n_states * n_actions],
            n_known: 0,
            n_actions,
            stage_iterations: Vec::new(),
        }
    }

    /// Feeds one observed `(s, a)`; a new pair closes the stage, and when it
    /// completes the set, the sweep closes and the set resets.
    pub fn observe(&mut self, s: usize, a: usize) -> SweepDecision {
        let ix = s * self.n_actions + a;
        if self.known[ix] {
            return SweepDecision::Continue;
        }
        self.known[ix] = true;
        self.n_known += 1;
        if self.n_known == self.known.len() {
            self.known.iter_mut().for_each(|k| *k = false);
            self.n_known = 0;
            SweepDecision::CloseSweep
        } else {
            SweepDecision::CloseStage
        }
    }

    pub fn known_count(&self) -> usize {
        self.n_known
    }

    /// Records a completed stage's iteration count; on a closed sweep,
    /// reports whether every stage converged within one iteration and
    /// starts the next sweep's bookkeeping.
    fn record_stage(&mut self, iterations: usize, closed_sweep: bool) -> bool {
        self.stage_iterations.push(iterations);
        if !closed_sweep {
            return false;
        }
        let all_single = self.stage_iterations.iter().all(|&k| k <= 1);
        self.stage_iterations.clear();
        all_single
    }
}

const SWEEP_STAGE_CAP: usize = 10_000_000;

/// Runs one stage: rollout, posterior update, value iteration from the warm
/// start, epsilon-greedy refresh. Returns the stage record and the new
/// state. `sweep` must be `Some` exactly under the sweep scheduler.
pub fn run_stage(
    kernel: &TransitionKernel,
    model: &MdpModel,
    st: &StageState,
    cfg: &TrainingConfig,
    stage: usize,
    sweep: Option<&mut SweepTracker>,
) -> Result<(StageResult, StageState)> {
    let started = Instant::now();
    let mut rng = stream(cfg.seed, "rollout", &[stage as u64]);

    let (traj, closed_sweep) = match (&cfg.scheduler, sweep) {
        (StageScheduler::FixedDelta { delta }, _) => {
            let traj = crate::mdp::simulate(kernel, &st.policy, st.last_state, *delta, &mut rng)?;
            (traj, false)
        }
        (StageScheduler::SweepBased, Some(tracker)) => {
            let mut traj = Trajectory {
                start_state: st.last_state,
                steps: Vec::new(),
            };
            let mut state = st.last_state;
            let mut closed = None;
            for _ in 0..SWEEP_STAGE_CAP {
                let action = sample_index(st.policy.row(state), &mut rng);
                let next = sample_index(kernel.row(state, action), &mut rng);
                traj.steps.push((state, action, next));
                let decision = tracker.observe(state, action);
                state = next;
                match decision {
                    SweepDecision::Continue => {}
                    SweepDecision::CloseStage => {
                        closed = Some(false);
                        break;
                    }
                    SweepDecision::CloseSweep => {
                        closed = Some(true);
                        break;
                    }
                }
            }
            match closed {
                Some(c) => (traj, c),
                None => return Err(Error::SweepStalled {
                    steps: SWEEP_STAGE_CAP,
                }),
            }
        }
        (StageScheduler::SweepBased, None) => {
            return Err(Error::DimensionMismatch {
                context: "sweep scheduler needs a tracker".into(),
            })
        }
    };

    let counts = count_transitions(&traj, model.n_states(), model.n_actions());
    let posterior = st.posterior.posterior_update(&counts);

    let samples = KernelSampleSet::draw(
        &posterior,
        cfg.mc_samples,
        derive_seed(cfg.seed, "stage-mc", stage as u64),
    );
    let cap = default_iteration_cap(model.c_bar(), model.gamma(), cfg.theta);
    let backup =
        |v: &ValueFunction| estimate_q_from_samples(model, &samples, v, &cfg.inner, &cfg.outer);
    let res = value_iteration(backup, st.value.clone(), cfg.theta, cap)
        .map_err(|e| Error::StageFailed {
            stage,
            source: Box::new(e),
        })?;

    let epsilon = cfg.epsilon.at(stage);
    let policy = epsilon_greedy(&res.q, epsilon);
    let greedy = greedy_policy(&res.q);

    let result = StageResult {
        stage,
        steps: traj.len(),
        epsilon,
        iterations: res.iterations,
        final_residual: res.final_residual,
        value: res.value.clone(),
        policy: policy.clone(),
        greedy,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        closed_sweep,
        metrics: BTreeMap::new(),
    };
    let next = StageState {
        posterior,
        policy,
        last_state: traj.final_state(),
        value: res.value,
    };
    Ok((result, next))
}

/// Runs the full training loop, invoking `on_stage` as each stage
/// completes (so callers can flush partial output before a failure).
pub fn run_training_with(
    kernel: &TransitionKernel,
    model: &MdpModel,
    prior: &DirichletPosterior,
    cfg: &TrainingConfig,
    mut on_stage: impl FnMut(&StageResult),
) -> Result<TrainingLog> {
    cfg.validate()?;
    let mut init_rng = stream(cfg.seed, "init", &[]);
    let start = cfg.initial_state.sample(model.n_states(), &mut init_rng)?;
    let mut st = StageState {
        posterior: prior.clone(),
        policy: Policy::uniform(model.n_states(), model.n_actions()),
        last_state: start,
        value: ValueFunction::zeros(model.n_states()),
    };
    let mut tracker = match cfg.scheduler {
        StageScheduler::SweepBased => Some(SweepTracker::new(model.n_states(), model.n_actions())),
        StageScheduler::FixedDelta { .. } => None,
    };
    let mut stages = Vec::new();
    let mut terminated = false;
    for u in 1..=cfg.stages {
        let (result, next) = run_stage(kernel, model, &st, cfg, u, tracker.as_mut())?;
        st = next;
        on_stage(&result);
        if let Some(tr) = tracker.as_mut() {
            if tr.record_stage(result.iterations, result.closed_sweep) {
                terminated = true;
            }
        }
        stages.push(result);
        if terminated {
            break;
        }
    }
    Ok(TrainingLog {
        stages,
        posterior: st.posterior,
        config: cfg.clone(),
        terminated_by_sweep: terminated,
    })
}

/// [`run_training_with`] without a stage callback.
pub fn run_training(
    kernel: &TransitionKernel,
    model: &MdpModel,
    prior: &DirichletPosterior,
    cfg: &TrainingConfig,
) -> Result<TrainingLog> {
    run_training_with(kernel, model, prior, cfg, |_| {})
}
