//! One stage-wise training run on the coin toss, printing per-stage
//! diagnostics and the distance of the stage policy from the exact oracle.
//!
//! ```bash
//! cargo run --release --example train_coin_toss
//! ```

use riskdp::bayes::DirichletPosterior;
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::{build_coin_toss, oracle_solve, stationary_weighted_value};
use riskdp::risk::{InnerRiskSpec, OuterRiskSpec};

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let inner = InnerRiskSpec::cvar(0.5)?;
    let cfg = TrainingConfig {
        stages: 20,
        scheduler: StageScheduler::FixedDelta { delta: 100 },
        theta: 0.01,
        mc_samples: 200,
        epsilon: EpsilonSchedule::new(0.3, 0.9, 0.05)?,
        seed: 7,
        inner: inner.clone(),
        outer: OuterRiskSpec::cvar(0.6)?,
        initial_state: InitialState::Fixed { state: 5 },
    };
    let prior = DirichletPosterior::uniform_prior(11, 3);

    let (_, oracle_policy) = oracle_solve(&env, &inner, 1e-8)?;
    let oracle_metric = stationary_weighted_value(&env, &oracle_policy, &inner, 1e-8)?;
    println!("oracle stationary-weighted value: {oracle_metric:.4}\n");
    println!("stage  steps  eps    iters  residual   metric    policy-mismatches");

    let log = run_training(&env.kernel, &env.model, &prior, &cfg)?;
    for stage in &log.stages {
        let metric = stationary_weighted_value(&env, &stage.greedy, &inner, 1e-6)?;
        let mismatches = (0..11)
            .filter(|&s| stage.greedy.greedy_action(s) != oracle_policy.greedy_action(s))
            .count();
        println!(
            "{:>5}  {:>5}  {:.3}  {:>5}  {:.2e}  {:>8.4}  {mismatches}",
            stage.stage,
            stage.steps,
            stage.epsilon,
            stage.iterations,
            stage.final_residual,
            metric
        );
    }
    let final_policy = log.final_greedy_policy().unwrap();
    let bets: Vec<i64> = (0..11)
        .map(|s| env.action_labels[final_policy.greedy_action(s)])
        .collect();
    println!("\nfinal greedy policy: {bets:?}");
    Ok(())
}
