//! Training with the sweep-based stage scheduler: every newly observed
//! `(s, a)` pair closes a stage, and a sweep closes once all pairs are
//! known. The run terminates early when a whole sweep converges in single
//! value-iteration steps.
//!
//! ```bash
//! cargo run --release --example sweep_training
//! ```

use riskdp::bayes::DirichletPosterior;
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::build_coin_toss;
use riskdp::risk::{InnerRiskSpec, OuterRiskSpec};

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let cfg = TrainingConfig {
        stages: 500,
        scheduler: StageScheduler::SweepBased,
        theta: 0.05,
        mc_samples: 100,
        epsilon: EpsilonSchedule::new(0.3, 0.95, 0.05)?,
        seed: 3,
        inner: InnerRiskSpec::mean(),
        outer: OuterRiskSpec::mean(),
        initial_state: InitialState::Fixed { state: 5 },
    };
    let prior = DirichletPosterior::uniform_prior(11, 3);
    let log = run_training(&env.kernel, &env.model, &prior, &cfg)?;

    let mut sweep = 1;
    let mut sweep_steps = 0;
    let mut sweep_iters = 0;
    println!("{} stages, terminated by sweep rule: {}\n", log.stages.len(), log.terminated_by_sweep);
    println!("sweep  stages  steps  value-iterations");
    let mut stage_count = 0;
    for stage in &log.stages {
        sweep_steps += stage.steps;
        sweep_iters += stage.iterations;
        stage_count += 1;
        if stage.closed_sweep {
            println!("{sweep:>5}  {stage_count:>6}  {sweep_steps:>5}  {sweep_iters}");
            sweep += 1;
            sweep_steps = 0;
            sweep_iters = 0;
            stage_count = 0;
        }
    }
    if stage_count > 0 {
        println!("{sweep:>5}  {stage_count:>6}  {sweep_steps:>5}  {sweep_iters}  (unfinished)");
    }
    Ok(())
}
