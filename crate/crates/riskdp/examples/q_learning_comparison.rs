//! Stage-wise Bayesian training against tabular Q-learning at the same
//! interaction budget, scored by agreement with the exact oracle policy.
//!
//! ```bash
//! cargo run --release --example q_learning_comparison
//! ```

use rayon::prelude::*;

use riskdp::bayes::DirichletPosterior;
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::{build_coin_toss, oracle_solve, q_learning_baseline, LearningRate};
use riskdp::risk::{InnerRiskSpec, OuterRiskSpec};
use riskdp::rng::derive_seed;

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let inner = InnerRiskSpec::mean();
    let (_, oracle) = oracle_solve(&env, &inner, 1e-8)?;
    let eps = EpsilonSchedule::new(0.3, 0.9, 0.05)?;
    let prior = DirichletPosterior::uniform_prior(11, 3);
    let runs = 50u64;

    let agreement = |policy: &riskdp::Policy| -> usize {
        (0..11)
            .filter(|&s| policy.greedy_action(s) == oracle.greedy_action(s))
            .count()
    };

    println!("coin toss, 2000 interaction steps, {runs} seeds\n");
    println!("steps  stage-wise agreement  q-learning agreement");
    for steps in [500usize, 1000, 2000, 5000] {
        let scores: Vec<(usize, usize)> = (0..runs)
            .into_par_iter()
            .map(|seed| {
                let cfg = TrainingConfig {
                    stages: steps / 100,
                    scheduler: StageScheduler::FixedDelta { delta: 100 },
                    theta: 0.01,
                    mc_samples: 200,
                    epsilon: eps,
                    seed: derive_seed(99, "bdp", seed),
                    inner: inner.clone(),
                    outer: OuterRiskSpec::mean(),
                    initial_state: InitialState::Fixed { state: 5 },
                };
                let log = run_training(&env.kernel, &env.model, &prior, &cfg).unwrap();
                let bdp = agreement(log.final_greedy_policy().unwrap());
                let (ql, _) = q_learning_baseline(
                    &env,
                    steps,
                    &eps,
                    100,
                    LearningRate::PolynomialVisits { exponent: 0.7 },
                    &inner,
                    0,
                    derive_seed(99, "ql", seed),
                )
                .unwrap();
                (bdp, agreement(&ql))
            })
            .collect();
        let bdp_mean = scores.iter().map(|s| s.0).sum::<usize>() as f64 / runs as f64;
        let ql_mean = scores.iter().map(|s| s.1).sum::<usize>() as f64 / runs as f64;
        println!("{steps:>5}  {bdp_mean:>18.2}/11  {ql_mean:>18.2}/11");
    }
    Ok(())
}
