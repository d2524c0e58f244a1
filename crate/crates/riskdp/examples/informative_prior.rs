//! Effect of the prior on convergence: the flat 1/|S| prior against an
//! informative prior proportional to a Binomial(10, 2/3) pmf, which sits
//! close to the true Binomial(10, 0.6) transition law.
//!
//! ```bash
//! cargo run --release --example informative_prior
//! ```

use rayon::prelude::*;

use riskdp::bayes::DirichletPosterior;
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::{build_coin_toss, oracle_solve, stationary_weighted_value};
use riskdp::mdp::TransitionKernel;
use riskdp::risk::{InnerRiskSpec, OuterRiskSpec};
use riskdp::rng::derive_seed;

fn binomial_pmf_kernel(p: f64) -> TransitionKernel {
    let choose = [1.0, 10.0, 45.0, 120.0, 210.0, 252.0, 210.0, 120.0, 45.0, 10.0, 1.0];
    let pmf: Vec<f64> = (0..=10)
        .map(|k| choose[k] * p.powi(k as i32) * (1.0 - p).powi(10 - k as i32))
        .collect();
    let sum: f64 = pmf.iter().sum();
    let row: Vec<f64> = pmf.iter().map(|x| x / sum).collect();
    TransitionKernel::new(11, 3, row.repeat(33)).expect("stochastic rows")
}

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let inner = InnerRiskSpec::cvar(0.5)?;
    let runs = 20u64;

    let priors = [
        ("prior 1 (flat 1/|S|)", DirichletPosterior::uniform_prior(11, 3)),
        (
            "prior 2 (binom 2/3) ",
            DirichletPosterior::informative_prior(&binomial_pmf_kernel(2.0 / 3.0), 1.0)?,
        ),
    ];

    let (_, oracle_policy) = oracle_solve(&env, &inner, 1e-8)?;
    let oracle_metric = stationary_weighted_value(&env, &oracle_policy, &inner, 1e-8)?;
    println!("oracle stationary-weighted value: {oracle_metric:.4}");
    println!("per-stage mean metric over {runs} runs:\n");

    let mut curves = Vec::new();
    for (label, prior) in &priors {
        let per_run: Vec<Vec<f64>> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let cfg = TrainingConfig {
                    stages: 20,
                    scheduler: StageScheduler::FixedDelta { delta: 100 },
                    theta: 0.01,
                    mc_samples: 200,
                    epsilon: EpsilonSchedule::new(0.3, 0.9, 0.05)?,
                    seed: derive_seed(5150, "prior", r),
                    inner: inner.clone(),
                    outer: OuterRiskSpec::cvar(0.6)?,
                    initial_state: InitialState::Fixed { state: 5 },
                };
                let log = run_training(&env.kernel, &env.model, prior, &cfg)?;
                log.stages
                    .iter()
                    .map(|st| stationary_weighted_value(&env, &st.greedy, &inner, 1e-6))
                    .collect()
            })
            .collect::<riskdp::Result<_>>()?;
        let curve: Vec<f64> = (0..20)
            .map(|u| per_run.iter().map(|c| c[u]).sum::<f64>() / runs as f64)
            .collect();
        curves.push((label, curve));
    }

    println!("stage  {:>22}  {:>22}", curves[0].0, curves[1].0);
    for u in 0..20 {
        println!("{:>5}  {:>22.4}  {:>22.4}", u + 1, curves[0].1[u], curves[1].1[u]);
    }
    Ok(())
}
