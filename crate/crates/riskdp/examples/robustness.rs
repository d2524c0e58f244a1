//! Outer-risk ablation: train small ensembles with an outer mean vs an outer
//! CVaR(0.6) and compare worst-case performance across perturbed deployment
//! environments.
//!
//! ```bash
//! cargo run --release --example robustness
//! ```

use rayon::prelude::*;

use riskdp::bayes::DirichletPosterior;
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::{build_coin_toss, robustness_sweep, EnvBundle};
use riskdp::risk::{InnerRiskSpec, OuterRiskSpec};
use riskdp::rng::derive_seed;

fn train_ensemble(
    env: &EnvBundle,
    inner: &InnerRiskSpec,
    outer: &OuterRiskSpec,
    runs: u64,
) -> riskdp::Result<Vec<riskdp::Policy>> {
    let prior = DirichletPosterior::uniform_prior(11, 3);
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = TrainingConfig {
                stages: 20,
                scheduler: StageScheduler::FixedDelta { delta: 100 },
                theta: 0.01,
                mc_samples: 200,
                epsilon: EpsilonSchedule::new(0.3, 0.9, 0.05)?,
                seed: derive_seed(2024, "robustness", r),
                inner: inner.clone(),
                outer: outer.clone(),
                initial_state: InitialState::Fixed { state: 5 },
            };
            let log = run_training(&env.kernel, &env.model, &prior, &cfg)?;
            Ok(log.final_greedy_policy().unwrap().clone())
        })
        .collect()
}

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let grid: Vec<EnvBundle> = [0.4, 0.5, 0.6, 0.7, 0.8]
        .iter()
        .map(|&p| build_coin_toss(p))
        .collect();
    let inner = InnerRiskSpec::cvar(0.5)?;
    let runs = 20;

    println!("deployment grid: p_head in [0.4, 0.8]; {runs} runs per model\n");
    for (label, outer) in [
        ("outer mean     ", OuterRiskSpec::mean()),
        ("outer cvar(0.6)", OuterRiskSpec::cvar(0.6)?),
    ] {
        let policies = train_ensemble(&env, &inner, &outer, runs)?;
        let worsts: Vec<f64> = policies
            .par_iter()
            .map(|p| Ok(robustness_sweep(p, &grid, &inner, 1e-6)?.worst))
            .collect::<riskdp::Result<_>>()?;
        let mean = worsts.iter().sum::<f64>() / worsts.len() as f64;
        let max = worsts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("{label}: mean worst-deployment cost {mean:>7.4}, worst run {max:>7.4}");
    }
    println!("\nlower is better; the outer CVaR trades training optimality for deployment robustness");
    Ok(())
}
