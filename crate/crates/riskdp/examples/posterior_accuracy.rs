//! Posterior machinery end to end: conjugate updates from simulated
//! rollouts, the outer-risk accuracy functional, and the induced bound on
//! the optimal-value gap against the true-kernel oracle.
//!
//! ```bash
//! cargo run --release --example posterior_accuracy
//! ```

use riskdp::bayes::{posterior_l1_accuracy, DirichletPosterior, KernelSampleSet};
use riskdp::bellman::{estimate_q_from_samples, value_iteration, ValueFunction};
use riskdp::envs::{build_coin_toss, oracle_solve};
use riskdp::mdp::{count_transitions, simulate, Policy};
use riskdp::risk::{lipschitz_b_sigma, InnerRiskSpec, OuterRiskSpec};
use riskdp::rng::stream;

fn main() -> riskdp::Result<()> {
    let env = build_coin_toss(0.6);
    let inner = InnerRiskSpec::cvar(0.5)?;
    let outer = OuterRiskSpec::cvar(0.6)?;
    let gamma = env.model.gamma();
    let b_sigma = lipschitz_b_sigma(&inner, env.model.c_bar(), gamma)?.0;

    let (v_true, _) = oracle_solve(&env, &inner, 1e-8)?;
    let behavior = Policy::uniform(11, 3);
    let mut posterior = DirichletPosterior::uniform_prior(11, 3);
    let mut state = 5;

    println!("cross-section Lipschitz constant B_sigma = {b_sigma}");
    println!("\nsteps   mean beta(L1)  max beta(L1)   bound B/(1-g)*max   actual |V*_post - V*_true|");
    let mut seen = 0usize;
    for (chunk, steps) in [(0usize, 0usize), (1, 500), (2, 1500), (3, 8000), (4, 40000)] {
        if steps > 0 {
            let traj = simulate(
                &env.kernel,
                &behavior,
                state,
                steps,
                &mut stream(12, "rollout", &[chunk as u64]),
            )?;
            state = traj.final_state();
            posterior = posterior.posterior_update(&count_transitions(&traj, 11, 3));
            seen += steps;
        }
        let acc = posterior_l1_accuracy(&posterior, &env.kernel, &outer, 2000, 88)?;
        let samples = KernelSampleSet::draw(&posterior, 2000, 1234);
        let v_post = value_iteration(
            |v| estimate_q_from_samples(&env.model, &samples, v, &inner, &outer),
            ValueFunction::zeros(11),
            1e-4,
            100_000,
        )?
        .value;
        let actual = v_post.sup_dist(&v_true);
        let bound = b_sigma / (1.0 - gamma) * acc.max_value;
        let mean_acc = acc.per_sa.iter().sum::<f64>() / acc.per_sa.len() as f64;
        println!(
            "{seen:>6}  {:>13.4}  {:>12.4}  {:>18.2}  {:>27.4}",
            mean_acc, acc.max_value, bound, actual
        );
    }
    println!("\nthe bound dominates the actual gap; the mean accuracy contracts with data,");
    println!("while the max stays pinned by rows whose states the chain rarely visits");
    Ok(())
}
