//! The closed-form complexity calculators, evaluated across a tolerance
//! sweep for the coin-toss geometry.
//!
//! ```bash
//! cargo run --release --example bounds_table
//! ```

use riskdp::bounds::{
    perturbation_bound, sample_complexity_t, stage_iteration_bound, sweep_iteration_bound,
    BoundParams,
};

fn main() {
    let base = BoundParams {
        c_bar: 1.0,
        gamma: 0.9,
        theta: 0.1,
        alpha1: 0.5,
        alpha2: 0.6,
        n_states: 11,
        n_actions: 3,
        a_bar0: 1.0,
        o_alpha: 1.0,
        mu_min: 1e-3,
        t0: 100.0,
        delta_fail: 0.05,
        xi: 1.0,
        eta: 1.0,
        delta_obs: 100.0,
        sweep_index: 0.0,
        o0: 1.0,
    };
    base.validate().expect("valid parameters");

    println!("theta    sample_T       perturbation  stage_iters  sweep_iters");
    for theta in [0.5, 0.2, 0.1, 0.05, 0.02, 0.01] {
        let p = BoundParams { theta, ..base };
        println!(
            "{theta:<7}  {:<13.4e}  {:<12.1}  {:<11}  {:.1}",
            sample_complexity_t(&p),
            perturbation_bound(&p),
            stage_iteration_bound(&p),
            sweep_iteration_bound(&p)
        );
    }

    println!("\nobservation count sweep at theta = 0.1:");
    println!("delta    perturbation  stage_iters");
    for delta_obs in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        let p = BoundParams { delta_obs, ..base };
        println!(
            "{delta_obs:<7}  {:<12.1}  {}",
            perturbation_bound(&p),
            stage_iteration_bound(&p)
        );
    }
}
