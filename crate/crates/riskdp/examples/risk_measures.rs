//! The risk-measure toolbox on its own: discrete CVaR against the
//! Rockafellar-Uryasev program, polyhedral envelopes through the bundled
//! simplex, and the cross-section Lipschitz constants.
//!
//! ```bash
//! cargo run --release --example risk_measures
//! ```

use riskdp::risk::{
    beta_eval, cvar_discrete, envelope_lp_solve, lipschitz_b_sigma, sigma_eval, AffineTerm,
    InnerRiskSpec, OuterRiskSpec, PolyhedralEnvelope, RiskMeasure,
};

fn main() -> riskdp::Result<()> {
    let values = [4.0, 3.0, 2.0, 1.0];
    let probs = [0.25; 4];

    println!("cost atoms {values:?} with uniform weights");
    println!("alpha  cvar      tail composition");
    for alpha in [1.0, 0.5, 0.3, 0.25, 0.1] {
        let c = cvar_discrete(&values, &probs, alpha)?;
        println!("{alpha:<5}  {c:<8.4}  worst {alpha} of the mass");
    }

    // The same value through the envelope linear program.
    let (via_lp, xi) = envelope_lp_solve(&PolyhedralEnvelope::cvar(0.3), &probs, &values)?;
    println!("\ncvar(0.3) via the envelope LP: {via_lp:.4}, optimizer xi = {xi:?}");
    println!("closed form:                   {:.4}", cvar_discrete(&values, &probs, 0.3)?);

    // A custom polyhedral envelope: reweighting capped at 1.5 lands strictly
    // between the mean and cvar(0.5).
    let custom = PolyhedralEnvelope {
        per_atom: vec![AffineTerm { coef: 1.0, offset: -1.5 }],
        averaged: vec![],
        mean_one: true,
    };
    let spec = InnerRiskSpec(RiskMeasure::Envelope { constraints: custom });
    let custom_value = sigma_eval(&spec, &values, &probs)?;
    println!("\nenvelope with reweighting cap 1.5: {custom_value:.4}");
    println!("mean = {:.4}, cvar(0.5) = {:.4}", 2.5, cvar_discrete(&values, &probs, 0.5)?);

    // Outer risk over a Monte Carlo sample.
    let sample = [1.0, 2.0, 3.0, 4.0, 10.0];
    println!("\nouter risk over sample {sample:?}:");
    println!("  mean      = {:.4}", beta_eval(&OuterRiskSpec::mean(), &sample)?);
    println!("  cvar(0.6) = {:.4}", beta_eval(&OuterRiskSpec::cvar(0.6)?, &sample)?);
    println!("  cvar(0.2) = {:.4}", beta_eval(&OuterRiskSpec::cvar(0.2)?, &sample)?);

    println!("\ncross-section Lipschitz constants at c_bar = 1, gamma = 0.9:");
    println!("  mean:      {}", lipschitz_b_sigma(&InnerRiskSpec::mean(), 1.0, 0.9)?.0);
    println!("  cvar(0.5): {}", lipschitz_b_sigma(&InnerRiskSpec::cvar(0.5)?, 1.0, 0.9)?.0);
    Ok(())
}
