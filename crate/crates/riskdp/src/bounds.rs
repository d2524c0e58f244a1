//! Closed-form complexity-bound calculators for the Dirichlet + CVaR
//! setting: sufficient sample size, the value perturbation induced by a
//! Dirichlet parameter update, and per-stage / per-sweep iteration bounds.
//!
//! All calculators evaluate their printed expressions in plain double
//! precision; overflow propagates as infinity rather than saturating. The
//! asymptotic results (global iteration bound, asymptotic sample complexity)
//! carry no computable constants and so have no calculators here; the
//! coverage exponents `xi`/`eta` in [`BoundParams`] exist to document those
//! rates. One caveat inherited from the source analysis: the proof of the
//! sample-size bound passes through the CVaR level as `1 - alpha2` at one
//! step while the final statement uses `alpha2`; the calculator follows the
//! final statement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs shared by the bound calculators.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundParams {
    /// Cost bound `max |c|`.
    pub c_bar: f64,
    /// Discount factor in (0, 1).
    pub gamma: f64,
    /// Value-iteration tolerance.
    pub theta: f64,
    /// Inner CVaR level in (0, 1].
    pub alpha1: f64,
    /// Outer CVaR level in (0, 1].
    pub alpha2: f64,
    pub n_states: usize,
    pub n_actions: usize,
    /// `max_{s,a} sum_{s'} alpha(s'|s,a)` of the prior.
    pub a_bar0: f64,
    /// Confidence `min_{s,a} sum_{s'} alpha(s'|s,a)` at the current stage.
    pub o_alpha: f64,
    /// Minimum state-action visit probability after burn-in.
    pub mu_min: f64,
    /// Burn-in time before the coverage property holds.
    pub t0: f64,
    /// Failure probability of the sample-size guarantee.
    pub delta_fail: f64,
    /// Coverage exponents: `mu_min^-1 = O(|A|^xi |S|^eta)`.
    pub xi: f64,
    pub eta: f64,
    /// Observation count added in the update (`Delta`).
    pub delta_obs: f64,
    /// Sweep index `L`.
    pub sweep_index: f64,
    /// Confidence of the initial prior (`O_0`).
    pub o0: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, reason: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::SchemaViolation {
                    field: field.into(),
                    reason,
                })
            }
        };
        check(
            self.gamma > 0.0 && self.gamma < 1.0,
            "gamma",
            format!("must lie in (0, 1), got {}", self.gamma),
        )?;
        check(
            self.alpha1 > 0.0 && self.alpha1 <= 1.0,
            "alpha1",
            format!("must lie in (0, 1], got {}", self.alpha1),
        )?;
        check(
            self.alpha2 > 0.0 && self.alpha2 <= 1.0,
            "alpha2",
            format!("must lie in (0, 1], got {}", self.alpha2),
        )?;
        check(
            self.mu_min > 0.0 && self.mu_min <= 1.0,
            "mu_min",
            format!("must lie in (0, 1], got {}", self.mu_min),
        )?;
        check(
            self.theta > 0.0,
            "theta",
            format!("must be positive, got {}", self.theta),
        )?;
        Ok(())
    }

    fn s(&self) -> f64 {
        self.n_states as f64
    }

    fn a(&self) -> f64 {
        self.n_actions as f64
    }
}

/// Sufficient total sample count:
/// `T0 + max{ 16 A0 C / (mu (1-g)^2 a1 a2 th),
///            128 |S| C^2 / (mu (1-g)^4 a1^2 a2^2 th^2),
///            (8/mu) ln(2|S||A|/delta) }`.
pub fn sample_complexity_t(p: &BoundParams) -> f64 {
    let one_mg = 1.0 - p.gamma;
    let term1 =
        16.0 * p.a_bar0 * p.c_bar / (p.mu_min * one_mg.powi(2) * p.alpha1 * p.alpha2 * p.theta);
    let term2 = 128.0 * p.s() * p.c_bar.powi(2)
        / (p.mu_min
            * one_mg.powi(4)
            * p.alpha1.powi(2)
            * p.alpha2.powi(2)
            * p.theta.powi(2));
    let term3 = 8.0 / p.mu_min * (2.0 * p.s() * p.a() / p.delta_fail).ln();
    p.t0 + term1.max(term2).max(term3)
}

/// Sup-norm bound on the optimal-value shift induced by adding `Delta`
/// one-hot observations to the Dirichlet parameters:
/// `(4 C / (a1 a2)) (|S|^2 |A| / (1-g)^2) ln(1 + Delta / (|S||A| O_alpha))`.
pub fn perturbation_bound(p: &BoundParams) -> f64 {
    let lead = 4.0 * p.c_bar / (p.alpha1 * p.alpha2) * p.s().powi(2) * p.a()
        / (1.0 - p.gamma).powi(2);
    lead * (1.0 + p.delta_obs / (p.s() * p.a() * p.o_alpha)).ln()
}

/// Iterations sufficient for one stage's value iteration to re-converge
/// after a `Delta`-observation posterior update, warm-started from the
/// previous stage's fixed point.
pub fn stage_iteration_bound(p: &BoundParams) -> u64 {
    let inner = (1.0 + p.delta_obs / (p.s() * p.a() * p.o_alpha)).ln();
    let lead = 4.0 * p.c_bar / (p.alpha1 * p.alpha2) * p.s().powi(2) * p.a()
        / (p.theta * (1.0 - p.gamma).powi(2));
    let k = ((1.0 + lead * inner).ln() / (1.0 / p.gamma).ln()).ceil();
    k as u64
}

/// Cumulative iteration bound across one full sweep (all `(s, a)` pairs
/// traversed once), using the sweep's total observation count `delta_obs`
/// and the sweep index `L`.
pub fn sweep_iteration_bound(p: &BoundParams) -> f64 {
    let inner =
        (1.0 + p.delta_obs / (p.s().powi(2) * p.a().powi(2) * (p.o0 + p.sweep_index))).ln();
    let lead = 4.0 * p.c_bar / (p.alpha1 * p.alpha2) * p.s().powi(2) * p.a()
        / (p.theta * (1.0 - p.gamma).powi(2));
    p.s() * p.a() * ((1.0 + lead * inner).ln() / (1.0 / p.gamma).ln() + 1.0)
}
