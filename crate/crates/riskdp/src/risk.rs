//! Coherent risk measures over finite supports.
//!
//! The inner risk-transition mapping `sigma(v, m)` evaluates the risk of a
//! value vector `v` under a transition row `m`; the outer measure `beta`
//! evaluates the risk of a Monte Carlo sample treated as uniform atoms.
//! Mean and CVaR go through closed forms; polyhedral envelopes go through
//! the bundled simplex.
//!
//! Convention: costs are minimized, so CVaR is over the upper (bad) tail,
//! `CVaR_a(X) = min_y { y + (1/a) E (X - y)^+ }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, LinearProgram};

/// One affine constraint `coef * xi + offset <= 0` on an envelope weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTerm {
    pub coef: f64,
    pub offset: f64,
}

/// A polyhedral risk envelope over a reweighting vector `xi` with one weight
/// per support atom.
///
/// The feasible set is
/// `{ xi >= 0 : sum_i w_i xi_i = 1,  per-atom rows hold for every atom,
///    averaged rows hold in w-weighted mean }`,
/// where the atom weights `w` are the transition row (inner form) or uniform
/// `1/N` over a sample (outer form). The risk value is the maximum of the
/// reweighted expectation over this set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralEnvelope {
    /// Rows applied to every atom weight separately.
    #[serde(default)]
    pub per_atom: Vec<AffineTerm>,
    /// Rows applied to the w-weighted average of the atom weights.
    #[serde(default)]
    pub averaged: Vec<AffineTerm>,
    /// Whether the probability-weighted mean-one constraint is present.
    /// Disabling it produces an unbounded program; exposed so that the
    /// failure mode stays testable.
    #[serde(default = "default_true")]
    pub mean_one: bool,
}

fn default_true() -> bool {
    true
}

impl PolyhedralEnvelope {
    /// The CVaR envelope `0 <= xi <= 1/alpha`.
    pub fn cvar(alpha: f64) -> Self {
        Self {
            per_atom: vec![AffineTerm {
                coef: 1.0,
                offset: -1.0 / alpha,
            }],
            averaged: vec![],
            mean_one: true,
        }
    }

    /// The expectation envelope `0 <= xi <= 1`, whose only feasible point on
    /// the support is `xi = 1`.
    pub fn mean() -> Self {
        Self {
            per_atom: vec![AffineTerm {
                coef: 1.0,
                offset: -1.0,
            }],
            averaged: vec![],
            mean_one: true,
        }
    }
}

/// A coherent risk measure descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskMeasure {
    Mean,
    Cvar { alpha: f64 },
    Envelope { constraints: PolyhedralEnvelope },
}

impl RiskMeasure {
    pub fn cvar(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::DegenerateAlpha { alpha });
        }
        Ok(RiskMeasure::Cvar { alpha })
    }

    pub fn label(&self) -> String {
        match self {
            RiskMeasure::Mean => "mean".into(),
            RiskMeasure::Cvar { alpha } => format!("cvar({alpha})"),
            RiskMeasure::Envelope { .. } => "envelope".into(),
        }
    }
}

/// Inner risk measure: per-step risk over next-state and cost randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerRiskSpec(pub RiskMeasure);

/// Outer risk measure: risk over posterior uncertainty in the kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRiskSpec(pub RiskMeasure);

impl InnerRiskSpec {
    pub fn mean() -> Self {
        Self(RiskMeasure::Mean)
    }
    pub fn cvar(alpha: f64) -> Result<Self> {
        Ok(Self(RiskMeasure::cvar(alpha)?))
    }
}

impl OuterRiskSpec {
    pub fn mean() -> Self {
        Self(RiskMeasure::Mean)
    }
    pub fn cvar(alpha: f64) -> Result<Self> {
        Ok(Self(RiskMeasure::cvar(alpha)?))
    }
}

/// Cross-section Lipschitz constant `B_sigma` of an inner risk measure, in
/// cost units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzConstant(pub f64);

/// Upper-tail CVaR of a discrete cost distribution.
///
/// Sorts values descending and accumulates probability mass up to `alpha`:
/// atoms strictly inside the tail carry full weight `1/alpha`, the atom
/// straddling the boundary carries the fractional remainder. This is the
/// exact minimizer of the Rockafellar-Uryasev objective
/// `min_y { y + (1/alpha) sum_i m_i (v_i - y)^+ }`.
pub fn cvar_discrete(values: &[f64], probs: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::DegenerateAlpha { alpha });
    }
    assert_eq!(values.len(), probs.len(), "values/probs length mismatch");
    if alpha == 1.0 {
        // CVaR_1 is the expectation; keep it bit-identical to the mean path.
        return Ok(dot(values, probs));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite values"));
    let mut remaining = alpha;
    let mut acc = 0.0;
    for &i in &order {
        let take = probs[i].min(remaining);
        acc += take * values[i];
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    Ok(acc / alpha)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Evaluates the inner risk-transition mapping `sigma(v, m)`.
pub fn sigma_eval(spec: &InnerRiskSpec, v: &[f64], m: &[f64]) -> Result<f64> {
    evaluate(&spec.0, v, m)
}

/// Evaluates the outer risk measure over `N` sample values, treated as
/// uniform atoms of weight `1/N`.
pub fn beta_eval(spec: &OuterRiskSpec, sample_values: &[f64]) -> Result<f64> {
    let n = sample_values.len();
    assert!(n >= 1, "outer risk needs at least one sample");
    match &spec.0 {
        RiskMeasure::Mean => Ok(sample_values.iter().sum::<f64>() / n as f64),
        RiskMeasure::Cvar { alpha } => {
            let uniform = vec![1.0 / n as f64; n];
            cvar_discrete(sample_values, &uniform, *alpha)
        }
        RiskMeasure::Envelope { constraints } => {
            let uniform = vec![1.0 / n as f64; n];
            envelope_lp_solve(constraints, &uniform, sample_values).map(|(value, _)| value)
        }
    }
}

fn evaluate(measure: &RiskMeasure, v: &[f64], m: &[f64]) -> Result<f64> {
    assert_eq!(v.len(), m.len(), "value/probability length mismatch");
    match measure {
        RiskMeasure::Mean => Ok(dot(v, m)),
        RiskMeasure::Cvar { alpha } => cvar_discrete(v, m, *alpha),
        RiskMeasure::Envelope { constraints } => {
            envelope_lp_solve(constraints, m, v).map(|(value, _)| value)
        }
    }
}

/// Solves `max sum_i w_i v_i xi_i` over the envelope polyhedron instantiated
/// at atom weights `w`. Returns the optimal value and the optimizer `xi`.
pub fn envelope_lp_solve(
    env: &PolyhedralEnvelope,
    weights: &[f64],
    values: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = weights.len();
    assert_eq!(values.len(), n, "weights/values length mismatch");
    let objective: Vec<f64> = weights.iter().zip(values).map(|(w, v)| w * v).collect();

    let mut lp = LinearProgram {
        n_vars: n,
        objective,
        eq: vec![],
        le: vec![],
    };
    if env.mean_one {
        lp.eq.push((weights.to_vec(), 1.0));
    }
    for term in &env.per_atom {
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = term.coef;
            lp.le.push((row, -term.offset));
        }
    }
    for term in &env.averaged {
        let row: Vec<f64> = weights.iter().map(|w| w * term.coef).collect();
        let wsum: f64 = weights.iter().sum();
        lp.le.push((row, -term.offset * wsum));
    }
    let sol = simplex::solve(&lp)?;
    Ok((sol.value, sol.x))
}

/// Cross-section Lipschitz constant of the inner risk measure:
/// `c_bar / (1 - gamma)` for the mean, `2 c_bar / (alpha (1 - gamma))` for
/// CVaR. No constant is available for general envelopes.
pub fn lipschitz_b_sigma(
    spec: &InnerRiskSpec,
    c_bar: f64,
    gamma: f64,
) -> Result<LipschitzConstant> {
    match &spec.0 {
        RiskMeasure::Mean => Ok(LipschitzConstant(c_bar / (1.0 - gamma))),
        RiskMeasure::Cvar { alpha } => Ok(LipschitzConstant(2.0 * c_bar / (alpha * (1.0 - gamma)))),
        RiskMeasure::Envelope { .. } => Err(Error::UnsupportedLipschitz {
            kind: "envelope".into(),
        }),
    }
}
