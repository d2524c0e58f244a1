//! Experiment configuration: JSON schema, defaults, and presets.
//!
//! ```json
//! {
//!   "env": {"preset": "coin_toss", "p_head": 0.6},
//!   "risk": {"inner": {"kind": "cvar", "alpha": 0.5}, "outer": {"kind": "mean"}},
//!   "training": {"stages": 20, "delta": 100, "theta": 0.01, "mc_samples": 200,
//!                "epsilon": {"start": 0.3, "decay": 0.9, "floor": 0.05}, "seed": 0},
//!   "eval": {"grid": {"p_head": [0.4, 0.5, 0.6, 0.7, 0.8]}},
//!   "runs": 50,
//!   "out": "out"
//! }
//! ```
//!
//! Unknown keys are rejected. Omitted sections fall back to the defaults
//! above (discount comes from the environment preset).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{EpsilonSchedule, InitialState, StageScheduler, TrainingConfig};
use crate::envs::{build_coin_toss, build_inventory, EnvBundle};
use crate::error::{Error, Result};
use crate::risk::{InnerRiskSpec, OuterRiskSpec, PolyhedralEnvelope, RiskMeasure};

/// Environment selection with resolved parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum EnvSpec {
    CoinToss { p_head: f64 },
    Inventory { n: usize, k: f64, h: f64, p: f64, tilt: f64 },
}

impl EnvSpec {
    pub fn build(&self) -> EnvBundle {
        match self {
            EnvSpec::CoinToss { p_head } => build_coin_toss(*p_head),
            EnvSpec::Inventory { n, k, h, p, tilt } => build_inventory(*n, *k, *h, *p, *tilt),
        }
    }

    /// Default start state: middling heads count, or zero inventory.
    pub fn default_initial_state(&self) -> InitialState {
        match self {
            EnvSpec::CoinToss { .. } => InitialState::Fixed { state: 5 },
            EnvSpec::Inventory { n, .. } => InitialState::Fixed { state: *n },
        }
    }
}

/// Deployment perturbation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationGrid {
    PHead(Vec<f64>),
    Tilt(Vec<f64>),
}

impl PerturbationGrid {
    /// Builds one deployment environment per grid point.
    pub fn deployments(&self, env: &EnvSpec) -> Result<Vec<EnvBundle>> {
        match (self, env) {
            (PerturbationGrid::PHead(ps), EnvSpec::CoinToss { .. }) => {
                Ok(ps.iter().map(|&p| build_coin_toss(p)).collect())
            }
            (PerturbationGrid::Tilt(ts), EnvSpec::Inventory { n, k, h, p, .. }) => {
                Ok(ts.iter().map(|&t| build_inventory(*n, *k, *h, *p, t)).collect())
            }
            _ => Err(Error::SchemaViolation {
                field: "eval.grid".into(),
                reason: "grid kind does not match the environment preset".into(),
            }),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            PerturbationGrid::PHead(ps) => ps.iter().map(|p| format!("p_head={p}")).collect(),
            PerturbationGrid::Tilt(ts) => ts.iter().map(|t| format!("tilt={t}")).collect(),
        }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub training: TrainingConfig,
    pub eval_grid: Option<PerturbationGrid>,
    /// Independent seeded replications.
    pub runs: usize,
    pub out: PathBuf,
}

// ---------------------------------------------------------------------------
// Raw JSON schema (everything optional that has a default).
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    env: RawEnv,
    risk: RawRiskPair,
    #[serde(default)]
    training: RawTraining,
    #[serde(default)]
    eval: Option<RawEval>,
    #[serde(default)]
    runs: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    preset: String,
    p_head: Option<f64>,
    n: Option<usize>,
    k: Option<f64>,
    h: Option<f64>,
    p: Option<f64>,
    tilt: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRiskPair {
    inner: RawRisk,
    outer: RawRisk,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRisk {
    kind: String,
    alpha: Option<f64>,
    constraints: Option<PolyhedralEnvelope>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTraining {
    stages: Option<usize>,
    delta: Option<usize>,
    scheduler: Option<String>,
    theta: Option<f64>,
    mc_samples: Option<usize>,
    epsilon: Option<RawEpsilon>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEpsilon {
    start: f64,
    decay: f64,
    floor: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEval {
    grid: RawGrid,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    p_head: Option<Vec<f64>>,
    tilt: Option<Vec<f64>>,
}

fn resolve_risk(raw: &RawRisk, field: &str) -> Result<RiskMeasure> {
    let violation = |reason: String| Error::SchemaViolation {
        field: field.to_string(),
        reason,
    };
    match raw.kind.as_str() {
        "mean" => {
            if raw.alpha.is_some() {
                return Err(violation("kind \"mean\" takes no alpha".into()));
            }
            Ok(RiskMeasure::Mean)
        }
        "cvar" => {
            let alpha = raw
                .alpha
                .ok_or_else(|| violation("kind \"cvar\" requires alpha".into()))?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(violation(format!("alpha must lie in (0, 1], got {alpha}")));
            }
            Ok(RiskMeasure::Cvar { alpha })
        }
        "envelope" => {
            let constraints = raw
                .constraints
                .clone()
                .ok_or_else(|| violation("kind \"envelope\" requires constraints".into()))?;
            Ok(RiskMeasure::Envelope { constraints })
        }
        other => Err(violation(format!(
            "unknown kind {other:?} (expected mean | cvar | envelope)"
        ))),
    }
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let env = match raw.env.preset.as_str() {
        "coin_toss" => {
            for (name, set) in [
                ("n", raw.env.n.is_some()),
                ("k", raw.env.k.is_some()),
                ("h", raw.env.h.is_some()),
                ("p", raw.env.p.is_some()),
                ("tilt", raw.env.tilt.is_some()),
            ] {
                if set {
                    return Err(Error::SchemaViolation {
                        field: format!("env.{name}"),
                        reason: "not a coin_toss parameter".into(),
                    });
                }
            }
            let p_head = raw.env.p_head.unwrap_or(0.6);
            if !(p_head > 0.0 && p_head < 1.0) {
                return Err(Error::SchemaViolation {
                    field: "env.p_head".into(),
                    reason: format!("must lie in (0, 1), got {p_head}"),
                });
            }
            EnvSpec::CoinToss { p_head }
        }
        "inventory" => {
            if raw.env.p_head.is_some() {
                return Err(Error::SchemaViolation {
                    field: "env.p_head".into(),
                    reason: "not an inventory parameter".into(),
                });
            }
            EnvSpec::Inventory {
                n: raw.env.n.unwrap_or(10),
                k: raw.env.k.unwrap_or(3.0),
                h: raw.env.h.unwrap_or(1.0),
                p: raw.env.p.unwrap_or(2.0),
                tilt: raw.env.tilt.unwrap_or(0.0),
            }
        }
        other => {
            return Err(Error::SchemaViolation {
                field: "env.preset".into(),
                reason: format!("unknown preset {other:?} (expected coin_toss | inventory)"),
            })
        }
    };

    let inner = InnerRiskSpec(resolve_risk(&raw.risk.inner, "risk.inner")?);
    let outer = OuterRiskSpec(resolve_risk(&raw.risk.outer, "risk.outer")?);

    let scheduler = match (raw.training.scheduler.as_deref(), raw.training.delta) {
        (Some("sweep"), None) => StageScheduler::SweepBased,
        (Some("sweep"), Some(_)) => {
            return Err(Error::SchemaViolation {
                field: "training.delta".into(),
                reason: "delta conflicts with the sweep scheduler".into(),
            })
        }
        (Some(other), _) => {
            return Err(Error::SchemaViolation {
                field: "training.scheduler".into(),
                reason: format!("unknown scheduler {other:?} (expected \"sweep\")"),
            })
        }
        (None, delta) => StageScheduler::FixedDelta {
            delta: delta.unwrap_or(100),
        },
    };
    let epsilon = match raw.training.epsilon {
        Some(e) => EpsilonSchedule::new(e.start, e.decay, e.floor)?,
        None => EpsilonSchedule::default(),
    };
    let training = TrainingConfig {
        stages: raw.training.stages.unwrap_or(20),
        scheduler,
        theta: raw.training.theta.unwrap_or(0.01),
        mc_samples: raw.training.mc_samples.unwrap_or(200),
        epsilon,
        seed: raw.training.seed.unwrap_or(0),
        inner,
        outer,
        initial_state: env.default_initial_state(),
    };
    training.validate()?;

    let eval_grid = match raw.eval {
        None => None,
        Some(e) => Some(match (e.grid.p_head, e.grid.tilt) {
            (Some(ps), None) => PerturbationGrid::PHead(ps),
            (None, Some(ts)) => PerturbationGrid::Tilt(ts),
            _ => {
                return Err(Error::SchemaViolation {
                    field: "eval.grid".into(),
                    reason: "exactly one of p_head / tilt must be given".into(),
                })
            }
        }),
    };
    if let Some(grid) = &eval_grid {
        grid.deployments(&env)?;
    }

    let runs = raw.runs.unwrap_or(50);
    if runs == 0 {
        return Err(Error::SchemaViolation {
            field: "runs".into(),
            reason: "must be at least 1".into(),
        });
    }

    Ok(ExperimentConfig {
        env,
        training,
        eval_grid,
        runs,
        out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
    })
}

/// Parses a config document from a string.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::ParseError {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let raw: RawConfig = serde_json::from_value(value).map_err(|e| Error::SchemaViolation {
        field: "<document>".into(),
        reason: e.to_string(),
    })?;
    resolve(raw)
}

/// Reads and validates a config file, applying all defaults.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Named experiment presets replicating the benchmark grids: environment x
/// inner preference, each with an outer-mean or outer-CVaR(0.6) variant.
pub fn preset(name: &str, outer: &str) -> Result<ExperimentConfig> {
    let outer_json = match outer {
        "mean" => r#"{"kind": "mean"}"#.to_string(),
        "cvar" => r#"{"kind": "cvar", "alpha": 0.6}"#.to_string(),
        other => {
            return Err(Error::SchemaViolation {
                field: "outer".into(),
                reason: format!("unknown outer variant {other:?} (expected mean | cvar)"),
            })
        }
    };
    let (env_json, grid_json, inner_json) = match name {
        "coin-mean" => (
            r#"{"preset": "coin_toss"}"#,
            r#"{"p_head": [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]}"#,
            r#"{"kind": "mean"}"#,
        ),
        "coin-cvar" => (
            r#"{"preset": "coin_toss"}"#,
            r#"{"p_head": [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]}"#,
            r#"{"kind": "cvar", "alpha": 0.5}"#,
        ),
        "inventory-mean" => (
            r#"{"preset": "inventory"}"#,
            r#"{"tilt": [-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5]}"#,
            r#"{"kind": "mean"}"#,
        ),
        "inventory-cvar" => (
            r#"{"preset": "inventory"}"#,
            r#"{"tilt": [-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5]}"#,
            r#"{"kind": "cvar", "alpha": 0.5}"#,
        ),
        other => {
            return Err(Error::SchemaViolation {
                field: "preset".into(),
                reason: format!(
                    "unknown preset {other:?} (expected coin-mean | coin-cvar | inventory-mean | inventory-cvar)"
                ),
            })
        }
    };
    let text = format!(
        r#"{{"env": {env_json},
            "risk": {{"inner": {inner_json}, "outer": {outer_json}}},
            "eval": {{"grid": {grid_json}}}}}"#
    );
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "mean"}, "outer": {"kind": "mean"}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.env, EnvSpec::CoinToss { p_head: 0.6 });
        assert_eq!(cfg.training.stages, 20);
        assert_eq!(cfg.training.theta, 0.01);
        assert_eq!(cfg.training.mc_samples, 200);
        assert_eq!(cfg.training.scheduler, StageScheduler::FixedDelta { delta: 100 });
        assert_eq!(cfg.runs, 50);
        let env = cfg.env.build();
        assert_eq!(env.model.gamma(), 0.9);
    }

    #[test]
    fn cvar_inner_parses_with_alpha() {
        let cfg = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "cvar", "alpha": 0.5}, "outer": {"kind": "mean"}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.training.inner.0, RiskMeasure::Cvar { alpha: 0.5 });
    }

    #[test]
    fn cvar_without_alpha_is_a_schema_violation() {
        let got = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "cvar"}, "outer": {"kind": "mean"}}}"#,
        );
        match got {
            Err(Error::SchemaViolation { field, .. }) => assert_eq!(field, "risk.inner"),
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let got = parse_config_str(
            r#"{"env": {"preset": "coin_toss", "typo": 1},
                "risk": {"inner": {"kind": "mean"}, "outer": {"kind": "mean"}}}"#,
        );
        assert!(matches!(got, Err(Error::SchemaViolation { .. })), "{got:?}");
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let got = parse_config_str("{\n  \"env\": !\n}");
        match got {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn grid_must_match_environment() {
        let got = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "mean"}, "outer": {"kind": "mean"}},
                "eval": {"grid": {"tilt": [0.0]}}}"#,
        );
        assert!(matches!(got, Err(Error::SchemaViolation { .. })));
    }

    #[test]
    fn sweep_scheduler_conflicts_with_delta() {
        let got = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "mean"}, "outer": {"kind": "mean"}},
                "training": {"scheduler": "sweep", "delta": 100}}"#,
        );
        assert!(matches!(got, Err(Error::SchemaViolation { .. })));
        let ok = parse_config_str(
            r#"{"env": {"preset": "coin_toss"},
                "risk": {"inner": {"kind": "mean"}, "outer": {"kind": "mean"}},
                "training": {"scheduler": "sweep"}}"#,
        )
        .unwrap();
        assert_eq!(ok.training.scheduler, StageScheduler::SweepBased);
    }

    #[test]
    fn presets_cover_the_experiment_grid() {
        for name in ["coin-mean", "coin-cvar", "inventory-mean", "inventory-cvar"] {
            for outer in ["mean", "cvar"] {
                let cfg = preset(name, outer).unwrap();
                assert_eq!(cfg.runs, 50);
                assert!(cfg.eval_grid.is_some());
                match outer {
                    "mean" => assert_eq!(cfg.training.outer.0, RiskMeasure::Mean),
                    _ => assert_eq!(cfg.training.outer.0, RiskMeasure::Cvar { alpha: 0.6 }),
                }
            }
        }
        assert!(preset("bogus", "mean").is_err());
        assert!(preset("coin-mean", "bogus").is_err());
    }
}
