//! Config-driven experiment runner.
//!
//! Each replication trains with its own derived seed and streams one CSV row
//! per stage (flushed as stages complete, so partial output survives an
//! abort). The aggregate file holds per-stage means across runs. Posterior
//! and greedy policy land in a JSON checkpoint per run.
//!
//! Floats are written in shortest round-trip decimal form, so aggregates are
//! exactly recomputable from the per-run files. Wall-clock columns are the
//! one exception to bit-level determinism; everything else is a pure
//! function of (config, seed).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::DirichletPosterior;
use crate::config::ExperimentConfig;
use crate::driver::{run_training_with, StageResult, TrainingConfig, TrainingLog};
use crate::envs::{robustness_sweep, stationary_weighted_value, EnvBundle};
use crate::error::{Error, Result};
use crate::mdp::Policy;
use crate::rng::derive_seed;

/// Tolerance for the evaluation-side policy evaluations.
pub const EVAL_THETA: f64 = 1e-6;

/// Fixed CSV header of the per-run stage files.
pub const RUN_CSV_HEADER: &str =
    "run,stage,steps_seen,iterations,oracle_value,worst_deploy_value,wall_ms";

/// Per-stage metrics of one run, in stage order.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub oracle_values: Vec<f64>,
    pub worst_values: Option<Vec<f64>>,
    pub iterations: Vec<usize>,
    pub final_greedy: Policy,
}

/// Aggregate of an experiment: per-stage means across runs.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub stages: usize,
    pub mean_oracle_value: Vec<f64>,
    pub mean_worst_value: Option<Vec<f64>>,
    pub out_dir: PathBuf,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs one replication, streaming rows into its CSV files.
fn run_one(cfg: &ExperimentConfig, env: &EnvBundle, run: usize) -> Result<RunRecord> {
    let seed = derive_seed(cfg.training.seed, "run", run as u64);
    let training = TrainingConfig {
        seed,
        ..cfg.training.clone()
    };
    let deployments: Option<(Vec<EnvBundle>, Vec<String>)> = match &cfg.eval_grid {
        Some(grid) => Some((grid.deployments(&cfg.env)?, grid.labels())),
        None => None,
    };

    let run_path = cfg.out.join(format!("run_{run:03}.csv"));
    let mut run_csv = BufWriter::new(File::create(&run_path)?);
    writeln!(run_csv, "{RUN_CSV_HEADER}")?;

    let mut rob_csv = match &deployments {
        Some((_, labels)) => {
            let path = cfg.out.join(format!("robustness_{run:03}.csv"));
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "run,stage,{},worst", labels.join(","))?;
            Some(w)
        }
        None => None,
    };

    let mut oracle_values = Vec::new();
    let mut worst_values = Vec::new();
    let mut iterations = Vec::new();
    let mut steps_seen = 0usize;
    let mut stage_error: Option<Error> = None;

    let inner = training.inner.clone();
    let log: Result<TrainingLog> = run_training_with(
        &env.kernel,
        &env.model,
        &DirichletPosterior::uniform_prior(env.model.n_states(), env.model.n_actions()),
        &training,
        |stage: &StageResult| {
            if stage_error.is_some() {
                return;
            }
            let mut eval = || -> Result<()> {
                steps_seen += stage.steps;
                let oracle = stationary_weighted_value(env, &stage.greedy, &inner, EVAL_THETA)?;
                oracle_values.push(oracle);
                iterations.push(stage.iterations);
                let worst = match &deployments {
                    Some((envs, _)) => {
                        let report = robustness_sweep(&stage.greedy, envs, &inner, EVAL_THETA)?;
                        if let Some(w) = rob_csv.as_mut() {
                            let cols: Vec<String> =
                                report.values.iter().map(|v| v.to_string()).collect();
                            writeln!(
                                w,
                                "{run},{},{},{}",
                                stage.stage,
                                cols.join(","),
                                report.worst
                            )?;
                            w.flush()?;
                        }
                        worst_values.push(report.worst);
                        Some(report.worst)
                    }
                    None => None,
                };
                writeln!(
                    run_csv,
                    "{run},{},{steps_seen},{},{oracle},{},{}",
                    stage.stage,
                    stage.iterations,
                    fmt_opt(worst),
                    stage.wall_ms
                )?;
                run_csv.flush()?;
                Ok(())
            };
            if let Err(e) = eval() {
                stage_error = Some(e);
            }
        },
    );
    let log = log?;
    if let Some(e) = stage_error {
        return Err(e);
    }

    let final_greedy = log
        .final_greedy_policy()
        .cloned()
        .unwrap_or_else(|| Policy::uniform(env.model.n_states(), env.model.n_actions()));

    // Training log and checkpoint for this run.
    let log_path = cfg.out.join(format!("log_{run:03}.json"));
    fs::write(&log_path, serde_json::to_string_pretty(&log)?.as_bytes())?;
    save_checkpoint(
        &log.posterior,
        &final_greedy,
        &cfg.out.join(format!("checkpoint_{run:03}.json")),
    )?;

    Ok(RunRecord {
        run,
        seed,
        oracle_values,
        worst_values: deployments.as_ref().map(|_| worst_values),
        iterations,
        final_greedy,
    })
}

/// Runs all replications (optionally in parallel), writes per-run CSVs,
/// training logs, checkpoints, and the aggregate CSV.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentSummary> {
    fs::create_dir_all(&cfg.out)?;
    let env = cfg.env.build();

    let records: Result<Vec<RunRecord>> = if jobs == 1 {
        (0..cfg.runs).map(|r| run_one(cfg, &env, r)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::DimensionMismatch {
                context: format!("thread pool: {e}"),
            })?;
        pool.install(|| {
            (0..cfg.runs)
                .into_par_iter()
                .map(|r| run_one(cfg, &env, r))
                .collect()
        })
    };
    let records = records?;

    let stages = records.iter().map(|r| r.oracle_values.len()).min().unwrap_or(0);
    let mean_over = |extract: &dyn Fn(&RunRecord) -> Option<&[f64]>| -> Option<Vec<f64>> {
        let per_run: Vec<&[f64]> = records.iter().filter_map(extract).collect();
        if per_run.len() != records.len() {
            return None;
        }
        Some(
            (0..stages)
                .map(|u| per_run.iter().map(|xs| xs[u]).sum::<f64>() / per_run.len() as f64)
                .collect(),
        )
    };
    let mean_oracle_value =
        mean_over(&|r| Some(r.oracle_values.as_slice())).expect("every run reports oracle values");
    let mean_worst_value = mean_over(&|r| r.worst_values.as_deref());

    let agg_path = cfg.out.join("aggregate.csv");
    let mut agg = BufWriter::new(File::create(&agg_path)?);
    writeln!(agg, "stage,oracle_value_mean,worst_deploy_value_mean")?;
    for u in 0..stages {
        writeln!(
            agg,
            "{},{},{}",
            u + 1,
            mean_oracle_value[u],
            fmt_opt(mean_worst_value.as_ref().map(|w| w[u]))
        )?;
    }
    agg.flush()?;

    // Echo the resolved config next to the outputs.
    fs::write(
        cfg.out.join("config.json"),
        serde_json::to_string_pretty(cfg)?.as_bytes(),
    )?;

    Ok(ExperimentSummary {
        runs: cfg.runs,
        stages,
        mean_oracle_value,
        mean_worst_value,
        out_dir: cfg.out.clone(),
    })
}

/// Evaluates a checkpointed policy across a deployment grid.
pub fn eval_checkpoint(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
) -> Result<crate::envs::RobustnessReport> {
    let grid = cfg.eval_grid.as_ref().ok_or_else(|| Error::SchemaViolation {
        field: "eval.grid".into(),
        reason: "eval requires a deployment grid".into(),
    })?;
    let (_, policy) = load_checkpoint(checkpoint)?;
    let deployments = grid.deployments(&cfg.env)?;
    let mut report = robustness_sweep(&policy, &deployments, &cfg.training.inner, EVAL_THETA)?;
    report.deployment_labels = grid.labels();
    Ok(report)
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    n_states: usize,
    n_actions: usize,
    /// Dirichlet parameters indexed `[s][a][s']`.
    alpha: Vec<Vec<Vec<f64>>>,
    /// Policy rows indexed `[s][a]`.
    policy: Vec<Vec<f64>>,
}

/// Writes posterior and policy as JSON; floats round-trip exactly.
pub fn save_checkpoint(
    posterior: &DirichletPosterior,
    policy: &Policy,
    path: &Path,
) -> Result<()> {
    let (ns, na) = (posterior.n_states(), posterior.n_actions());
    let alpha = (0..ns)
        .map(|s| (0..na).map(|a| posterior.row(s, a).to_vec()).collect())
        .collect();
    let rows = (0..policy.n_states()).map(|s| policy.row(s).to_vec()).collect();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        n_states: ns,
        n_actions: na,
        alpha,
        policy: rows,
    };
    fs::write(path, serde_json::to_string(&file)?.as_bytes())?;
    Ok(())
}

/// Loads a checkpoint, enforcing version and table invariants.
pub fn load_checkpoint(path: &Path) -> Result<(DirichletPosterior, Policy)> {
    let text = fs::read_to_string(path)?;
    let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| Error::CorruptCheckpoint {
        reason: e.to_string(),
    })?;
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::CorruptCheckpoint {
            reason: format!("version {} (expected {CHECKPOINT_VERSION})", file.version),
        });
    }
    let (ns, na) = (file.n_states, file.n_actions);
    let mut alpha = Vec::with_capacity(ns * na * ns);
    if file.alpha.len() != ns {
        return Err(Error::CorruptCheckpoint {
            reason: "alpha outer dimension mismatch".into(),
        });
    }
    for per_state in &file.alpha {
        if per_state.len() != na {
            return Err(Error::CorruptCheckpoint {
                reason: "alpha action dimension mismatch".into(),
            });
        }
        for row in per_state {
            if row.len() != ns {
                return Err(Error::CorruptCheckpoint {
                    reason: "alpha row length mismatch".into(),
                });
            }
            alpha.extend_from_slice(row);
        }
    }
    let posterior =
        DirichletPosterior::from_alpha(ns, na, alpha).map_err(|e| Error::CorruptCheckpoint {
            reason: e.to_string(),
        })?;
    let flat: Vec<f64> = file.policy.iter().flatten().copied().collect();
    let policy = Policy::new(ns, na, flat).map_err(|e| Error::CorruptCheckpoint {
        reason: e.to_string(),
    })?;
    Ok((posterior, policy))
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::SchemaViolation {
            field: "<json>".into(),
            reason: e.to_string(),
        }
    }
}
