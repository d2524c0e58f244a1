//! Thin command-line front end; all logic lives in the library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riskdp::bounds::{
    perturbation_bound, sample_complexity_t, stage_iteration_bound, sweep_iteration_bound,
    BoundParams,
};
use riskdp::config::{parse_config, preset, ExperimentConfig};
use riskdp::envs::oracle_solve;
use riskdp::experiment::{eval_checkpoint, run_experiment};

#[derive(Parser)]
#[command(name = "riskdp", about = "Risk-sensitive robust dynamic programming for tabular MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOverrides {
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replication count override.
    #[arg(long)]
    runs: Option<usize>,
    /// Parallel replications (0 = one thread per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured environment exactly and print the oracle policy.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Value-iteration tolerance.
        #[arg(long, default_value_t = 1e-6)]
        theta: f64,
    },
    /// Run the configured training experiment.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Robustness sweep of a checkpointed policy over the config's grid.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Print the complexity-bound calculators for a parameter file.
    Bounds {
        /// JSON file deserializing into the bound parameters.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named preset experiment (coin-mean, coin-cvar, inventory-mean,
    /// inventory-cvar), with an outer-mean or outer-cvar variant.
    Replicate {
        preset: String,
        /// Outer risk variant: mean | cvar.
        #[arg(long, default_value = "mean")]
        outer: String,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
}

fn apply_overrides(cfg: &mut ExperimentConfig, ov: &CommonOverrides) {
    if let Some(seed) = ov.seed {
        cfg.training.seed = seed;
    }
    if let Some(out) = &ov.out {
        cfg.out = out.clone();
    }
    if let Some(runs) = ov.runs {
        cfg.runs = runs;
    }
}

fn solve(config: &Path, theta: f64) -> riskdp::Result<()> {
    let cfg = parse_config(config)?;
    let env = cfg.env.build();
    let (value, policy) = oracle_solve(&env, &cfg.training.inner, theta)?;
    println!(
        "# oracle policy for {} under inner {}",
        env.name,
        cfg.training.inner.0.label()
    );
    println!("state,action,value");
    for s in 0..env.model.n_states() {
        println!(
            "{},{},{}",
            env.state_labels[s],
            env.action_labels[policy.greedy_action(s)],
            value.get(s)
        );
    }
    Ok(())
}

fn train(cfg: &mut ExperimentConfig, ov: &CommonOverrides) -> riskdp::Result<()> {
    apply_overrides(cfg, ov);
    let summary = run_experiment(cfg, ov.jobs)?;
    println!(
        "wrote {} runs x {} stages to {}",
        summary.runs,
        summary.stages,
        summary.out_dir.display()
    );
    if let Some(last) = summary.mean_oracle_value.last() {
        println!("final mean oracle value: {last}");
    }
    if let Some(worst) = summary.mean_worst_value.as_ref().and_then(|w| w.last()) {
        println!("final mean worst deployment value: {worst}");
    }
    Ok(())
}

fn eval(config: &Path, checkpoint: &Path) -> riskdp::Result<()> {
    let cfg = parse_config(config)?;
    let report = eval_checkpoint(&cfg, checkpoint)?;
    println!("deployment,value");
    for (label, value) in report.deployment_labels.iter().zip(&report.values) {
        println!("{label},{value}");
    }
    println!("worst,{}", report.worst);
    Ok(())
}

fn bounds(config: &Path) -> riskdp::Result<()> {
    let text = std::fs::read_to_string(config)?;
    let params: BoundParams =
        serde_json::from_str(&text).map_err(|e| riskdp::Error::SchemaViolation {
            field: "<bounds config>".into(),
            reason: e.to_string(),
        })?;
    params.validate()?;
    println!("bound,value");
    println!("sample_complexity_T,{}", sample_complexity_t(&params));
    println!("perturbation_bound,{}", perturbation_bound(&params));
    println!("stage_iteration_bound,{}", stage_iteration_bound(&params));
    println!("sweep_iteration_bound,{}", sweep_iteration_bound(&params));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve { config, theta } => solve(config, *theta),
        Command::Train { config, overrides } => match parse_config(config) {
            Ok(mut cfg) => train(&mut cfg, overrides),
            Err(e) => Err(e),
        },
        Command::Eval { config, checkpoint } => eval(config, checkpoint),
        Command::Bounds { config } => bounds(config),
        Command::Replicate {
            preset: name,
            outer,
            overrides,
        } => match preset(name, outer) {
            Ok(mut cfg) => {
                if overrides.out.is_none() {
                    cfg.out = PathBuf::from(format!("out-{name}-outer-{outer}"));
                }
                train(&mut cfg, overrides)
            }
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
