//! Tabular solver and experiment harness for risk-sensitive robust MDPs.
//!
//! The objective nests two coherent risk measures: an inner measure over
//! next-state and cost randomness, and an outer measure over Bayesian
//! (Dirichlet) posterior uncertainty in the transition kernel. The crate
//! provides:
//!
//! - exact risk Bellman operators for a known kernel, and a Monte Carlo plus
//!   convex-program estimator for Dirichlet posteriors ([`bellman`]);
//! - the stage-wise training loop alternating rollouts, conjugate posterior
//!   updates, and value iteration to tolerance ([`driver`]);
//! - two tabular benchmark environments with oracle solvers, stationary
//!   weighted evaluation, robustness sweeps, and a Q-learning baseline
//!   ([`envs`]);
//! - closed-form complexity-bound calculators ([`bounds`]);
//! - a config-driven experiment runner with CSV/JSON persistence
//!   ([`experiment`]).
//!
//! Start with the `examples/` directory: each file is a runnable walkthrough
//! of one capability (`cargo run --release --example oracle_tables`).

pub mod bayes;
pub mod bellman;
pub mod bounds;
pub mod config;
pub mod driver;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod mdp;
pub mod rng;
pub mod risk;
pub mod simplex;

pub use bayes::{DirichletPosterior, KernelSampleSet, PosteriorAccuracy};
pub use bellman::{IterationResult, QTable, ValueFunction};
pub use error::{Error, Result};
pub use mdp::{MdpModel, Policy, StateChain, TransitionCounts, TransitionKernel, Trajectory};
pub use risk::{InnerRiskSpec, OuterRiskSpec, PolyhedralEnvelope, RiskMeasure};
