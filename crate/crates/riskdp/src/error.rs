//! Crate-wide error type.

use thiserror::Error;

/// Errors raised anywhere in the solver or experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A transition-kernel or policy row contains a negative entry.
    #[error("negative entry at (s={s}, a={a}, s'={next}): {value}")]
    NegativeEntry {
        s: usize,
        a: usize,
        next: usize,
        value: f64,
    },

    /// A probability row does not sum to one.
    #[error("row (s={s}, a={a}) sums to 1{deviation:+e}")]
    RowSumMismatch { s: usize, a: usize, deviation: f64 },

    /// Simulation asked to start outside the state space.
    #[error("invalid start state {state} for {n_states} states")]
    InvalidStart { state: usize, n_states: usize },

    /// Power iteration for the stationary distribution did not converge.
    #[error("stationary distribution did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// CVaR level outside (0, 1].
    #[error("degenerate CVaR level alpha={alpha}")]
    DegenerateAlpha { alpha: f64 },

    /// The envelope linear program has an empty feasible region.
    #[error("envelope linear program is infeasible")]
    Infeasible,

    /// The envelope linear program is missing a normalization constraint.
    #[error("envelope linear program is unbounded")]
    Unbounded,

    /// No Lipschitz constant is available for this risk kind.
    #[error("no Lipschitz constant for {kind} risk")]
    UnsupportedLipschitz { kind: String },

    /// Value iteration exceeded its iteration cap; signals a contraction violation.
    #[error("iteration cap {cap} exceeded (last residual {residual:e})")]
    IterationCapExceeded { cap: usize, residual: f64 },

    /// Sweep-based rollout failed to observe a new state-action pair.
    #[error("sweep scheduler stalled after {steps} steps without a new (s, a) pair")]
    SweepStalled { steps: usize },

    /// A training stage failed; earlier stages are preserved by the caller.
    #[error("training stage {stage} failed: {source}")]
    StageFailed {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    /// Config file is not valid JSON.
    #[error("config parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },

    /// Config file is valid JSON but violates the schema.
    #[error("config field `{field}`: {reason}")]
    SchemaViolation { field: String, reason: String },

    /// Checkpoint file failed version or invariant checks on load.
    #[error("corrupt checkpoint: {reason}")]
    CorruptCheckpoint { reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Dimension mismatch between tables that must share a model shape.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
