//! Crate-wide error type.
//!
//! The variants mirror the failure contract of the solver: input problems
//! (scenario parse/validation) are distinguished from runtime failures
//! (degenerate states, solver breakdowns) so the CLI can map them onto its
//! stable exit codes (2 = input error, 3 = runtime failure).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A truncation stage that requires omega > 0 met a nonpositive cell.
    /// Only the fully regularized (MNK) coefficient formula is total; the
    /// other stages hard-error instead of clamping silently.
    #[error("degenerate state: omega = {omega} at cell {cell} but stage {stage} requires omega > 0")]
    DegenerateState {
        cell: usize,
        omega: f64,
        stage: &'static str,
    },

    /// A custom slip law without the hook required by the requested operation.
    #[error("unsupported slip law: {0}")]
    UnsupportedLaw(String),

    /// The scalar wall solve did not converge within its iteration cap.
    #[error("wall solve failed to converge: {0}")]
    WallSolve(String),

    /// An iterative or direct linear solve broke down.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Neumann-Poisson data violating the discrete solvability condition.
    #[error("incompatible Neumann-Poisson data: |integral of rhs + boundary flux| = {imbalance:e} exceeds {tol:e}")]
    IncompatibleData { imbalance: f64, tol: f64 },

    /// Explicit-advection CFL number exceeded the configured guard.
    #[error("CFL guard violated: dt*max|v|/h = {cfl} > guard {guard}")]
    CflViolation { cfl: f64, guard: f64 },

    /// Scenario text that does not parse or refers to unknown keys.
    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    /// Scenario that parses but violates the data assumptions.
    #[error("scenario invalid: {0}")]
    ScenarioInvalid(String),

    /// Checkpoint or dump with a bad header, version, or shape.
    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A scaling transform whose rescaled grid/dt/levels are not representable.
    #[error("inadmissible scaling transform: {0}")]
    InadmissibleScale(String),

    /// The E-formulation reconstructed a negative b; reported, never clamped.
    #[error("b floor violated at step {step}, cell {cell}: b = {b}")]
    FloorViolation { step: usize, cell: usize, b: f64 },

    /// A field produced or encountered a non-finite value.
    #[error("non-finite value in field '{field}' at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
