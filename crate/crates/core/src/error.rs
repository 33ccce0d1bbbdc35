use thiserror::Error;

use crate::grassmann::Parity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("an algebra holds at most 64 generators, requested {0}")]
    TooManyGenerators(usize),
    #[error("zero tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
    #[error("operands live in different Grassmann algebras")]
    ContextMismatch,
    #[error("mask {mask:#x} uses generators beyond the {generators} of this algebra")]
    MaskOutOfRange { mask: u64, generators: usize },
    #[error("{0} is not invertible: its body is zero, so it lies in B = Γ⁰ \\ (Γ⁰)*")]
    NonInvertible(&'static str),
    #[error("expected an {expected} element")]
    ParityViolation { expected: Parity },
    #[error("generator {0} listed twice in a Berezin integral")]
    DuplicateGenerator(usize),
    #[error("{function} is undefined at body {body}")]
    Undefined { function: &'static str, body: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("chart {chart} is undefined at this point: z_{chart} has zero body")]
    ChartUndefined { chart: usize },
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("point has no coordinate with invertible body")]
    DegeneratePoint,
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("quadrature did not converge: last refinement changed the value by {change:e} (tolerance {tol:e})")]
    NonConvergent { change: f64, tol: f64 },
    #[error("integrand is not finite at z = {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable code used by the CLI error object.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooManyGenerators(_) => "too_many_generators",
            Error::InvalidTolerance(_) => "invalid_tolerance",
            Error::ContextMismatch => "context_mismatch",
            Error::MaskOutOfRange { .. } => "mask_out_of_range",
            Error::NonInvertible(_) => "non_invertible",
            Error::ParityViolation { .. } => "parity_violation",
            Error::DuplicateGenerator(_) => "duplicate_generator",
            Error::Undefined { .. } => "undefined",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::ChartUndefined { .. } => "chart_undefined",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::DegeneratePoint => "degenerate_point",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NonConvergent { .. } => "non_convergent",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}
