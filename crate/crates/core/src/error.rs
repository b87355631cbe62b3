//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by model construction, assembly, and checks.
#[derive(Debug, Error)]
pub enum HcError {
    /// Model parameters fail validation (non-positive, wrong length, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Lapse profile does not vanish linearly at the bifurcation point.
    /// `measured` is v(s_1)/s_1, `expected` the surface gravity input.
    #[error("lapse not linear at origin: v(s1)/s1 = {measured}, kappa = {expected} (bound {bound})")]
    LapseNotLinear {
        measured: f64,
        expected: f64,
        bound: f64,
    },

    /// Smooth flat extension requires cone angle 2*pi; carries the actual angle.
    #[error("conic singularity: cone angle {angle} differs from 2*pi by {defect:e}")]
    ConicSingularity { angle: f64, defect: f64 },

    /// Two objects were built on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Probe data does not vanish where a theorem's hypotheses require it to.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// Dimension disagreement between operator and data.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Eigendecomposition or linear solve failed to converge.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Scenario configuration is invalid; all violations are listed.
    #[error("invalid config:\n{}", .violations.join("\n"))]
    InvalidConfig { violations: Vec<String> },

    /// Underlying I/O failure (reports, dumps).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, HcError>;
