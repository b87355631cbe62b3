//! Numerical laboratory for thermal states on static wedges.
//!
//! The crate discretizes a static spacetime wedge whose boundary is a
//! bifurcate Killing horizon, builds the two-sided thermal (KMS) state
//! covariances on the doubled Cauchy surface, assembles the boundary
//! projector of the associated Euclidean cylinder, and cross-checks every
//! structural identity relating them: projector idempotency, covariance
//! purity and positivity, the interior/exterior jump relations, reflection
//! positivity of the cylinder Green operator, and the flat half-space
//! comparison that is only available at the temperature matching the
//! surface gravity.
//!
//! Modules build on each other in one direction:
//! geometry -> operators -> green -> kms -> calderon -> hhi -> scenario.

// Validation guards use `!(x > 0.0)` so NaN input is rejected along with
// nonpositive input; the partial_cmp spelling clippy prefers hides that.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calderon;
pub mod error;
pub mod geometry;
pub mod green;
pub mod hhi;
pub mod kernels;
pub mod kms;
pub mod operators;
pub mod scenario;

pub use calderon::{
    assemble_calderon_closed_form, assemble_calderon_green_trace, block_multipliers,
    boundary_traces, exterior_solution_traces, halfspace_calderon, interior_solution_traces,
    jump_relation_check, source_lapse_power, trace_lapse_power, trace_weights,
    traced_green_responses,
    CalderonProjector, GreenRoute, HalfspaceProjector, Provenance, TraceData, TracedResponse,
};

pub use error::{HcError, Result};
pub use geometry::{
    build_model, cone_angle, cone_angle_defect, doubled_weights, hawking_beta, rhat_identify,
    rhat_identify_inverse, BetaSpec, ConeAngle, DoubledData, Grid1D, HorizonModel, LapseProfile,
    ModelParams, SurfaceData,
};
pub use green::{
    apply_green_analytic, apply_green_fd_oracle, apply_green_fourier_oracle, reflection_pairing,
    CylinderField, Quadrature, ReflectionPairing,
};
pub use hhi::{
    build_hhi_covariances, check_support, push_to_extended, random_probe_pairs,
    restriction_agreement, restriction_agreement_batch, smooth_bump, smoothing_defect_probe,
    symbol_decay_probe, uniqueness_probe, validate_hhi, AgreementReport, DecayReport,
    ExtendedModel, HhiCovariances, HhiValidation, LineCauchy, SmoothingDefect, SymbolTarget,
    UniquenessReport, SUPPORT_WINDOW,
};
pub use kms::{
    charge_matrix, conjugate_by_rhat, covariance_projections, kms_covariances,
    kms_covariances_surface, validate_state, CovariancePair, StateValidation, SurfaceCovariance,
};
pub use operators::{
    assemble_epsilon_squared, certify_semidefinite, min_eigenvalue, operator_norm,
    spectral_decompose, weighted_inner_product, weighted_norm, FormBands, SpectralData,
    SymmetricOperator,
};
pub use scenario::{
    default_tolerances, render_dump, run_convergence, run_scenario, CheckRecord, CheckStatus,
    DumpKind, Gate, GateKind, Report, ReportFormat, ScenarioConfig, CHECK_NAMES,
};
