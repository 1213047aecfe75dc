//! Error types shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical kernel and the physics layers on top of it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input contained NaN or infinite entries, or was otherwise malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix expected to be invertible was singular within the pivot threshold.
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// Eigenvalues coalesced (defective matrix); carries the eigenvalue data so
    /// callers can still inspect the spectrum.
    #[error("degenerate spectrum: eigenvalues coalesce, no biorthogonal normalization")]
    DegenerateSpectrum { eigenvalues: Vec<Complex64> },

    /// The general eigensolver failed to converge.
    #[error("eigensolver did not converge after {0} iterations")]
    EigNoConvergence(usize),

    /// A claimed metric operator was not Hermitian positive-definite.
    #[error("invalid metric: {0}")]
    MetricInvalid(String),

    /// The Hamiltonian does not admit a static biorthogonal metric
    /// (complex or coalesced eigenvalues).
    #[error("not quasi-Hermitian: {0}")]
    NotQuasiHermitian(String),

    /// The integrated metric lost positive-definiteness.
    #[error("metric lost positive-definiteness at t = {time}")]
    MetricDegenerate { time: f64 },

    /// Hermitization left a residual above tolerance.
    #[error("hermitization failure: residual {residual:.3e} exceeds {tolerance:.3e}")]
    HermitizationFailure { residual: f64, tolerance: f64 },

    /// Tr[eta rho] was non-positive, so eta-weighted statistics are undefined.
    #[error("invalid metric trace: Tr[eta rho] = {0:.3e}")]
    InvalidMetricTrace(f64),

    /// State parameters violate positivity: x^2 > theta (1 - theta).
    #[error("nonphysical state: theta = {theta}, x = {x}")]
    NonphysicalState { theta: f64, x: f64 },

    /// A decay rate was negative.
    #[error("invalid rate: {0}")]
    InvalidRate(f64),

    /// An operation received input violating its contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The raw trace of the propagated state fell below the trace floor.
    #[error("norm collapse: Tr[rho~] = {trace:.3e} at t = {time}")]
    NormCollapse { time: f64, trace: f64 },

    /// The master-equation integrator produced a state violating positivity.
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    /// The Liouvillian kernel is not one-dimensional.
    #[error("non-unique steady state: kernel dimension {0}")]
    NonUniqueSteadyState(usize),

    /// The no-jump probability of a Kraus step vanished.
    #[error("degenerate step: p0 = {0:.3e}")]
    DegenerateStep(f64),

    /// The mixed-qubit closed form is undefined near purity; use the SLD sum.
    #[error("pure-state limit: det rho = {0:.3e}, use sld_qfi")]
    PureStateLimit(f64),

    /// A finite-difference step would leave the parameter domain.
    #[error("step adjustment needed: largest feasible step is {max_step:.3e}")]
    StepAdjustment { max_step: f64 },

    /// Unknown closed-form formula identifier.
    #[error("unknown formula: {0}")]
    UnknownFormula(String),

    /// A closed-form formula was evaluated outside its parameter constraints.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
}
