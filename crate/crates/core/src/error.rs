//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the algebra, state, and measure constructions.
///
/// Variants map one-to-one onto the failure conditions of the public
/// operations; the CLI translates them into exit codes and the FFI layer
/// into status codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Deformation parameters outside their admissible domain.
    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    /// An argument violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidInput(String),

    /// sin(n·θ) vanishes at or below the requested order, so the phase is a
    /// root of unity that breaks the construction there.
    #[error("root of unity: sin(n*theta) vanishes at n = {n}")]
    RootOfUnity { n: usize },

    /// The requested kind/deformation pair yields complex box values on a
    /// path that requires a self-conjugate (real) spectrum.
    #[error("non-real box value: {0}")]
    NonRealValue(String),

    /// The spectrum stops being strictly positive inside the requested range.
    #[error("positivity violation: box({n}) = {value:.6e} is not strictly positive")]
    PositivityViolation { n: usize, value: f64 },

    /// Series truncation failed to reach the requested tolerance.
    #[error("series did not converge within {max_order} terms (tail bound {tail:.3e})")]
    NoConvergence { max_order: usize, tail: f64 },

    /// Reciprocal of a vanishing deformed exponential.
    #[error("division by zero: |exp_q| = {magnitude:.3e} is below tolerance")]
    DivisionByZero { magnitude: f64 },

    /// A spectrum value that must be inverted vanishes.
    #[error("spectrum not invertible: box({}) vanishes (f_{n} undefined)", n + 1)]
    NotInvertible { n: usize },

    /// Square-root argument of an operator map is negative.
    #[error("negative ratio at n = {n}: {ratio:.6e} has no real square root")]
    NegativeRatio { n: usize, ratio: f64 },

    /// Operator and state truncations are incompatible.
    #[error("dimension mismatch: need at least {required}, got {actual}")]
    DimensionMismatch { required: usize, actual: usize },

    /// Two states were built over different sequences or deformations.
    #[error("sequence mismatch: states belong to different spectra")]
    SequenceMismatch,

    /// The transform series grows too fast to sum.
    #[error("series diverges: {0}")]
    Diverges(String),

    /// The construction is not defined for the requested inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature exceeded its refinement budget.
    #[error("quadrature failure: refinement budget of {budget} panels exhausted")]
    QuadratureFailure { budget: usize },

    /// The damped integrand never falls below the cutoff criterion.
    #[error("non-decaying integrand: cutoff criterion unreachable below y = {y_limit:.3e}")]
    NonDecayingIntegrand { y_limit: f64 },

    /// The radial grid truncates while the integrand still carries mass.
    #[error("grid too short: integrand at the last grid point is {ratio:.3e} of its peak")]
    GridTooShort { ratio: f64 },

    /// The weight table is not certified well enough for the request.
    #[error("moment quality too low: need n <= {required} at rel error {tolerance:.3e}, certified {certified}")]
    MomentQualityTooLow {
        required: usize,
        certified: usize,
        tolerance: f64,
    },
}
