//! Error types shared across the crate.

/// Errors produced by the solvers and report builders.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A gas state violated its basic positivity constraints.
    #[error("invalid gas state: {reason}")]
    InvalidState { reason: String },

    /// A jump was requested from a state that is not strictly supersonic.
    #[error("upstream state is not supersonic (M^2 = {mach_squared:.6e})")]
    NotSupersonic { mach_squared: f64 },

    /// A branch integration started from a state inconsistent with the
    /// requested flow regime.
    #[error("state has M^2 = {mach_squared:.6e}, inconsistent with {expected} branch")]
    RegimeMismatch {
        expected: &'static str,
        mach_squared: f64,
    },

    /// The flow approached the sonic set |M^2 - 1| < eps during integration.
    #[error("flow approaches the sonic point at x0 = {x0:.9} (M^2 = {mach_squared:.9})")]
    SonicApproach { x0: f64, mach_squared: f64 },

    /// The adaptive step controller underflowed its minimum step size.
    #[error("adaptive integrator stalled at x0 = {x0:.9} (step {h:.3e})")]
    StepFailure { x0: f64, h: f64 },

    /// The prescribed back pressure lies outside the admissible interval.
    #[error("back pressure {p_back:.9e} outside admissible interval ({p_lo:.9e}, {p_hi:.9e})")]
    BackPressureOutOfRange { p_back: f64, p_lo: f64, p_hi: f64 },

    /// The exit-pressure sweep shows a sign pattern inconsistent with a
    /// unique shock position.
    #[error("exit pressure is not strictly monotone in the shock radius: {detail}")]
    NonMonotoneResidual { detail: String },

    /// The shock-position bisection exhausted its bracket without meeting the
    /// residual tolerance.
    #[error("shock search stalled with residual {residual:.3e} at r_b = {r_b:.9}")]
    ShockSearchStalled { r_b: f64, residual: f64 },

    /// A quantity violated the sign required of it.
    #[error("sign violation in {name}: value {value:.6e}")]
    SignViolation { name: String, value: f64 },

    /// A first integral drifted beyond the enforcement threshold.
    #[error("first integral {name} drifted by {drift:.3e} (limit {limit:.3e})")]
    FirstIntegralDrift {
        name: &'static str,
        drift: f64,
        limit: f64,
    },

    /// The straightening field is not transverse to the time slices.
    #[error("vector field not transverse: min dx0(X) = {min_x0:.6e}")]
    NotTransverse { min_x0: f64 },

    /// Invalid run configuration or operation arguments.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
