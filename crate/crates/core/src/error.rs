use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown potential `{0}`")]
    UnknownPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient p must be positive, found p({x}) = {p}")]
    NonPositiveCoefficient { x: f64, p: f64 },

    #[error("tail majorant {bound} does not dominate |1 - 1/p| + |q| = {value} at x = {x}")]
    MajorantViolated { x: f64, value: f64, bound: f64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },

    #[error("integrator exceeded {steps} steps near x = {x}")]
    TooManySteps { x: f64, steps: usize },

    #[error("spectral parameters differ: {0} vs {1}")]
    MismatchedSpectralParameter(Complex64, Complex64),

    #[error("point x = {x} lies outside the sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("truncation point exceeded the cap {cap} before the tail test passed")]
    TailTooLong { cap: f64 },

    #[error("spectral window [{lo}, {hi}] touches the threshold at zero")]
    WindowTouchesThreshold { lo: f64, hi: f64 },

    #[error("spectral parameter {lambda} is at or below the threshold {lambda_min}")]
    BelowThreshold { lambda: f64, lambda_min: f64 },

    #[error("no decaying solution for spectral parameter {0} on the positive axis")]
    NoDecayingSolution(Complex64),

    #[error("decay window too short: majorant tail {tail} beyond x_max = {x_max} exceeds {tol}")]
    DecayWindowTooShort { x_max: f64, tail: f64, tol: f64 },

    #[error("Wronskian {value} at nu = {nu} is numerically zero")]
    SmallWronskian { nu: Complex64, value: Complex64 },

    #[error("|c(lambda)|^2 = {c_abs_sq} at lambda = {lambda} signals numerical breakdown")]
    AmplitudeBreakdown { lambda: f64, c_abs_sq: f64 },

    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectral tail estimate {estimate} still above tolerance at the cap lambda = {lambda_cap}")]
    TailNotSmall { lambda_cap: f64, estimate: f64 },
}
