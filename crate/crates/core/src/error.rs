use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid stencil: {0}")]
    InvalidStencil(&'static str),
    #[error("invalid time window [{t0}, {tf}]")]
    InvalidWindow { t0: f64, tf: f64 },
    #[error("time window of length {length} is too short, need more than {required}")]
    WindowTooShort { length: f64, required: f64 },
    #[error("time {t} is not aligned with the sampling grid")]
    Misaligned { t: f64 },
    #[error("time {t} is outside the sampled range")]
    OutOfRange { t: f64 },
    #[error("sampling step {path} does not match operator step {operator}")]
    StepMismatch { path: f64, operator: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator does not satisfy the convergence conditions")]
    NonConforming,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("Ω²(ε) = {re} + {im}i is not real")]
    NonRealOmegaSquared { re: f64, im: f64 },
    #[error("Ω²(ε) = {0} is not positive")]
    NonPositiveOmegaSquared(f64),
    #[error("W_c(1) is not constant on the interior (spread {spread})")]
    NonConstantInterior { spread: f64 },
    #[error("W_s(1) = {0} does not vanish on the interior")]
    NonVanishingWs(f64),
    #[error("exponent β = 2 makes the expansion factor singular")]
    SingularExponent,
    #[error("invalid potential: {0}")]
    InvalidPotential(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(&'static str),
    #[error("collision between bodies {i} and {j}")]
    Collision { i: usize, j: usize },
    #[error("body {0} is massless and the potential has no per-unit-mass form")]
    MasslessBody(usize),
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("verification failed: residual {residual} exceeds {tolerance}")]
    VerificationFailed { residual: f64, tolerance: f64 },
    #[error("stencil has no marching form")]
    NoMarchingForm,
    #[error("singular step matrix at node {node}")]
    SingularStep { node: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

impl Error {
    /// Numerical failures (as opposed to invalid inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonRealOmegaSquared { .. }
                | Error::NonPositiveOmegaSquared(_)
                | Error::NonConstantInterior { .. }
                | Error::NonVanishingWs(_)
                | Error::Collision { .. }
                | Error::NotConverged { .. }
                | Error::SingularJacobian
                | Error::VerificationFailed { .. }
                | Error::SingularStep { .. }
        )
    }
}
