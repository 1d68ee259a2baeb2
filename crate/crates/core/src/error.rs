use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Toeplitz coefficients must be nonzero")]
    ZeroCoefficient,

    #[error("f(zeta) is undefined at zeta = 0")]
    ZeroArgument,

    #[error("ellipse radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("radius {r} is below the focal-segment radius {r_min}")]
    RadiusBelowMinimum { r: f64, r_min: f64 },

    #[error("characteristic roots coincide at z = {re} + {im}i")]
    DegenerateRoots { re: f64, im: f64 },

    #[error("z = {re} + {im}i lies outside the open ellipse E_1 (|zeta_-| = {modulus})")]
    OutsideDomain { re: f64, im: f64, modulus: f64 },

    #[error("finite-difference step {h} exceeds the admissible {max} at this point")]
    StepTooLarge { h: f64, max: f64 },

    #[error("matrix dimension must be at least {min}, got {n}")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("QR iteration failed to converge after {iterations} sweeps")]
    ConvergenceFailure { iterations: usize },

    #[error("no admissible r0 exists: {0}")]
    Infeasible(String),

    #[error("parameter regime violated: {0}")]
    RegimeViolation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
