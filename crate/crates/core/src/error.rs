use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to map failures to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed configuration or violated preconditions.
    Validation,
    /// A numerical procedure did not reach its goal (no root, no convergence, collision).
    Numerical,
    /// The input lies outside the mathematical domain of the requested quantity.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not a rotation (orthogonality defect {orthogonality:.3e}, det {det:.6})")]
    NotARotation { orthogonality: f64, det: f64 },

    #[error("matrix is not antisymmetric (defect {defect:.3e})")]
    NotAntisymmetric { defect: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bodies {i} and {j} collide (distance {distance:.3e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("degenerate potential: {0}")]
    DegeneratePotential(String),

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("momentum is zero")]
    ZeroMomentum,

    #[error("no real root: {0}")]
    NoRealRoot(String),

    #[error("negative radicand {0:.6e} in eccentricity")]
    InvalidRadicand(f64),

    #[error("configuration is not balanced (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NotBalanced { residual: f64, tolerance: f64 },

    #[error("invalid collinear case: {0}")]
    InvalidCase(String),

    #[error("degenerate polygon: {0}")]
    DegenerateSpec(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("block {block} has zero momentum but nonzero radius")]
    InactiveBlock { block: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("state is not an equilibrium (rate norm {rate_norm:.3e})")]
    NotAnEquilibrium { rate_norm: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotARotation { .. }
            | Error::NotAntisymmetric { .. }
            | Error::InvalidInput(_)
            | Error::InactiveBlock { .. }
            | Error::NotApplicable(_)
            | Error::InvalidCase(_)
            | Error::DegenerateSpec(_)
            | Error::UnsupportedPotential(_)
            | Error::ZeroMomentum => ErrorKind::Validation,
            Error::Collision { .. }
            | Error::NoRoot(_)
            | Error::NoConvergence { .. }
            | Error::NotBalanced { .. }
            | Error::NotAnEquilibrium { .. } => ErrorKind::Numerical,
            Error::Domain(_)
            | Error::DegeneratePotential(_)
            | Error::NoRealRoot(_)
            | Error::InvalidRadicand(_) => ErrorKind::Domain,
        }
    }
}
