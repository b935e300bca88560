use alloc::string::String;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {name} = {value}: must satisfy {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Convergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("sampling criterion violated on the {grid} grid: {product} >= pi")]
    Sampling { grid: &'static str, product: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("eigensolver failed on a {dim}x{dim} block (max |G_ij| = {norm:e}): {reason}")]
    Eigen { dim: usize, norm: f64, reason: String },

    #[error("support violation: {0}")]
    Support(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            constraint,
        }
    }

    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_nonconvergence(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Eigen { .. } | Error::Inconclusive(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
