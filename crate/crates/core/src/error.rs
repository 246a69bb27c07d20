use thiserror::Error;

/// Errors raised by the model, solvers and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{quantity} = {value} is outside its domain ({expected})")]
    Domain {
        quantity: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The coupling sits inside the guard radius around the field, where the
    /// oscillator parameters are singular.
    #[error("coupling {gamma} is within {radius:e} of the critical point h = {h}")]
    CriticalPoint { h: f64, gamma: f64, radius: f64 },

    #[error("N = {n_spins} exceeds the supported maximum of {max}")]
    Capacity { n_spins: usize, max: usize },

    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("quadrature did not reach tolerance: estimate {value:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("Fock truncation at n_max = {n_max} leaves tail mass {tail_mass:e}")]
    Truncation { n_max: usize, tail_mass: f64 },

    #[error("only {found} conditioning events in the record, at least {required} needed")]
    InsufficientStatistics { found: usize, required: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_) | Error::Quadrature { .. } | Error::Truncation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
