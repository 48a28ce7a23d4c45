use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {error:e})"
    )]
    QuadratureDiverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand is not finite on [{a}, {b}]")]
    NonFinite { a: f64, b: f64 },

    #[error("tail bound {bound:e} at cutoff {cutoff:e} never fell below {tolerance:e}")]
    TailNotBounded {
        cutoff: f64,
        bound: f64,
        tolerance: f64,
    },

    #[error("no published small-r asymptotic for this scenario: {0}")]
    NoAsymptotic(String),

    #[error("{0} is not unimodal on the search interval")]
    NotUnimodal(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureDiverged { .. }
                | Error::NonFinite { .. }
                | Error::TailNotBounded { .. }
                | Error::NotUnimodal(_)
        )
    }
}
