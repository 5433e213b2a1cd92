use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrand is not finite at y = {y:e} (value {value})")]
    NonFiniteIntegrand { y: f64, value: f64 },

    #[error("{quantity}: quadrature did not converge (value {value:e}, error estimate {error:e})")]
    QuadratureNotConverged {
        quantity: &'static str,
        value: f64,
        error: f64,
    },

    #[error("function is not finite at x = {x:e}")]
    NonFiniteFunction { x: f64 },

    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{0}: no sign change found")]
    NoSignChange(&'static str),

    #[error(
        "no reservation-price equilibrium at shopper share {shopper_share}: \
         requires shopper share >= lambda_hat = {lambda_hat}"
    )]
    NoReservationPrice { shopper_share: f64, lambda_hat: f64 },

    #[error("malformed table at line {line}: {message}")]
    MalformedTable { line: u64, message: String },
}

impl Error {
    /// Parameter and input-format problems, as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidBracket { .. }
                | Error::MalformedTable { .. }
        )
    }
}
