use thiserror::Error;

use crate::ba::BaOutcome;
use crate::dab_ac::DabAcResult;

/// Errors raised by the solvers.
///
/// Iteration-limit variants carry the best state reached so callers can
/// still inspect or resume from it.
#[derive(Debug, Clone, Error)]
pub enum Error<T: std::fmt::Debug = f64> {
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand underflows at every quadrature node (truncation window does not cover x = {x:?})")]
    NumericalUnderflow { x: T },

    #[error("Blahut-Arimoto did not converge within {} iterations", .0.iterations)]
    MaxItersExceeded(Box<BaOutcome<T>>),

    #[error("secant search on the Lagrange multiplier diverged: {0}")]
    SecantDivergence(String),

    #[error("no distribution on the support meets power limit {power_limit:?} (smallest x^2 is {min_power:?})")]
    Infeasible { power_limit: T, min_power: T },

    #[error("no mass point lies strictly between the center and x_max = {x_max:?}")]
    NoMovableIndex { x_max: T },

    #[error("DAB did not converge within {} outer iterations", .0.outer_iterations)]
    MaxOuterItersExceeded(Box<DabAcResult<T>>),

    #[error("probability flow cannot preserve the power constraint: {0}")]
    InfeasibleFlow(String),

    #[error("transition bracket invalid: {0}")]
    BracketInvalid(String),

    #[error("no swept cardinality reaches the gap target at SNR {snr_db:?} dB")]
    NoSatisfyingCardinality { snr_db: T },

    #[error("at {snr_db:?} dB: {message}")]
    AtSnr { snr_db: T, message: String },
}

pub type Result<V, T = f64> = std::result::Result<V, Error<T>>;
