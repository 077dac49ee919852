use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("damper command {f_d} N outside [{f_min}, {f_max}]")]
    DamperOutOfBounds { f_d: f64, f_min: f64, f_max: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("state diverged at step {step} (t = {time} s)")]
    Diverged { step: usize, time: f64 },

    #[error("metrics window after t = {settle_skip} s is empty")]
    EmptyWindow { settle_skip: f64 },

    #[error("no sustained oscillation found for proportional gains up to {max_gain}")]
    NoOscillation { max_gain: f64 },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Numeric failures (as opposed to bad input) map to CLI exit code 2.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_) | Error::Diverged { .. } | Error::NoOscillation { .. } | Error::Optimizer(_)
        )
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
