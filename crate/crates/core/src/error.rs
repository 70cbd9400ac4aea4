use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrator lost trace or produced populations outside [0, 1]; the
    /// step size is too coarse.
    #[error("integration accuracy: state left the physical set by {drift:.3e} (trace or population) at t = {time:.6} us; retry with a smaller dt (current {dt:.3e} us)")]
    Integration { drift: f64, time: f64, dt: f64 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("scheduling error: event at {at} ns is earlier than now = {now} ns")]
    Schedule { at: f64, now: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
