use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },

    #[error("singular system: condition estimate {condition:.3e}")]
    SingularSystem { condition: f64 },

    #[error("Euler basis is ill-conditioned near gimbal lock (pitch = {pitch} rad)")]
    GimbalLock { pitch: f64 },

    #[error("step size {step:.3e} s fell below the minimum at t = {time} s")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("non-finite state encountered at t = {time} s")]
    NonFinite { time: f64 },

    #[error("not enough samples: {0}")]
    InsufficientData(String),

    #[error("malformed series: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File { path: path.to_path_buf(), source }
    }

    /// True for failures raised by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::GimbalLock { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::NonFinite { .. }
        )
    }
}
