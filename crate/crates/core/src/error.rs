use thiserror::Error;

/// Errors produced anywhere in the measurement chain.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The carrier cannot be represented at the given sample rate.
    #[error("carrier {carrier_hz} Hz violates Nyquist for sample rate {sample_rate_hz} Hz")]
    Nyquist { carrier_hz: f64, sample_rate_hz: f64 },

    /// A filter specification cannot be met within the tap budget.
    #[error("filter design infeasible: {required_taps} taps required, budget is {max_taps}")]
    Infeasible { required_taps: usize, max_taps: usize },

    /// Not enough input to produce a single valid output.
    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    /// Fixed-point emulation would exceed the register width.
    #[error("fixed-point overflow: {0}")]
    Overflow(String),

    /// A numerical operation is ill-conditioned (near-zero divisor, degenerate fit).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed binary or text input.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// Framed stream violates ordering rules.
    #[error("stream error: {0}")]
    Stream(String),

    /// Nothing to process or export.
    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end:
    /// 1 usage, 2 data/format, 3 numeric/feasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Format { .. } | Error::Stream(_) | Error::Empty(_) | Error::TooShort { .. } | Error::Io(_) => 2,
            Error::Nyquist { .. } | Error::Infeasible { .. } | Error::Overflow(_) | Error::Numeric(_) => 3,
        }
    }
}
