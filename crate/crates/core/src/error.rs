use thiserror::Error;

pub type Result<T, E = TunerError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TunerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Nothing but silence inside the fundamental search band.
    #[error("no signal detected")]
    NoSignal,

    #[error("malformed WAV data: {0}")]
    Parse(String),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("unsupported sample rate {rate} Hz (supported: 8000, 16000, 48000 Hz)")]
    UnsupportedRate { rate: u32 },

    #[error("capture device unavailable: {0}")]
    DeviceUnavailable(String),

    #[error("capture already in progress")]
    Busy,

    #[error("capture failed: {0}")]
    Capture(String),

    #[error("invalid calibration: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TunerError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TunerError::InvalidArgument(msg.into())
    }
}
