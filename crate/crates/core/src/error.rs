use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid body model: {0}")]
    InvalidBody(&'static str),
    #[error("invalid acceleration limits: {0}")]
    InvalidLimits(&'static str),
    #[error("invalid trip {trip_id}: {reason}")]
    InvalidTrip { trip_id: String, reason: String },
    #[error("timestep {t} out of range for trip of length {len}")]
    TimestepOutOfRange { t: usize, len: usize },
    #[error("qp dimension mismatch: {0}")]
    QpDimension(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scenario generation failed for {template} after {attempts} attempts")]
    GenerationExhausted {
        template: &'static str,
        attempts: u32,
    },
}
