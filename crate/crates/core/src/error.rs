//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by configuration, channel, modem, and detection code.
#[derive(Debug, Error)]
pub enum Error {
    /// A frame configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A grid or sequence does not have the dimensions the operation expects.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// A path delay does not land on the sampling grid. Sampled-time channel
    /// application requires integer sample delays; use the analytic
    /// effective-channel path for fractional delays.
    #[error(
        "path {path} has fractional sample delay {delay_samples} (tolerance {tol}); \
         the sampled-time channel only supports integer sample delays, \
         use the analytic effective-channel builder instead"
    )]
    FractionalSampleDelay {
        path: usize,
        delay_samples: f64,
        tol: f64,
    },

    /// A path exceeds the representable normalized range for the frame.
    #[error("path {path} is out of range: {detail}")]
    PathOutOfRange { path: usize, detail: String },

    /// The cyclic prefix cannot absorb the longest channel delay.
    #[error(
        "cyclic prefix of {cp_len} samples is shorter than the maximum path \
         delay of {max_delay_samples} samples"
    )]
    CpTooShort {
        cp_len: usize,
        max_delay_samples: usize,
    },

    /// The closed-form input/output relation requires integer taps.
    #[error(
        "path {path} has non-integer normalized delay/Doppler ({l_i}, {k_i}); \
         the closed-form relation requires integer taps, use the analytic builder"
    )]
    FractionalTap { path: usize, l_i: f64, k_i: f64 },

    /// The regularized MMSE system could not be factorized.
    #[error("singular equalizer system: noise variance 0 and rank-deficient channel")]
    SingularSystem,

    /// The equalizer working-set bound was exceeded.
    #[error("problem size {got} exceeds the dense equalizer bound {bound}")]
    EqualizerTooLarge { got: usize, bound: usize },

    /// A quantity that must be strictly positive was not.
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// Bit-vector length does not match the constellation and grid size.
    #[error("bit count mismatch: expected {expected}, got {got}")]
    BitCountMismatch { expected: usize, got: usize },

    /// Unknown pulse descriptor string.
    #[error("unknown pulse '{0}', expected \"rect\" or \"rc:<beta>\" with beta in [0,1]")]
    UnknownPulse(String),

    /// Unknown channel preset name.
    #[error("unknown channel preset '{0}'")]
    UnknownPreset(String),

    /// An experiment specification is not runnable as written.
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    /// A binary grid file is malformed.
    #[error("malformed grid file: {0}")]
    BadGridFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
