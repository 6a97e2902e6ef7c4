//! Error type shared by all simulation modules.

use thiserror::Error;

use crate::cancellation::MatchResult;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A sample rate is too low for the signal content it must carry.
    #[error("sample rate {actual_hz} Sa/s below the Nyquist requirement {required_hz} Sa/s")]
    NyquistViolation { required_hz: f64, actual_hz: f64 },

    /// Two signals that must share a sampling grid do not.
    #[error("mismatched sampling grids: {0}")]
    MismatchedGrids(String),

    /// A modulation index is outside the small-signal expansion window.
    #[error("modulation index {0} exceeds the small-signal limit 0.5")]
    IndexOutOfRange(f64),

    /// Filter cutoff incompatible with the sample rate.
    #[error("cutoff {cutoff_hz} Hz invalid at sample rate {sample_rate_hz} Sa/s")]
    InvalidCutoff { cutoff_hz: f64, sample_rate_hz: f64 },

    /// A peak search band contains no spectrum bins.
    #[error("no spectrum bins inside the band [{lo_hz} Hz, {hi_hz} Hz]")]
    EmptyBand { lo_hz: f64, hi_hz: f64 },

    /// Traces with inconsistent lengths, rates or slow-time indices.
    #[error("ragged input: {0}")]
    RaggedInput(String),

    /// Automatic matching stopped on a search bound without converging.
    #[error("matching did not converge (best depth {:.1} dB at ratio {:.6}, delay {:.3e} s)",
            best.depth_db, best.amplitude_ratio, best.delay_error_s)]
    NotConverged { best: MatchResult },

    /// A parameter violated a documented invariant.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
