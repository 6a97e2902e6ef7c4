//! Simulation of a photonics-based FMCW radar receiver.
//!
//! The receiver under study combines transmitter-leakage cancellation and
//! echo de-chirping in a single dual-drive Mach-Zehnder modulator (DD-MZM):
//! the de-chirp reference and a tunable cancellation reference drive the
//! upper arm, the received signal (leakage plus target echoes) drives the
//! lower arm, and the modulator is biased at its minimum transmission
//! point so the leakage subtracts from its reference in the optical
//! domain. Square-law photodetection then yields the de-chirped beat
//! signal, from which range, cancellation depth and ISAR images are
//! extracted.
//!
//! Two engines produce the de-chirped traces:
//!
//! * [`pipeline::EngineKind::Physical`] — samples the optical field at
//!   tens of GSa/s, applies the exact modulator transfer function,
//!   square-law detection and a multistage decimating low-pass chain.
//! * [`pipeline::EngineKind::Fast`] — synthesizes the low-frequency beat
//!   tones analytically from the small-signal Bessel expansion of the
//!   same field; orders of magnitude faster and equivalent in-band for
//!   small modulation indices.

pub mod cancellation;
pub mod chirp;
pub mod dechirp;
pub mod error;
pub mod filter;
pub mod isar;
pub mod math;
pub mod photonic;
pub mod pipeline;
pub mod scene;

pub use cancellation::{
    auto_match, cancellation_depth, depth_sweep, DepthReport, MatchBounds, MatchResult,
    MismatchConfig, SweepAxis,
};
pub use chirp::{ChirpParams, SampledSignal, C};
pub use dechirp::{
    concat_traces, dechirp_frequency, find_peak, frequency_to_range, spectrum, synth_dechirped,
    DechirpTrace, LinkSetup, NoiseSpec, SpectrumEstimate, SpectrumPeak, Window,
};
pub use error::Error;
pub use filter::{apply_filter, FilterKind, FilterSpec};
pub use isar::{
    build_cube, extract_peaks, form_image, resolutions, DataCube, ImagePeak, IsarImage, IsarParams,
    ResolutionReport, IMAGE_FLOOR_DB,
};
pub use photonic::{
    bessel_sidebands, ddmzm_field_exact, optical_spectrum, photodetect, BesselSidebands,
    ModulatorConfig, OpticalEnvelope, PdConfig,
};
pub use pipeline::{run_engine, CaptureConfig, EngineKind, PhysicalConfig};
pub use scene::{PointTarget, Scene};
