//! Fast analytic synthesis of the de-chirped signal, spectrum
//! estimation and the frequency-to-range mapping.
//!
//! After square-law detection and low-pass filtering, every pair of
//! drive components (delays tau_i, tau_j) beats into a tone at
//! `k |tau_i - tau_j|`. With component sideband weights J1(m) and arm
//! signs sigma (+1 upper, -1 lower), the low-passed photocurrent at
//! bias pi + eps is
//!
//! ```text
//! i(t) = R s^2 [ 1 - cos(eps) P
//!                + cos(eps) * sum_{i<j} 2 sigma_i sigma_j J1(m_i) J1(m_j) P_ij cos(phi_ij(t)) ]
//! phi_ij(t) = (tau_j - tau_i) (w_s - pi k (tau_i + tau_j)) + 2 pi k (tau_j - tau_i) t
//! ```
//!
//! where `P` is the product of all J0(m_k) and `P_ij` the product over
//! the remaining components. The expansion follows directly from the
//! Jacobi-Anger series of the exact modulator output, so the fast and
//! physical engines agree in-band for small modulation indices: a bias
//! error only rescales every beat by cos(eps) and shifts the DC level.
//! The de-chirp reference beating with the cancellation reference and
//! with the leakage produces the two opposed leakage-band tones whose
//! residual the cancellation module measures.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::cancellation::MismatchConfig;
use crate::chirp::{ChirpParams, C};
use crate::error::Error;
use crate::math::{bessel_j0, bessel_j1};
use crate::photonic::{ModulatorConfig, PdConfig};
use crate::scene::Scene;

/// Everything fixed about the link: reference chirp, scene, modulator
/// and photodetector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSetup {
    /// De-chirp reference drive; its `delay_s` is tau_D.
    pub chirp: ChirpParams,
    pub scene: Scene,
    pub modulator: ModulatorConfig,
    pub pd: PdConfig,
}

/// One drive component entering the beat expansion.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DriveComponent {
    pub amplitude_v: f64,
    pub delay_s: f64,
    pub upper_arm: bool,
}

impl LinkSetup {
    pub fn validate(&self) -> Result<(), Error> {
        self.chirp.validate()?;
        self.scene.validate()?;
        self.modulator.validate()?;
        if !(self.pd.responsivity_a_per_w > 0.0) {
            return Err(Error::invalid("responsivity must be > 0"));
        }
        Ok(())
    }

    /// Drive components present at one slow-time instant.
    pub(crate) fn components(&self, mismatch: &MismatchConfig, slow_time_s: f64) -> Vec<DriveComponent> {
        let mut parts = vec![DriveComponent {
            amplitude_v: self.chirp.amplitude_v,
            delay_s: self.chirp.delay_s,
            upper_arm: true,
        }];
        if mismatch.enabled {
            parts.push(DriveComponent {
                amplitude_v: mismatch.amplitude_ratio * self.scene.leakage_amplitude_v,
                delay_s: self.scene.leakage_delay_s + mismatch.delay_error_s,
                upper_arm: true,
            });
        }
        parts.push(DriveComponent {
            amplitude_v: self.scene.leakage_amplitude_v,
            delay_s: self.scene.leakage_delay_s,
            upper_arm: false,
        });
        for idx in 0..self.scene.targets.len() {
            parts.push(DriveComponent {
                amplitude_v: self.scene.targets[idx].reflectivity * self.scene.leakage_amplitude_v,
                delay_s: self.scene.echo_delay(idx, slow_time_s),
                upper_arm: false,
            });
        }
        parts
    }

    /// Largest component delay in the scene (s).
    pub fn max_delay(&self) -> f64 {
        self.scene.max_echo_delay().max(self.chirp.delay_s)
    }

    /// Effective bias deviation from the minimum transmission point.
    pub(crate) fn bias_error(&self, mismatch: &MismatchConfig) -> f64 {
        (self.modulator.bias_phase_rad - PI) + mismatch.bias_error_rad
    }
}

/// Additive Gaussian noise on the de-chirped traces; a stand-in for the
/// hardware's de-chirped background noise, reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub enabled: bool,
    pub std_dev: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn off() -> NoiseSpec {
        NoiseSpec {
            enabled: false,
            std_dev: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.std_dev < 0.0 {
            return Err(Error::invalid("noise std dev must be >= 0"));
        }
        Ok(())
    }
}

/// One fast-time period of the de-chirped signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DechirpTrace {
    pub sample_rate_hz: f64,
    pub slow_time_index: usize,
    /// Leading samples blanked against the chirp wrap-around artifact.
    pub guard_samples: usize,
    pub samples: Vec<f64>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trace RNG seed, independent of evaluation order.
fn trace_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64 + 1))
}

pub(crate) fn apply_noise(trace: &mut DechirpTrace, noise: &NoiseSpec) {
    if !noise.enabled || noise.std_dev == 0.0 {
        return;
    }
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(trace_seed(noise.seed, trace.slow_time_index));
    let normal = Normal::new(0.0, noise.std_dev).expect("std dev validated");
    for s in &mut trace.samples {
        *s += normal.sample(&mut rng);
    }
}

pub(crate) fn blank_guard(trace: &mut DechirpTrace, max_delay_s: f64) {
    let guard = (max_delay_s * trace.sample_rate_hz).ceil() as usize;
    let guard = guard.min(trace.samples.len());
    for s in &mut trace.samples[..guard] {
        *s = 0.0;
    }
    trace.guard_samples = guard;
}

/// Synthesize the de-chirped low-frequency signal for `n_periods`
/// consecutive chirp periods starting at `slow_time_start`. Echo delays
/// are frozen at each period's slow-time midpoint (stop-and-hop).
pub fn synth_dechirped(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    n_periods: usize,
    sample_rate_hz: f64,
    noise: &NoiseSpec,
    slow_time_start_s: f64,
) -> Result<Vec<DechirpTrace>, Error> {
    setup.validate()?;
    mismatch.validate()?;
    noise.validate()?;
    if n_periods == 0 {
        return Err(Error::invalid("n_periods must be >= 1"));
    }
    let k = setup.chirp.chirp_rate_hz_per_s;
    let max_delay = setup.max_delay() + mismatch.delay_error_s.abs();
    let required = 2.0 * k * max_delay;
    if sample_rate_hz < required {
        return Err(Error::NyquistViolation {
            required_hz: required,
            actual_hz: sample_rate_hz,
        });
    }
    let period = setup.chirp.period_s;
    let m_samples = (sample_rate_hz * period).round() as usize;
    if m_samples < 2 {
        return Err(Error::invalid("fewer than 2 samples per period"));
    }
    // reject modulation indices outside the expansion's validity window
    {
        let parts = setup.components(mismatch, slow_time_start_s);
        for p in &parts {
            let m = setup.modulator.modulation_index(p.amplitude_v);
            if m > 0.5 {
                return Err(Error::IndexOutOfRange(m));
            }
        }
    }

    let traces: Vec<DechirpTrace> = (0..n_periods)
        .into_par_iter()
        .map(|p| {
            let mid = slow_time_start_s + (p as f64 + 0.5) * period;
            let mut trace = synth_one_period(setup, mismatch, sample_rate_hz, m_samples, mid, p);
            blank_guard(&mut trace, max_delay);
            apply_noise(&mut trace, noise);
            trace
        })
        .collect();
    Ok(traces)
}

fn synth_one_period(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    sample_rate_hz: f64,
    m_samples: usize,
    slow_mid_s: f64,
    index: usize,
) -> DechirpTrace {
    let parts = setup.components(mismatch, slow_mid_s);
    let scale2 = setup.modulator.input_power_scale * setup.modulator.input_power_scale;
    let gain = setup.pd.responsivity_a_per_w * scale2;
    let cos_eps = setup.bias_error(mismatch).cos();
    let w_s = 2.0 * PI * setup.chirp.f_start_hz;
    let k = setup.chirp.chirp_rate_hz_per_s;

    let j0: Vec<f64> = parts
        .iter()
        .map(|p| bessel_j0(setup.modulator.modulation_index(p.amplitude_v)))
        .collect();
    let j1: Vec<f64> = parts
        .iter()
        .map(|p| bessel_j1(setup.modulator.modulation_index(p.amplitude_v)))
        .collect();
    let j0_all: f64 = j0.iter().product();

    let dc = gain * (1.0 - cos_eps * j0_all);

    // (amplitude, phase intercept, angular rate) per component pair
    let mut tones: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            let sign = if parts[i].upper_arm == parts[j].upper_arm {
                1.0
            } else {
                -1.0
            };
            let mut rest = 1.0;
            for (k_idx, &v) in j0.iter().enumerate() {
                if k_idx != i && k_idx != j {
                    rest *= v;
                }
            }
            let amp = gain * cos_eps * 2.0 * sign * j1[i] * j1[j] * rest;
            if amp == 0.0 {
                continue;
            }
            let (ti, tj) = (parts[i].delay_s, parts[j].delay_s);
            let a = (tj - ti) * (w_s - PI * k * (ti + tj));
            let b = 2.0 * PI * k * (tj - ti);
            tones.push((amp, a, b));
        }
    }

    let samples = (0..m_samples)
        .map(|n| {
            let t = n as f64 / sample_rate_hz;
            let mut v = dc;
            for &(amp, a, b) in &tones {
                v += amp * (a + b * t).cos();
            }
            v
        })
        .collect();
    DechirpTrace {
        sample_rate_hz,
        slow_time_index: index,
        guard_samples: 0,
        samples,
    }
}

/// Join consecutive per-period traces into one capture.
pub fn concat_traces(traces: &[DechirpTrace]) -> Result<DechirpTrace, Error> {
    let first = traces
        .first()
        .ok_or_else(|| Error::RaggedInput("no traces to concatenate".into()))?;
    let mut samples = Vec::with_capacity(first.samples.len() * traces.len());
    for (i, t) in traces.iter().enumerate() {
        if t.sample_rate_hz != first.sample_rate_hz {
            return Err(Error::RaggedInput("sample rates differ".into()));
        }
        if t.slow_time_index != first.slow_time_index + i {
            return Err(Error::RaggedInput("slow-time indices not contiguous".into()));
        }
        samples.extend_from_slice(&t.samples);
    }
    Ok(DechirpTrace {
        sample_rate_hz: first.sample_rate_hz,
        slow_time_index: first.slow_time_index,
        guard_samples: first.guard_samples,
        samples,
    })
}

/// Spectral analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    pub fn name(&self) -> &'static str {
        match self {
            Window::Rectangular => "rect",
            Window::Hann => "hann",
        }
    }

    pub fn samples(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// One-sided power spectrum in dB. Powers are normalized so a
/// bin-centered tone of amplitude A reads its mean-square power A^2/2
/// (0 dB for a unit-RMS tone) independent of the window; empty bins are
/// clamped at -300 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub freq_hz: Vec<f64>,
    pub power_db: Vec<f64>,
    pub window_name: String,
    pub bin_width_hz: f64,
}

/// A located spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPeak {
    pub frequency_hz: f64,
    pub power_db: f64,
    /// Whether quadratic interpolation refined the frequency.
    pub interpolated: bool,
}

/// Windowed periodogram of one trace.
pub fn spectrum(trace: &DechirpTrace, window: Window) -> Result<SpectrumEstimate, Error> {
    let n = trace.samples.len();
    if n < 16 {
        return Err(Error::invalid("spectrum needs at least 16 samples"));
    }
    let w = window.samples(n);
    let w_sum: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = trace
        .samples
        .iter()
        .zip(&w)
        .map(|(&s, &wi)| Complex64::new(s * wi, 0.0))
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let half = n / 2;
    let norm = 1.0 / (w_sum * w_sum);
    let bin = trace.sample_rate_hz / n as f64;
    let mut freq_hz = Vec::with_capacity(half + 1);
    let mut power_db = Vec::with_capacity(half + 1);
    for i in 0..=half {
        let two_sided = i != 0 && !(n % 2 == 0 && i == half);
        let factor = if two_sided { 2.0 } else { 1.0 };
        let p = (factor * buf[i].norm_sqr() * norm).max(1e-30);
        freq_hz.push(i as f64 * bin);
        power_db.push(10.0 * p.log10());
    }
    Ok(SpectrumEstimate {
        freq_hz,
        power_db,
        window_name: window.name().to_string(),
        bin_width_hz: bin,
    })
}

/// De-chirped beat frequency of a path with round-trip delay `tau`.
pub fn dechirp_frequency(tau_s: f64, chirp: &ChirpParams) -> f64 {
    chirp.chirp_rate_hz_per_s * tau_s
}

/// Range corresponding to a de-chirped frequency: R = c f / (2 k).
pub fn frequency_to_range(f_hz: f64, chirp: &ChirpParams) -> f64 {
    C * f_hz / (2.0 * chirp.chirp_rate_hz_per_s)
}

/// Maximum-power bin inside `band`, ties broken toward the lower
/// frequency, refined by 3-point quadratic interpolation when the
/// neighbors exist.
pub fn find_peak(spec: &SpectrumEstimate, band: (f64, f64)) -> Result<SpectrumPeak, Error> {
    let (lo, hi) = band;
    let mut best: Option<usize> = None;
    for (i, &f) in spec.freq_hz.iter().enumerate() {
        if f < lo || f > hi {
            continue;
        }
        match best {
            Some(b) if spec.power_db[i] <= spec.power_db[b] => {}
            _ => best = Some(i),
        }
    }
    let c = best.ok_or(Error::EmptyBand { lo_hz: lo, hi_hz: hi })?;
    let mut frequency_hz = spec.freq_hz[c];
    let mut power_db = spec.power_db[c];
    let mut interpolated = false;
    if c > 0 && c + 1 < spec.power_db.len() {
        let (pl, pc, pr) = (spec.power_db[c - 1], spec.power_db[c], spec.power_db[c + 1]);
        let denom = pl - 2.0 * pc + pr;
        if denom.abs() > 1e-12 {
            let delta = (0.5 * (pl - pr) / denom).clamp(-0.5, 0.5);
            // refinement never leaves the searched band
            frequency_hz = (frequency_hz + delta * spec.bin_width_hz).clamp(lo, hi);
            power_db = pc - 0.25 * (pl - pr) * delta;
            interpolated = true;
        }
    }
    Ok(SpectrumPeak {
        frequency_hz,
        power_db,
        interpolated,
    })
}
