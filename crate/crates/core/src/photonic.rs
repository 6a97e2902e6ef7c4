//! Optical-field model of the dual-drive Mach-Zehnder link.
//!
//! The optical carrier is factored out: signals are complex baseband
//! envelopes relative to the laser frequency, which keeps the required
//! sample rate near twice the highest RF frequency instead of hundreds
//! of THz. Square-law detection |E|^2 is carrier-phase independent, so
//! nothing is lost by the convention.
//!
//! With upper-arm drive u(t), lower-arm drive l(t), half-wave voltage
//! V_pi and bias phase phi_b, the exact output envelope is
//!
//! ```text
//! E(t) = (s / sqrt 2) * [ exp(j pi u/V_pi) + exp(j (pi l/V_pi + phi_b)) ]
//! ```
//!
//! At the minimum transmission point (phi_b = pi) the carrier terms of
//! the two arms cancel and the lower arm's modulation enters with a
//! sign flip — the mechanism that lets a matched reference subtract the
//! leakage in the optical domain.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::chirp::SampledSignal;
use crate::dechirp::SpectrumEstimate;
use crate::error::Error;
use crate::math::{bessel_j0, bessel_j1};

/// DD-MZM electrical and bias parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorConfig {
    /// Half-wave voltage (V).
    pub v_pi_v: f64,
    /// Bias phase between the arms (rad); pi is the minimum transmission
    /// point.
    pub bias_phase_rad: f64,
    /// Field amplitude of the carrier envelope entering the modulator.
    pub input_power_scale: f64,
}

impl Default for ModulatorConfig {
    fn default() -> Self {
        ModulatorConfig {
            v_pi_v: 5.0,
            bias_phase_rad: PI,
            input_power_scale: 1.0,
        }
    }
}

impl ModulatorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.v_pi_v > 0.0) {
            return Err(Error::invalid("half-wave voltage must be > 0"));
        }
        Ok(())
    }

    /// Modulation index m = pi * A / V_pi for a drive amplitude A.
    pub fn modulation_index(&self, amplitude_v: f64) -> f64 {
        PI * amplitude_v / self.v_pi_v
    }
}

/// Photodetector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdConfig {
    /// Responsivity (A/W).
    pub responsivity_a_per_w: f64,
}

impl Default for PdConfig {
    fn default() -> Self {
        PdConfig {
            responsivity_a_per_w: 0.8,
        }
    }
}

/// Complex baseband envelope of the modulator output field.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalEnvelope {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub samples: Vec<Complex64>,
}

/// Exact DD-MZM transfer function at arbitrary bias; no small-signal
/// approximation.
pub fn ddmzm_field_exact(
    upper_drive: &SampledSignal,
    lower_drive: &SampledSignal,
    cfg: &ModulatorConfig,
) -> Result<OpticalEnvelope, Error> {
    cfg.validate()?;
    if upper_drive.sample_rate_hz != lower_drive.sample_rate_hz
        || upper_drive.len() != lower_drive.len()
    {
        return Err(Error::MismatchedGrids(format!(
            "upper {} samples at {} Sa/s vs lower {} samples at {} Sa/s",
            upper_drive.len(),
            upper_drive.sample_rate_hz,
            lower_drive.len(),
            lower_drive.sample_rate_hz
        )));
    }
    let scale = cfg.input_power_scale * FRAC_1_SQRT_2;
    let samples = upper_drive
        .samples
        .iter()
        .zip(&lower_drive.samples)
        .map(|(&u, &l)| {
            let phi_u = PI * u / cfg.v_pi_v;
            let phi_l = PI * l / cfg.v_pi_v + cfg.bias_phase_rad;
            scale * (Complex64::from_polar(1.0, phi_u) + Complex64::from_polar(1.0, phi_l))
        })
        .collect();
    Ok(OpticalEnvelope {
        sample_rate_hz: upper_drive.sample_rate_hz,
        start_time_s: upper_drive.start_time_s,
        samples,
    })
}

/// Square-law detection: i = R * |E|^2.
pub fn photodetect(env: &OpticalEnvelope, pd: &PdConfig) -> SampledSignal {
    SampledSignal {
        sample_rate_hz: env.sample_rate_hz,
        start_time_s: env.start_time_s,
        samples: env
            .samples
            .iter()
            .map(|e| pd.responsivity_a_per_w * e.norm_sqr())
            .collect(),
    }
}

/// First-order sideband coefficients of the small-signal expansion at
/// the minimum transmission point.
///
/// `dechirp_ref`/`cancel_ref`/`leakage`/`echo` are the coefficients of
/// cos(theta_i) in the output envelope, in the same normalization as
/// [`ddmzm_field_exact`] with unit input scale. The linearized sideband
/// terms drop the cross J0 factors of the co-driving tone, so a matched
/// pair (equal indices, equal delays) cancels identically; the carrier
/// keeps its full J0 products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSidebands {
    pub carrier: Complex64,
    pub dechirp_ref: Complex64,
    pub cancel_ref: Complex64,
    pub leakage: Complex64,
    pub echo: Complex64,
}

impl BesselSidebands {
    /// Net leakage-band sideband after optical-domain subtraction.
    pub fn leakage_residual(&self) -> Complex64 {
        self.cancel_ref + self.leakage
    }
}

/// Small-signal sideband coefficients for the four drives (Jacobi-Anger
/// expansion truncated at first order). Indices above 0.5 are rejected;
/// above ~0.3 the truncation error already passes 1%.
pub fn bessel_sidebands(
    m_dechirp: f64,
    m_cancel: f64,
    m_leak: f64,
    m_echo: f64,
) -> Result<BesselSidebands, Error> {
    for &m in &[m_dechirp, m_cancel, m_leak, m_echo] {
        if !(0.0..=0.5).contains(&m) {
            return Err(Error::IndexOutOfRange(m));
        }
    }
    let j = Complex64::new(0.0, 1.0);
    let sqrt2 = std::f64::consts::SQRT_2;
    // upper arm: +, lower arm at MITP: e^{j pi} = -1
    let upper = |m: f64| j * sqrt2 * bessel_j1(m);
    let lower = |m: f64| -j * sqrt2 * bessel_j1(m);
    let carrier = Complex64::new(
        FRAC_1_SQRT_2 * (bessel_j0(m_dechirp) * bessel_j0(m_cancel)
            - bessel_j0(m_leak) * bessel_j0(m_echo)),
        0.0,
    );
    Ok(BesselSidebands {
        carrier,
        dechirp_ref: upper(m_dechirp),
        cancel_ref: upper(m_cancel),
        leakage: lower(m_leak),
        echo: lower(m_echo),
    })
}

/// Windowed periodogram of the envelope, frequency axis offset from the
/// carrier (two-sided, strictly increasing).
pub fn optical_spectrum(env: &OpticalEnvelope) -> Result<SpectrumEstimate, Error> {
    let n = env.samples.len();
    if n < 2 {
        return Err(Error::invalid("optical spectrum needs at least 2 samples"));
    }
    let mut window_sum = 0.0;
    let mut buf: Vec<Complex64> = env
        .samples
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let w = 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos());
            window_sum += w;
            s * w
        })
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let norm = 1.0 / (window_sum * window_sum);
    let bin = env.sample_rate_hz / n as f64;
    let half = n / 2;
    // fftshift so the axis runs from -fs/2 to +fs/2
    let mut freq_hz = Vec::with_capacity(n);
    let mut power_db = Vec::with_capacity(n);
    for i in 0..n {
        let src = (i + n - half) % n;
        let f = (i as f64 - half as f64) * bin;
        let p = (buf[src].norm_sqr() * norm).max(1e-30);
        freq_hz.push(f);
        power_db.push(10.0 * p.log10());
    }
    Ok(SpectrumEstimate {
        freq_hz,
        power_db,
        window_name: "hann".to_string(),
        bin_width_hz: bin,
    })
}
