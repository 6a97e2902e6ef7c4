//! Mismatch-limited leakage cancellation: residual model, depth metric,
//! sensitivity sweeps and automatic amplitude/delay matching.
//!
//! Depth is defined on the de-chirped leakage peak in the electrical
//! domain: the ratio of the peak power with the cancellation reference
//! disconnected to the power with it applied. The optical-domain view
//! lives in [`crate::photonic::optical_spectrum`] and is reported
//! separately since the two depths differ.
//!
//! In the small-signal regime the residual of an amplitude-only
//! mismatch is |1 - ratio| and of a delay-only mismatch about
//! |2 pi f_center dtau|, so the depth oracles are
//! `-20 log10 |1 - ratio|` and `-20 log10 (2 pi f_c dtau)`. A bias
//! error alone leaves the matched de-chirped residual null intact: the
//! exact photocurrent is `R s^2 (1 - cos(delta - eps))` with `delta`
//! the combined phase modulation, and the low-frequency part of
//! `cos(delta - eps)` is `cos(eps) [cos(delta)]_LF`, a uniform
//! rescaling of every beat tone. The bias knob therefore mainly moves
//! the DC level and the optical carrier, not the electrical depth.

use rayon::prelude::*;

use crate::dechirp::{
    find_peak, spectrum, synth_dechirped, LinkSetup, NoiseSpec, SpectrumEstimate, Window,
};
use crate::error::Error;

/// Deviation of the cancellation reference from the leakage path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchConfig {
    /// Amplitude ratio A_R / A_L; 1 = matched.
    pub amplitude_ratio: f64,
    /// Delay error tau_R - tau_L (s).
    pub delay_error_s: f64,
    /// Bias deviation from the minimum transmission point (rad).
    pub bias_error_rad: f64,
    /// Whether the cancellation reference is connected at all.
    pub enabled: bool,
}

impl MismatchConfig {
    /// Reference connected and perfectly matched.
    pub fn matched() -> MismatchConfig {
        MismatchConfig {
            amplitude_ratio: 1.0,
            delay_error_s: 0.0,
            bias_error_rad: 0.0,
            enabled: true,
        }
    }

    /// Reference disconnected (no cancellation).
    pub fn disabled() -> MismatchConfig {
        MismatchConfig {
            enabled: false,
            ..MismatchConfig::matched()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.amplitude_ratio < 0.0 {
            return Err(Error::invalid("amplitude ratio must be >= 0"));
        }
        Ok(())
    }
}

/// Outcome of a cancellation-depth measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthReport {
    /// leakage_peak_off_db - leakage_peak_on_db.
    pub depth_db: f64,
    pub leakage_peak_on_db: f64,
    pub leakage_peak_off_db: f64,
    /// Spectrum with cancellation applied (the residual).
    pub residual_spectrum: SpectrumEstimate,
}

fn leakage_band(setup: &LinkSetup, bin_width_hz: f64) -> (f64, f64) {
    let f_leak = setup.chirp.chirp_rate_hz_per_s * setup.scene.leakage_delay_s;
    (f_leak - 2.0 * bin_width_hz, f_leak + 2.0 * bin_width_hz)
}

/// Average linear power across per-period spectra, returned in dB.
fn mean_peak_power_db(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    sample_rate_hz: f64,
    n_periods: usize,
) -> Result<(f64, SpectrumEstimate), Error> {
    let traces = synth_dechirped(setup, mismatch, n_periods, sample_rate_hz, &NoiseSpec::off(), 0.0)?;
    let mut peak_lin = 0.0;
    let mut last = None;
    for t in &traces {
        let spec = spectrum(t, Window::Hann)?;
        let band = leakage_band(setup, spec.bin_width_hz);
        let peak = find_peak(&spec, band)?;
        peak_lin += 10f64.powf(peak.power_db / 10.0);
        last = Some(spec);
    }
    peak_lin /= traces.len() as f64;
    Ok((10.0 * peak_lin.max(1e-30).log10(), last.expect("n_periods >= 1")))
}

/// Measure the de-chirped leakage cancellation depth by running the
/// synthesis with the reference applied and disconnected; noise is
/// disabled for the measurement.
pub fn cancellation_depth(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    sample_rate_hz: f64,
    n_periods: usize,
) -> Result<DepthReport, Error> {
    if !(setup.scene.leakage_amplitude_v > 0.0) || !(setup.scene.leakage_delay_s > 0.0) {
        return Err(Error::invalid(
            "cancellation depth needs a leakage path (amplitude and delay > 0)",
        ));
    }
    let f_leak = setup.chirp.chirp_rate_hz_per_s * setup.scene.leakage_delay_s;
    let bin = sample_rate_hz / (sample_rate_hz * setup.chirp.period_s).round();
    if f_leak < 3.0 * bin {
        return Err(Error::invalid(
            "leakage tone too close to DC for a depth measurement",
        ));
    }
    let on = MismatchConfig {
        enabled: true,
        ..*mismatch
    };
    let off = MismatchConfig {
        enabled: false,
        ..*mismatch
    };
    let (peak_on, residual_spectrum) = mean_peak_power_db(setup, &on, sample_rate_hz, n_periods)?;
    let (peak_off, _) = mean_peak_power_db(setup, &off, sample_rate_hz, n_periods)?;
    Ok(DepthReport {
        depth_db: peak_off - peak_on,
        leakage_peak_on_db: peak_on,
        leakage_peak_off_db: peak_off,
        residual_spectrum,
    })
}

/// Mismatch axis selected for a sensitivity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Amplitude,
    Delay,
    Bias,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Amplitude => "amplitude",
            SweepAxis::Delay => "delay",
            SweepAxis::Bias => "bias",
        }
    }

    fn apply(&self, base: &MismatchConfig, value: f64) -> MismatchConfig {
        let mut m = *base;
        m.enabled = true;
        match self {
            SweepAxis::Amplitude => m.amplitude_ratio = value,
            SweepAxis::Delay => m.delay_error_s = value,
            SweepAxis::Bias => m.bias_error_rad = value,
        }
        m
    }
}

/// Depth at each grid point of a single mismatch axis.
pub fn depth_sweep(
    setup: &LinkSetup,
    base: &MismatchConfig,
    axis: SweepAxis,
    grid: &[f64],
    sample_rate_hz: f64,
    n_periods: usize,
) -> Result<Vec<(f64, f64)>, Error> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sweep grid must be nonempty and finite"));
    }
    grid.par_iter()
        .map(|&value| {
            let m = axis.apply(base, value);
            let report = cancellation_depth(setup, &m, sample_rate_hz, n_periods)?;
            Ok((value, report.depth_db))
        })
        .collect()
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`; stops when the bracket shrinks below
/// `tol_x` or after `max_evals` objective evaluations.
fn golden_section_minimize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol_x: f64,
    max_evals: usize,
) -> (f64, f64) {
    const RESP: f64 = 0.381_966_011_250_105_2; // 2 - golden ratio
    let mut x1 = a + RESP * (b - a);
    let mut x2 = b - RESP * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while evals < max_evals && (b - a).abs() > tol_x {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + RESP * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - RESP * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Search bounds for [`auto_match`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchBounds {
    pub amplitude_ratio: (f64, f64),
    pub delay_error_s: (f64, f64),
}

/// Result of an automatic matching run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub amplitude_ratio: f64,
    pub delay_error_s: f64,
    pub depth_db: f64,
    pub iterations: usize,
}

const RATIO_TOL: f64 = 1e-4;
const DELAY_TOL_S: f64 = 0.1e-12;
const MAX_SWEEPS: usize = 50;

/// Derivative-free coordinate descent (golden-section line searches on
/// amplitude ratio and delay error) minimizing the residual de-chirped
/// leakage peak — the software analog of tuning an attenuator and a
/// delay line. Converges when both parameter updates fall below
/// (1e-4, 0.1 ps); an optimum pinned on a search bound reports
/// [`Error::NotConverged`] with the best point found.
pub fn auto_match(
    setup: &LinkSetup,
    start: &MismatchConfig,
    bounds: &MatchBounds,
    sample_rate_hz: f64,
) -> Result<MatchResult, Error> {
    let (r_lo, r_hi) = bounds.amplitude_ratio;
    let (d_lo, d_hi) = bounds.delay_error_s;
    if !(r_lo < r_hi) || !(d_lo < d_hi) {
        return Err(Error::invalid("match bounds must be nonempty intervals"));
    }
    let objective = |ratio: f64, delay: f64| -> f64 {
        let m = MismatchConfig {
            amplitude_ratio: ratio,
            delay_error_s: delay,
            bias_error_rad: start.bias_error_rad,
            enabled: true,
        };
        // residual leakage peak power; lower is better
        match mean_peak_power_db(setup, &m, sample_rate_hz, 1) {
            Ok((p, _)) => p,
            Err(_) => f64::INFINITY,
        }
    };

    let mut ratio = start.amplitude_ratio.clamp(r_lo, r_hi);
    let mut delay = start.delay_error_s.clamp(d_lo, d_hi);
    let mut iterations = 0;
    for _ in 0..MAX_SWEEPS {
        iterations += 1;
        let (r_new, _) = golden_section_minimize(|r| objective(r, delay), r_lo, r_hi, RATIO_TOL, 64);
        let (d_new, _) =
            golden_section_minimize(|d| objective(r_new, d), d_lo, d_hi, DELAY_TOL_S, 64);
        let converged = (r_new - ratio).abs() < RATIO_TOL && (d_new - delay).abs() < DELAY_TOL_S;
        ratio = r_new;
        delay = d_new;
        if converged {
            break;
        }
    }

    let depth = |r: f64, d: f64| -> Result<f64, Error> {
        let m = MismatchConfig {
            amplitude_ratio: r,
            delay_error_s: d,
            bias_error_rad: start.bias_error_rad,
            enabled: true,
        };
        Ok(cancellation_depth(setup, &m, sample_rate_hz, 1)?.depth_db)
    };
    let mut best = MatchResult {
        amplitude_ratio: ratio,
        delay_error_s: delay,
        depth_db: depth(ratio, delay)?,
        iterations,
    };
    // never report worse than the starting point
    if start.enabled {
        let start_depth = depth(
            start.amplitude_ratio.clamp(r_lo, r_hi),
            start.delay_error_s.clamp(d_lo, d_hi),
        )?;
        if start_depth > best.depth_db {
            best = MatchResult {
                amplitude_ratio: start.amplitude_ratio.clamp(r_lo, r_hi),
                delay_error_s: start.delay_error_s.clamp(d_lo, d_hi),
                depth_db: start_depth,
                iterations,
            };
        }
    }

    let r_edge = 4.0 * RATIO_TOL.max((r_hi - r_lo) * 1e-3);
    let d_edge = 4.0 * DELAY_TOL_S.max((d_hi - d_lo) * 1e-3);
    let on_edge = (best.amplitude_ratio - r_lo).abs() < r_edge
        || (r_hi - best.amplitude_ratio).abs() < r_edge
        || (best.delay_error_s - d_lo).abs() < d_edge
        || (d_hi - best.delay_error_s).abs() < d_edge;
    if on_edge {
        return Err(Error::NotConverged { best });
    }
    Ok(best)
}
