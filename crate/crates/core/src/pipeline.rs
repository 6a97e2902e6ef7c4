//! Engine selection: analytic synthesis or the full physical chain.
//!
//! The physical chain samples the four drives at tens of GSa/s, applies
//! the exact DD-MZM transfer function and square-law detection, then
//! low-pass filters and decimates down to the capture rate. One guard
//! period on each side of the requested capture absorbs the decimation
//! filters' edge transients before cropping, so trace samples line up
//! exactly with the fast engine's time grid.

use crate::cancellation::MismatchConfig;
use crate::chirp::SampledSignal;
use crate::dechirp::{apply_noise, blank_guard, synth_dechirped, DechirpTrace, LinkSetup, NoiseSpec};
use crate::error::Error;
use crate::filter::decimate_to;
use crate::photonic::{ddmzm_field_exact, photodetect, ModulatorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    /// Analytic beat-tone synthesis (small-signal Bessel expansion).
    Fast,
    /// Exact modulator field at the physical sample rate.
    Physical,
}

/// What to capture: output rate, length and slow-time placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureConfig {
    pub sample_rate_hz: f64,
    pub n_periods: usize,
    pub slow_time_start_s: f64,
}

/// Physical-engine settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    /// Optical/RF sampling rate; must cover twice the highest drive
    /// frequency and divide down to the capture rate.
    pub sample_rate_hz: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        PhysicalConfig {
            sample_rate_hz: 64e9,
        }
    }
}

/// Produce de-chirped traces with the selected engine.
pub fn run_engine(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    noise: &NoiseSpec,
    engine: EngineKind,
    capture: &CaptureConfig,
    physical: &PhysicalConfig,
) -> Result<Vec<DechirpTrace>, Error> {
    match engine {
        EngineKind::Fast => synth_dechirped(
            setup,
            mismatch,
            capture.n_periods,
            capture.sample_rate_hz,
            noise,
            capture.slow_time_start_s,
        ),
        EngineKind::Physical => physical_dechirp(setup, mismatch, noise, capture, physical),
    }
}

const CHUNK: usize = 1 << 20;

/// Exact-field pipeline: drives -> DD-MZM -> photodetector -> decimating
/// low-pass chain -> per-period traces.
pub fn physical_dechirp(
    setup: &LinkSetup,
    mismatch: &MismatchConfig,
    noise: &NoiseSpec,
    capture: &CaptureConfig,
    physical: &PhysicalConfig,
) -> Result<Vec<DechirpTrace>, Error> {
    setup.validate()?;
    mismatch.validate()?;
    noise.validate()?;
    if capture.n_periods == 0 {
        return Err(Error::invalid("n_periods must be >= 1"));
    }
    let fs = physical.sample_rate_hz;
    let chirp = &setup.chirp;
    let required = 2.0 * (chirp.f_start_hz + chirp.bandwidth_hz());
    if fs < required {
        return Err(Error::NyquistViolation {
            required_hz: required,
            actual_hz: fs,
        });
    }
    let fs_out = capture.sample_rate_hz;
    let ratio = fs / fs_out;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::MismatchedGrids(format!(
            "physical rate {fs} is not an integer multiple of the capture rate {fs_out}"
        )));
    }
    let m_phys = (fs * chirp.period_s).round() as usize;
    let m_out = (fs_out * chirp.period_s).round() as usize;
    if (m_phys as f64 - fs * chirp.period_s).abs() > 1e-6 || m_phys % (ratio.round() as usize) != 0
    {
        return Err(Error::MismatchedGrids(
            "chirp period is not an integer number of samples at both rates".into(),
        ));
    }

    // bias error is part of the modulator state in the exact model
    let modulator = ModulatorConfig {
        bias_phase_rad: setup.modulator.bias_phase_rad + mismatch.bias_error_rad,
        ..setup.modulator
    };
    let mismatch_unbiased = MismatchConfig {
        bias_error_rad: 0.0,
        ..*mismatch
    };

    // one guard period each side for filter settling
    let total_periods = capture.n_periods + 2;
    let mut photocurrent = Vec::with_capacity(total_periods * m_phys);
    for p in 0..total_periods {
        let period_idx = p as i64 - 1;
        let slow_mid =
            capture.slow_time_start_s + (period_idx as f64 + 0.5) * chirp.period_s;
        let parts = setup.components(&mismatch_unbiased, slow_mid);
        let t0 = period_idx as f64 * chirp.period_s;
        let mut offset = 0;
        while offset < m_phys {
            let len = CHUNK.min(m_phys - offset);
            let mut upper = vec![0.0; len];
            let mut lower = vec![0.0; len];
            for part in &parts {
                let phase_params = chirp.with_delay(part.delay_s);
                let dst = if part.upper_arm { &mut upper } else { &mut lower };
                for (i, v) in dst.iter_mut().enumerate() {
                    let t = t0 + (offset + i) as f64 / fs;
                    *v += part.amplitude_v * phase_params.lfm_phase(t).cos();
                }
            }
            let grid = |samples: Vec<f64>| SampledSignal {
                sample_rate_hz: fs,
                start_time_s: t0 + offset as f64 / fs,
                samples,
            };
            let env = ddmzm_field_exact(&grid(upper), &grid(lower), &modulator)?;
            let current = photodetect(&env, &setup.pd);
            photocurrent.extend_from_slice(&current.samples);
            offset += len;
        }
    }

    let raw = SampledSignal {
        sample_rate_hz: fs,
        start_time_s: -chirp.period_s,
        samples: photocurrent,
    };
    let passband = 0.4 * fs_out;
    let low = decimate_to(&raw, fs_out, passband, 70.0)?;

    // crop the guard periods and split into per-period traces
    let max_delay = setup.max_delay() + mismatch.delay_error_s.abs();
    let traces = (0..capture.n_periods)
        .map(|p| {
            let start = (p + 1) * m_out;
            let mut trace = DechirpTrace {
                sample_rate_hz: fs_out,
                slow_time_index: p,
                guard_samples: 0,
                samples: low.samples[start..start + m_out].to_vec(),
            };
            blank_guard(&mut trace, max_delay);
            apply_noise(&mut trace, noise);
            trace
        })
        .collect();
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirp::{ChirpParams, C};
    use crate::dechirp::{find_peak, spectrum, Window};
    use crate::photonic::PdConfig;
    use crate::scene::{PointTarget, Scene};
    use std::f64::consts::PI;

    /// Scaled-down link (tens of MHz) so the exact chain runs in
    /// milliseconds: leakage beat at 60 kHz, echo at 145 kHz,
    /// interference at 85 kHz.
    fn toy_setup() -> LinkSetup {
        let modulator = ModulatorConfig::default();
        let tau_e = 1.45e-6;
        LinkSetup {
            chirp: ChirpParams {
                f_start_hz: 50e6,
                chirp_rate_hz_per_s: 1e11,
                period_s: 1e-4,
                amplitude_v: 0.25 * modulator.v_pi_v / PI,
                delay_s: 0.0,
            },
            scene: Scene {
                antenna_to_center_m: C * tau_e / 2.0,
                turntable_period_s: 24.56,
                targets: vec![PointTarget {
                    radius_m: 0.0,
                    initial_angle_rad: 0.0,
                    reflectivity: 0.5,
                }],
                leakage_delay_s: 0.6e-6,
                leakage_amplitude_v: 0.2 * modulator.v_pi_v / PI,
                system_delay_offset_s: 0.0,
            },
            modulator,
            pd: PdConfig::default(),
        }
    }

    #[test]
    fn engines_agree_on_peaks() {
        let setup = toy_setup();
        let capture = CaptureConfig {
            sample_rate_hz: 4e6,
            n_periods: 1,
            slow_time_start_s: 0.0,
        };
        let physical = PhysicalConfig {
            sample_rate_hz: 256e6,
        };
        let mm = MismatchConfig::disabled();
        let fast = run_engine(&setup, &mm, &NoiseSpec::off(), EngineKind::Fast, &capture, &physical)
            .unwrap();
        let phys = run_engine(
            &setup,
            &mm,
            &NoiseSpec::off(),
            EngineKind::Physical,
            &capture,
            &physical,
        )
        .unwrap();
        assert_eq!(fast[0].samples.len(), phys[0].samples.len());
        let sf = spectrum(&fast[0], Window::Hann).unwrap();
        let sp = spectrum(&phys[0], Window::Hann).unwrap();
        for f in [60e3, 85e3, 145e3] {
            let band = (f - 20e3, f + 20e3);
            let pf = find_peak(&sf, band).unwrap();
            let pp = find_peak(&sp, band).unwrap();
            assert!(
                (pf.frequency_hz - pp.frequency_hz).abs() <= sf.bin_width_hz,
                "at {f}: fast {} vs physical {}",
                pf.frequency_hz,
                pp.frequency_hz
            );
            assert!(
                (pf.power_db - pp.power_db).abs() <= 1.0,
                "at {f}: fast {} dB vs physical {} dB",
                pf.power_db,
                pp.power_db
            );
        }
    }

    #[test]
    fn physical_engine_rejects_non_integer_rate_ratio() {
        let setup = toy_setup();
        let capture = CaptureConfig {
            sample_rate_hz: 3e6,
            n_periods: 1,
            slow_time_start_s: 0.0,
        };
        let physical = PhysicalConfig {
            sample_rate_hz: 256e6,
        };
        assert!(matches!(
            physical_dechirp(
                &setup,
                &MismatchConfig::disabled(),
                &NoiseSpec::off(),
                &capture,
                &physical
            ),
            Err(Error::MismatchedGrids(_))
        ));
    }

    #[test]
    fn physical_engine_nyquist_guard() {
        let setup = toy_setup();
        let capture = CaptureConfig {
            sample_rate_hz: 4e6,
            n_periods: 1,
            slow_time_start_s: 0.0,
        };
        let physical = PhysicalConfig {
            sample_rate_hz: 64e6,
        };
        assert!(matches!(
            physical_dechirp(
                &setup,
                &MismatchConfig::disabled(),
                &NoiseSpec::off(),
                &capture,
                &physical
            ),
            Err(Error::NyquistViolation { .. })
        ));
    }

    #[test]
    fn matched_cancellation_in_the_exact_field() {
        // the optical-domain subtraction happens in exp space, not in the
        // linearized model; still nulls the leakage tone to the floor
        let setup = toy_setup();
        let capture = CaptureConfig {
            sample_rate_hz: 4e6,
            n_periods: 1,
            slow_time_start_s: 0.0,
        };
        let physical = PhysicalConfig {
            sample_rate_hz: 256e6,
        };
        let spec_of = |mm: &MismatchConfig| {
            let tr = physical_dechirp(&setup, mm, &NoiseSpec::off(), &capture, &physical).unwrap();
            spectrum(&tr[0], Window::Hann).unwrap()
        };
        let off = spec_of(&MismatchConfig::disabled());
        let on = spec_of(&MismatchConfig::matched());
        let at_60k = |s: &crate::dechirp::SpectrumEstimate| {
            let i = s.freq_hz.iter().position(|&f| (f - 60e3).abs() < 1.0).unwrap();
            s.power_db[i]
        };
        let depth = at_60k(&off) - at_60k(&on);
        assert!(depth >= 50.0, "exact-field cancellation only {depth} dB");
    }
}
