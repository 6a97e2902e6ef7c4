//! Linear-phase FIR filtering and multistage decimation.
//!
//! Filters are windowed-sinc designs with a Kaiser window. They are
//! applied with the group delay compensated, so the output stays
//! time-aligned with the input.

use std::f64::consts::PI;

use crate::chirp::SampledSignal;
use crate::error::Error;
use crate::math::bessel_i0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

/// Specification of a linear-phase FIR filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Cutoff frequency (Hz); the design centers its transition band here.
    pub cutoff_hz: f64,
    pub kind: FilterKind,
    /// Explicit odd tap count. `None` derives the length from the
    /// attenuation target and a transition band of 15% of the cutoff,
    /// narrow enough that a tone 15% below a highpass cutoff already
    /// sits in the stopband.
    pub taps: Option<usize>,
    /// Stopband attenuation target (dB).
    pub stopband_db: f64,
}

impl FilterSpec {
    pub fn lowpass(cutoff_hz: f64) -> FilterSpec {
        FilterSpec {
            cutoff_hz,
            kind: FilterKind::Lowpass,
            taps: None,
            stopband_db: 60.0,
        }
    }

    pub fn highpass(cutoff_hz: f64) -> FilterSpec {
        FilterSpec {
            cutoff_hz,
            kind: FilterKind::Highpass,
            taps: None,
            stopband_db: 60.0,
        }
    }
}

fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser tap-count estimate for a given transition width.
fn kaiser_taps(atten_db: f64, transition_hz: f64, sample_rate_hz: f64) -> usize {
    let d_omega = 2.0 * PI * transition_hz / sample_rate_hz;
    let n = ((atten_db - 7.95) / (2.285 * d_omega)).ceil() as usize + 1;
    n | 1 // force odd so the group delay is an integer sample count
}

/// Windowed-sinc lowpass prototype, unity DC gain.
fn design_lowpass_taps(cutoff_hz: f64, sample_rate_hz: f64, n: usize, beta: f64) -> Vec<f64> {
    let m = (n - 1) as f64 / 2.0;
    let wc = 2.0 * PI * cutoff_hz / sample_rate_hz;
    let i0b = bessel_i0(beta);
    let mut h: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 - m;
            let sinc = if x == 0.0 { wc / PI } else { (wc * x).sin() / (PI * x) };
            let r = x / m;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b;
            sinc * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    for v in &mut h {
        *v /= sum;
    }
    h
}

/// Design the taps for a [`FilterSpec`] at the given sample rate.
pub fn design_fir(spec: &FilterSpec, sample_rate_hz: f64) -> Result<Vec<f64>, Error> {
    if !(spec.cutoff_hz > 0.0) || spec.cutoff_hz >= sample_rate_hz / 2.0 {
        return Err(Error::InvalidCutoff {
            cutoff_hz: spec.cutoff_hz,
            sample_rate_hz,
        });
    }
    // Design slightly past the target so the realized stopband meets it.
    let atten = spec.stopband_db + 5.0;
    let n = match spec.taps {
        Some(n) if n >= 3 => n | 1,
        Some(_) => return Err(Error::invalid("filter needs at least 3 taps")),
        None => {
            let transition = (0.15 * spec.cutoff_hz).min(sample_rate_hz / 2.0 - spec.cutoff_hz);
            kaiser_taps(atten, transition, sample_rate_hz)
        }
    };
    let beta = kaiser_beta(atten);
    let mut h = design_lowpass_taps(spec.cutoff_hz, sample_rate_hz, n, beta);
    if spec.kind == FilterKind::Highpass {
        // spectral inversion; exact null at DC since the lowpass sums to 1
        for v in &mut h {
            *v = -*v;
        }
        h[(n - 1) / 2] += 1.0;
    }
    Ok(h)
}

/// Amplitude response |H(f)| of a tap set.
pub fn tap_response_magnitude(taps: &[f64], f_hz: f64, sample_rate_hz: f64) -> f64 {
    let w = 2.0 * PI * f_hz / sample_rate_hz;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &h) in taps.iter().enumerate() {
        re += h * (w * k as f64).cos();
        im -= h * (w * k as f64).sin();
    }
    (re * re + im * im).sqrt()
}

/// Convolution with the center tap aligned on the current sample, edges
/// zero-padded; output has the input's length and time axis.
fn convolve_same(x: &[f64], h: &[f64]) -> Vec<f64> {
    let m = (h.len() - 1) / 2;
    let n = x.len();
    let mut y = vec![0.0; n];
    for (i, out) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &hk) in h.iter().enumerate() {
            let j = i as isize + m as isize - k as isize;
            if j >= 0 && (j as usize) < n {
                acc += hk * x[j as usize];
            }
        }
        *out = acc;
    }
    y
}

/// Filter a signal with a linear-phase FIR, group delay compensated.
pub fn apply_filter(sig: &SampledSignal, spec: &FilterSpec) -> Result<SampledSignal, Error> {
    let h = design_fir(spec, sig.sample_rate_hz)?;
    Ok(SampledSignal {
        sample_rate_hz: sig.sample_rate_hz,
        start_time_s: sig.start_time_s,
        samples: convolve_same(&sig.samples, &h),
    })
}

/// Single-stage decimation: anti-alias lowpass plus stride, computed only
/// at the retained output instants. Output sample `m` is time-aligned
/// with input sample `m * factor`.
pub fn decimate(sig: &SampledSignal, factor: usize, passband_hz: f64, atten_db: f64) -> Result<SampledSignal, Error> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(sig.clone());
    }
    let fs_out = sig.sample_rate_hz / factor as f64;
    if passband_hz >= fs_out / 2.0 {
        return Err(Error::InvalidCutoff {
            cutoff_hz: passband_hz,
            sample_rate_hz: fs_out,
        });
    }
    // Transition from the retained passband up to the next Nyquist edge.
    let transition = fs_out / 2.0 - passband_hz;
    let cutoff = passband_hz + transition / 2.0;
    let n = kaiser_taps(atten_db + 5.0, transition, sig.sample_rate_hz);
    let h = design_lowpass_taps(cutoff, sig.sample_rate_hz, n, kaiser_beta(atten_db + 5.0));
    let m = (n - 1) / 2;
    let x = &sig.samples;
    let len_out = x.len() / factor;
    let mut y = Vec::with_capacity(len_out);
    for out_idx in 0..len_out {
        let center = out_idx * factor;
        let mut acc = 0.0;
        for (k, &hk) in h.iter().enumerate() {
            let j = center as isize + m as isize - k as isize;
            if j >= 0 && (j as usize) < x.len() {
                acc += hk * x[j as usize];
            }
        }
        y.push(acc);
    }
    Ok(SampledSignal {
        sample_rate_hz: fs_out,
        start_time_s: sig.start_time_s,
        samples: y,
    })
}

/// Split an integer ratio into decimation stages no larger than 25.
fn plan_stages(mut ratio: usize) -> Result<Vec<usize>, Error> {
    let mut primes = Vec::new();
    let mut d = 2;
    while ratio > 1 {
        while ratio % d == 0 {
            primes.push(d);
            ratio /= d;
        }
        d += 1;
        if d * d > ratio && ratio > 1 {
            primes.push(ratio);
            break;
        }
    }
    if primes.iter().any(|&p| p > 25) {
        return Err(Error::invalid(format!(
            "decimation ratio has a prime factor {} > 25",
            primes.last().unwrap()
        )));
    }
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut stages = Vec::new();
    let mut cur = 1;
    for p in primes {
        if cur * p > 25 {
            stages.push(cur);
            cur = p;
        } else {
            cur *= p;
        }
    }
    if cur > 1 {
        stages.push(cur);
    }
    Ok(stages)
}

/// Multistage decimation from the signal's rate down to `fs_out_hz`,
/// preserving content below `passband_hz` and attenuating everything
/// that would alias onto it by at least `atten_db`.
pub fn decimate_to(
    sig: &SampledSignal,
    fs_out_hz: f64,
    passband_hz: f64,
    atten_db: f64,
) -> Result<SampledSignal, Error> {
    let ratio = sig.sample_rate_hz / fs_out_hz;
    let ratio_int = ratio.round() as usize;
    if (ratio - ratio_int as f64).abs() > 1e-9 * ratio || ratio_int == 0 {
        return Err(Error::MismatchedGrids(format!(
            "sample-rate ratio {ratio} is not an integer"
        )));
    }
    let mut out = sig.clone();
    for factor in plan_stages(ratio_int)? {
        out = decimate(&out, factor, passband_hz, atten_db)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, fs: f64, n: usize) -> SampledSignal {
        SampledSignal {
            sample_rate_hz: fs,
            start_time_s: 0.0,
            samples: (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).cos()).collect(),
        }
    }

    /// RMS over the interior, away from edge transients.
    fn interior_rms(s: &SampledSignal, margin: usize) -> f64 {
        let inner = &s.samples[margin..s.samples.len() - margin];
        (inner.iter().map(|v| v * v).sum::<f64>() / inner.len() as f64).sqrt()
    }

    #[test]
    fn dc_passes_lowpass_unchanged() {
        let sig = SampledSignal {
            sample_rate_hz: 4e6,
            start_time_s: 0.0,
            samples: vec![1.0; 4096],
        };
        let out = apply_filter(&sig, &FilterSpec::lowpass(140e3)).unwrap();
        let gain_db = 20.0 * interior_rms(&out, 600).log10();
        assert!(gain_db.abs() < 0.5, "DC gain {gain_db} dB");
    }

    #[test]
    fn highpass_rejects_below_and_passes_above_cutoff() {
        let spec = FilterSpec::highpass(140e3);
        let below = apply_filter(&tone(120e3, 4e6, 8192), &spec).unwrap();
        let above = apply_filter(&tone(300e3, 4e6, 8192), &spec).unwrap();
        let below_db = 20.0 * (interior_rms(&below, 1024) / (0.5f64).sqrt()).log10();
        let above_db = 20.0 * (interior_rms(&above, 1024) / (0.5f64).sqrt()).log10();
        assert!(below_db <= -3.0, "120 kHz only attenuated {below_db} dB");
        assert!(above_db.abs() < 0.5, "300 kHz gain {above_db} dB");
    }

    #[test]
    fn lowpass_stopband_attenuation() {
        let spec = FilterSpec::lowpass(140e3);
        let out = apply_filter(&tone(280e3, 4e6, 16384), &spec).unwrap();
        let db = 20.0 * (interior_rms(&out, 2048) / (0.5f64).sqrt()).log10();
        assert!(db <= -60.0, "tone at 2x cutoff attenuated only {db} dB");
    }

    #[test]
    fn group_delay_is_compensated() {
        // A passband tone keeps its phase: compare against the input.
        let sig = tone(50e3, 4e6, 8192);
        let out = apply_filter(&sig, &FilterSpec::lowpass(140e3)).unwrap();
        for i in 2048..6144 {
            assert!(
                (out.samples[i] - sig.samples[i]).abs() < 0.02,
                "sample {i}: {} vs {}",
                out.samples[i],
                sig.samples[i]
            );
        }
    }

    #[test]
    fn invalid_cutoff_rejected() {
        let sig = tone(1e3, 1e6, 64);
        assert!(matches!(
            apply_filter(&sig, &FilterSpec::lowpass(600e3)),
            Err(Error::InvalidCutoff { .. })
        ));
    }

    #[test]
    fn decimation_preserves_passband_tone() {
        let fs = 64e6;
        let sig = tone(100e3, fs, (fs * 1e-3) as usize);
        let out = decimate_to(&sig, 4e6, 1.6e6, 60.0).unwrap();
        assert_eq!(out.sample_rate_hz, 4e6);
        assert_eq!(out.len(), 4000);
        let rms_db = 20.0 * (interior_rms(&out, 400) / (0.5f64).sqrt()).log10();
        assert!(rms_db.abs() < 0.2, "passband tone level {rms_db} dB");
    }

    #[test]
    fn decimation_rejects_out_of_band_tone() {
        let fs = 64e6;
        // 9 MHz aliases to 1 MHz at 4 MSa/s if unfiltered
        let sig = tone(9e6, fs, (fs * 1e-3) as usize);
        let out = decimate_to(&sig, 4e6, 1.6e6, 60.0).unwrap();
        let rms_db = 20.0 * (interior_rms(&out, 400) / (0.5f64).sqrt()).log10();
        assert!(rms_db <= -60.0, "alias level {rms_db} dB");
    }

    #[test]
    fn stage_plan_covers_large_ratios() {
        assert_eq!(plan_stages(16000).unwrap().iter().product::<usize>(), 16000);
        assert_eq!(plan_stages(16).unwrap(), vec![16]);
        assert!(plan_stages(29).is_err()); // prime too large
    }
}
