//! Linear-FM drive signal generation.
//!
//! All four RF signals in the link — de-chirp reference, cancellation
//! reference, leakage and echo — are copies of one sawtooth LFM chirp
//! with individual amplitudes and delays. Writing `x = (t mod T) - tau`,
//! each copy has instantaneous phase
//!
//! ```text
//! theta(t) = w_s * x + pi * k * x^2
//! ```
//!
//! so the sweep restarts with a full phase reset every period. The phase
//! difference between two copies is affine in fast time with slope
//! `2 pi k (tau2 - tau1)`, which is what de-chirping exploits.

use std::f64::consts::PI;

use crate::error::Error;

/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;

/// Parameters of a sawtooth linearly frequency-modulated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    /// Sweep start frequency (Hz).
    pub f_start_hz: f64,
    /// Chirp rate k (Hz/s); swept bandwidth is `k * period`.
    pub chirp_rate_hz_per_s: f64,
    /// Sweep period (s).
    pub period_s: f64,
    /// Drive amplitude (V).
    pub amplitude_v: f64,
    /// Signal delay (s).
    pub delay_s: f64,
}

impl ChirpParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.period_s > 0.0) {
            return Err(Error::invalid("chirp period must be > 0"));
        }
        if !(self.chirp_rate_hz_per_s > 0.0) {
            return Err(Error::invalid("chirp rate must be > 0"));
        }
        if self.amplitude_v < 0.0 || self.delay_s < 0.0 || self.f_start_hz < 0.0 {
            return Err(Error::invalid(
                "chirp amplitude, delay and start frequency must be >= 0",
            ));
        }
        Ok(())
    }

    /// Swept bandwidth `k * period` (Hz).
    pub fn bandwidth_hz(&self) -> f64 {
        self.chirp_rate_hz_per_s * self.period_s
    }

    /// Sweep center frequency (Hz).
    pub fn center_frequency_hz(&self) -> f64 {
        self.f_start_hz + 0.5 * self.bandwidth_hz()
    }

    /// A copy of these parameters with a different delay.
    pub fn with_delay(&self, delay_s: f64) -> ChirpParams {
        ChirpParams { delay_s, ..*self }
    }

    /// Instantaneous phase at time `t` (rad), sawtooth fast time taken
    /// modulo the period before the delay subtraction.
    pub fn lfm_phase(&self, t: f64) -> f64 {
        let x = t.rem_euclid(self.period_s) - self.delay_s;
        2.0 * PI * self.f_start_hz * x + PI * self.chirp_rate_hz_per_s * x * x
    }

    /// Sample `amplitude * cos(theta(t))` over `duration` starting at
    /// `start_time`. The sample rate must satisfy the real-passband
    /// Nyquist bound `fs >= 2 (f_start + k * period)`.
    pub fn lfm_waveform_from(
        &self,
        sample_rate_hz: f64,
        start_time_s: f64,
        duration_s: f64,
    ) -> Result<SampledSignal, Error> {
        self.validate()?;
        let required = 2.0 * (self.f_start_hz + self.bandwidth_hz());
        if sample_rate_hz < required {
            return Err(Error::NyquistViolation {
                required_hz: required,
                actual_hz: sample_rate_hz,
            });
        }
        let n = (duration_s * sample_rate_hz).round() as usize;
        let samples = (0..n)
            .map(|i| {
                let t = start_time_s + i as f64 / sample_rate_hz;
                self.amplitude_v * self.lfm_phase(t).cos()
            })
            .collect();
        Ok(SampledSignal {
            sample_rate_hz,
            start_time_s,
            samples,
        })
    }

    /// [`lfm_waveform_from`](Self::lfm_waveform_from) starting at t = 0.
    pub fn lfm_waveform(&self, sample_rate_hz: f64, duration_s: f64) -> Result<SampledSignal, Error> {
        self.lfm_waveform_from(sample_rate_hz, 0.0, duration_s)
    }
}

/// A uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time_s + i as f64 / self.sample_rate_hz
    }
}
