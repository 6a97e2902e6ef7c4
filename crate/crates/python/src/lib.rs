//! Python bindings for the photonic FMCW receiver simulation.
//!
//! Exposes the main link types and operations so scenarios can be
//! scripted from Python:
//!
//!     import phodar
//!     chirp = phodar.Chirp(f_start_hz=10.5e9, chirp_rate_hz_per_s=2e13,
//!                          period_s=1e-4, amplitude_v=0.318)
//!     scene = phodar.Scene(1.55, 24.56, 6e-9, 0.159)
//!     link = phodar.Link(chirp, scene)
//!     depth = link.cancellation_depth(phodar.Mismatch(amplitude_ratio=0.9292))

use std::f64::consts::PI;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use phodar_core as core;
use phodar_core::Error as CoreError;

fn to_py_err(e: CoreError) -> PyErr {
    match e {
        CoreError::Invalid(_)
        | CoreError::IndexOutOfRange(_)
        | CoreError::InvalidCutoff { .. }
        | CoreError::EmptyBand { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Sawtooth linear-FM drive parameters.
#[pyclass(name = "Chirp", from_py_object)]
#[derive(Clone)]
struct PyChirp {
    inner: core::ChirpParams,
}

#[pymethods]
impl PyChirp {
    #[new]
    #[pyo3(signature = (f_start_hz, chirp_rate_hz_per_s, period_s, amplitude_v, delay_s=0.0))]
    fn new(
        f_start_hz: f64,
        chirp_rate_hz_per_s: f64,
        period_s: f64,
        amplitude_v: f64,
        delay_s: f64,
    ) -> PyResult<Self> {
        let inner = core::ChirpParams {
            f_start_hz,
            chirp_rate_hz_per_s,
            period_s,
            amplitude_v,
            delay_s,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(PyChirp { inner })
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz()
    }

    #[getter]
    fn center_frequency_hz(&self) -> f64 {
        self.inner.center_frequency_hz()
    }

    /// Instantaneous phase at time t (rad).
    fn lfm_phase(&self, t: f64) -> f64 {
        self.inner.lfm_phase(t)
    }

    fn __repr__(&self) -> String {
        format!(
            "Chirp(f_start_hz={}, chirp_rate_hz_per_s={}, period_s={}, amplitude_v={}, delay_s={})",
            self.inner.f_start_hz,
            self.inner.chirp_rate_hz_per_s,
            self.inner.period_s,
            self.inner.amplitude_v,
            self.inner.delay_s
        )
    }
}

/// Leakage path plus point targets on the rotating turntable.
#[pyclass(name = "Scene", from_py_object)]
#[derive(Clone)]
struct PyScene {
    inner: core::Scene,
}

#[pymethods]
impl PyScene {
    #[new]
    #[pyo3(signature = (antenna_to_center_m, turntable_period_s, leakage_delay_s,
                        leakage_amplitude_v, system_delay_offset_s=0.0))]
    fn new(
        antenna_to_center_m: f64,
        turntable_period_s: f64,
        leakage_delay_s: f64,
        leakage_amplitude_v: f64,
        system_delay_offset_s: f64,
    ) -> PyResult<Self> {
        let inner = core::Scene {
            antenna_to_center_m,
            turntable_period_s,
            targets: vec![],
            leakage_delay_s,
            leakage_amplitude_v,
            system_delay_offset_s,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(PyScene { inner })
    }

    /// Add a point scatterer; reflectivity scales the leakage amplitude.
    fn add_target(
        &mut self,
        radius_m: f64,
        initial_angle_rad: f64,
        reflectivity: f64,
    ) -> PyResult<()> {
        self.inner.targets.push(core::PointTarget {
            radius_m,
            initial_angle_rad,
            reflectivity,
        });
        self.inner.validate().map_err(|e| {
            self.inner.targets.pop();
            to_py_err(e)
        })
    }

    /// Round-trip echo delay of one target at a slow time (s).
    fn echo_delay(&self, target_index: usize, slow_time_s: f64) -> PyResult<f64> {
        if target_index >= self.inner.targets.len() {
            return Err(PyValueError::new_err(format!(
                "target index {target_index} out of range"
            )));
        }
        Ok(self.inner.echo_delay(target_index, slow_time_s))
    }

    /// Antenna-to-target distance at a slow time (m).
    fn target_distance(&self, target_index: usize, slow_time_s: f64) -> PyResult<f64> {
        if target_index >= self.inner.targets.len() {
            return Err(PyValueError::new_err(format!(
                "target index {target_index} out of range"
            )));
        }
        Ok(self.inner.target_distance(target_index, slow_time_s))
    }

    #[getter]
    fn n_targets(&self) -> usize {
        self.inner.targets.len()
    }
}

/// Cancellation-reference mismatch knobs.
#[pyclass(name = "Mismatch", from_py_object)]
#[derive(Clone)]
struct PyMismatch {
    inner: core::MismatchConfig,
}

#[pymethods]
impl PyMismatch {
    #[new]
    #[pyo3(signature = (amplitude_ratio=1.0, delay_error_s=0.0, bias_error_rad=0.0, enabled=true))]
    fn new(
        amplitude_ratio: f64,
        delay_error_s: f64,
        bias_error_rad: f64,
        enabled: bool,
    ) -> PyResult<Self> {
        let inner = core::MismatchConfig {
            amplitude_ratio,
            delay_error_s,
            bias_error_rad,
            enabled,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(PyMismatch { inner })
    }

    /// Cancellation reference disconnected.
    #[staticmethod]
    fn disabled() -> Self {
        PyMismatch {
            inner: core::MismatchConfig::disabled(),
        }
    }
}

/// The complete link: reference chirp, scene, modulator, detector.
#[pyclass(name = "Link")]
struct PyLink {
    setup: core::LinkSetup,
}

#[pymethods]
impl PyLink {
    #[new]
    #[pyo3(signature = (chirp, scene, v_pi_v=5.0, bias_phase_rad=PI,
                        input_power_scale=1.0, responsivity_a_per_w=0.8))]
    fn new(
        chirp: PyChirp,
        scene: PyScene,
        v_pi_v: f64,
        bias_phase_rad: f64,
        input_power_scale: f64,
        responsivity_a_per_w: f64,
    ) -> PyResult<Self> {
        let setup = core::LinkSetup {
            chirp: chirp.inner,
            scene: scene.inner,
            modulator: core::ModulatorConfig {
                v_pi_v,
                bias_phase_rad,
                input_power_scale,
            },
            pd: core::PdConfig {
                responsivity_a_per_w,
            },
        };
        setup.validate().map_err(to_py_err)?;
        Ok(PyLink { setup })
    }

    /// De-chirped traces from the fast engine, one list per period.
    #[pyo3(signature = (mismatch, n_periods, sample_rate_hz=4e6,
                        slow_time_start_s=0.0, noise_std=0.0, seed=0))]
    fn synth_traces(
        &self,
        mismatch: PyMismatch,
        n_periods: usize,
        sample_rate_hz: f64,
        slow_time_start_s: f64,
        noise_std: f64,
        seed: u64,
    ) -> PyResult<Vec<Vec<f64>>> {
        let noise = core::NoiseSpec {
            enabled: noise_std > 0.0,
            std_dev: noise_std,
            seed,
        };
        let traces = core::synth_dechirped(
            &self.setup,
            &mismatch.inner,
            n_periods,
            sample_rate_hz,
            &noise,
            slow_time_start_s,
        )
        .map_err(to_py_err)?;
        Ok(traces.into_iter().map(|t| t.samples).collect())
    }

    /// De-chirped leakage cancellation depth (dB).
    #[pyo3(signature = (mismatch, sample_rate_hz=4e6, n_periods=1))]
    fn cancellation_depth(
        &self,
        mismatch: PyMismatch,
        sample_rate_hz: f64,
        n_periods: usize,
    ) -> PyResult<f64> {
        core::cancellation_depth(&self.setup, &mismatch.inner, sample_rate_hz, n_periods)
            .map(|r| r.depth_db)
            .map_err(to_py_err)
    }

    /// Coordinate-descent amplitude/delay matching. Returns
    /// (ratio, delay_s, depth_db, iterations, converged).
    #[pyo3(signature = (start, ratio_lo, ratio_hi, delay_lo_s, delay_hi_s, sample_rate_hz=4e6))]
    fn auto_match(
        &self,
        start: PyMismatch,
        ratio_lo: f64,
        ratio_hi: f64,
        delay_lo_s: f64,
        delay_hi_s: f64,
        sample_rate_hz: f64,
    ) -> PyResult<(f64, f64, f64, usize, bool)> {
        let bounds = core::MatchBounds {
            amplitude_ratio: (ratio_lo, ratio_hi),
            delay_error_s: (delay_lo_s, delay_hi_s),
        };
        match core::auto_match(&self.setup, &start.inner, &bounds, sample_rate_hz) {
            Ok(r) => Ok((r.amplitude_ratio, r.delay_error_s, r.depth_db, r.iterations, true)),
            Err(CoreError::NotConverged { best }) => Ok((
                best.amplitude_ratio,
                best.delay_error_s,
                best.depth_db,
                best.iterations,
                false,
            )),
            Err(e) => Err(to_py_err(e)),
        }
    }

    /// Range/cross-range image of an n-period aperture. Returns
    /// (magnitude_db_flat, n_range, n_cross, range_axis_m, cross_range_axis_m),
    /// magnitudes row-major over (range, cross-range).
    #[pyo3(signature = (mismatch, n_periods, sample_rate_hz=4e6, highpass_cutoff_hz=None))]
    fn form_image(
        &self,
        mismatch: PyMismatch,
        n_periods: usize,
        sample_rate_hz: f64,
        highpass_cutoff_hz: Option<f64>,
    ) -> PyResult<(Vec<f64>, usize, usize, Vec<f64>, Vec<f64>)> {
        let traces = core::synth_dechirped(
            &self.setup,
            &mismatch.inner,
            n_periods,
            sample_rate_hz,
            &core::NoiseSpec::off(),
            0.0,
        )
        .map_err(to_py_err)?;
        let cube = core::build_cube(&traces).map_err(to_py_err)?;
        let params = core::IsarParams {
            bandwidth_hz: self.setup.chirp.bandwidth_hz(),
            center_wavelength_m: core::C / self.setup.chirp.center_frequency_hz(),
            integration_time_s: n_periods as f64 * self.setup.chirp.period_s,
            rotation_rate_rad_per_s: 2.0 * PI / self.setup.scene.turntable_period_s,
        };
        let hp = highpass_cutoff_hz.map(core::FilterSpec::highpass);
        let img = core::form_image(&cube, hp.as_ref(), &self.setup.chirp, &params)
            .map_err(to_py_err)?;
        Ok((
            img.magnitude_db,
            img.n_range,
            img.n_cross,
            img.range_axis_m,
            img.cross_range_axis_m,
        ))
    }
}

/// Windowed power spectrum of a real trace. Returns (freq_hz, power_db).
#[pyfunction]
#[pyo3(signature = (samples, sample_rate_hz))]
fn trace_spectrum(samples: Vec<f64>, sample_rate_hz: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let trace = core::DechirpTrace {
        sample_rate_hz,
        slow_time_index: 0,
        guard_samples: 0,
        samples,
    };
    let spec = core::spectrum(&trace, core::Window::Hann).map_err(to_py_err)?;
    Ok((spec.freq_hz, spec.power_db))
}

/// Maximum-power peak in [lo_hz, hi_hz]; returns (frequency_hz, power_db).
#[pyfunction]
fn peak_in_band(
    freq_hz: Vec<f64>,
    power_db: Vec<f64>,
    lo_hz: f64,
    hi_hz: f64,
) -> PyResult<(f64, f64)> {
    if freq_hz.len() != power_db.len() || freq_hz.len() < 2 {
        return Err(PyValueError::new_err("axis and power lengths differ"));
    }
    let bin = freq_hz[1] - freq_hz[0];
    let spec = core::SpectrumEstimate {
        freq_hz,
        power_db,
        window_name: "hann".into(),
        bin_width_hz: bin,
    };
    let p = core::find_peak(&spec, (lo_hz, hi_hz)).map_err(to_py_err)?;
    Ok((p.frequency_hz, p.power_db))
}

/// De-chirped beat frequency k * tau (Hz).
#[pyfunction]
fn dechirp_frequency(tau_s: f64, chirp: PyChirp) -> f64 {
    core::dechirp_frequency(tau_s, &chirp.inner)
}

/// Range from a de-chirped frequency: R = c f / (2 k) (m).
#[pyfunction]
fn frequency_to_range(f_hz: f64, chirp: PyChirp) -> f64 {
    core::frequency_to_range(f_hz, &chirp.inner)
}

/// (range_resolution_m, cross_range_resolution_m) from bandwidth,
/// wavelength, integration time and rotation rate.
#[pyfunction]
fn resolutions(
    bandwidth_hz: f64,
    center_wavelength_m: f64,
    integration_time_s: f64,
    rotation_rate_rad_per_s: f64,
) -> (f64, f64) {
    let r = core::resolutions(&core::IsarParams {
        bandwidth_hz,
        center_wavelength_m,
        integration_time_s,
        rotation_rate_rad_per_s,
    });
    (r.range_resolution_m, r.cross_range_resolution_m)
}

/// Bessel J0 and J1, as used by the sideband model.
#[pyfunction]
fn bessel_j0(x: f64) -> f64 {
    core::math::bessel_j0(x)
}

#[pyfunction]
fn bessel_j1(x: f64) -> f64 {
    core::math::bessel_j1(x)
}

#[pymodule]
fn phodar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SPEED_OF_LIGHT", core::C)?;
    m.add_class::<PyChirp>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyMismatch>()?;
    m.add_class::<PyLink>()?;
    m.add_function(wrap_pyfunction!(trace_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(peak_in_band, m)?)?;
    m.add_function(wrap_pyfunction!(dechirp_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_to_range, m)?)?;
    m.add_function(wrap_pyfunction!(resolutions, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j1, m)?)?;
    Ok(())
}
