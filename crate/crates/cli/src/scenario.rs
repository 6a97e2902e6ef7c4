//! Scenario execution: one validated config in, CSV/PGM files and a
//! manifest out.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use phodar_core::{
    auto_match, build_cube, cancellation_depth, concat_traces, depth_sweep, extract_peaks,
    find_peak, form_image, frequency_to_range, run_engine, spectrum, CaptureConfig, EngineKind,
    Error as CoreError, IsarParams, MismatchConfig, NoiseSpec, SpectrumEstimate, SweepAxis, Window,
    C,
};

use crate::config::{EngineSelection, ExperimentConfig, ScenarioKind, Validated};
use crate::error::CliError;
use crate::output::{image_axes_csv, image_pgm, spectrum_csv, table_csv, OutputSink, RunManifest};

fn engine_suffix(selection: EngineSelection, engine: EngineKind) -> &'static str {
    match (selection, engine) {
        (EngineSelection::Both, EngineKind::Fast) => "_fast",
        (EngineSelection::Both, EngineKind::Physical) => "_physical",
        _ => "",
    }
}

/// Local maxima of a spectrum above `floor_rel_db` of its band maximum.
fn spectral_peaks(spec: &SpectrumEstimate, band: (f64, f64), floor_rel_db: f64) -> Vec<Vec<f64>> {
    let idx: Vec<usize> = spec
        .freq_hz
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= band.0 && f <= band.1)
        .map(|(i, _)| i)
        .collect();
    let Some(&max_db) = idx
        .iter()
        .map(|&i| &spec.power_db[i])
        .max_by(|a, b| a.total_cmp(b))
    else {
        return vec![];
    };
    idx.iter()
        .filter(|&&i| {
            let p = spec.power_db[i];
            p >= max_db + floor_rel_db
                && (i == 0 || spec.power_db[i - 1] < p)
                && (i + 1 == spec.power_db.len() || spec.power_db[i + 1] <= p)
        })
        .map(|&i| vec![spec.freq_hz[i], spec.power_db[i]])
        .collect()
}

/// Execute the pipeline selected by `scenario.kind` and write every
/// output plus `manifest.toml` into `out_dir`.
pub fn run_scenario(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let v = cfg.validate()?;
    let mut sink = OutputSink::new(out_dir)?;
    sink.write("config.toml", cfg.to_toml().as_bytes())?;

    match cfg.scenario.kind {
        ScenarioKind::Spectrum => spectrum_outputs(cfg, &v, &mut sink)?,
        ScenarioKind::Depth => depth_outputs(cfg, &v, &mut sink)?,
        ScenarioKind::Image => image_outputs(cfg, &v, &mut sink)?,
        ScenarioKind::Ranging => ranging_outputs(cfg, &v, &mut sink)?,
    }

    let manifest = sink.into_manifest(
        cfg,
        cfg.scenario.engine.name(),
        started.elapsed().as_secs_f64() * 1e3,
    );
    manifest.save(out_dir)?;
    Ok(manifest)
}

fn capture_spectrum(
    v: &Validated,
    mismatch: &MismatchConfig,
    engine: EngineKind,
    capture: &CaptureConfig,
) -> Result<SpectrumEstimate, CoreError> {
    let traces = run_engine(&v.setup, mismatch, &v.noise, engine, capture, &v.physical)?;
    let joined = concat_traces(&traces)?;
    spectrum(&joined, Window::Hann)
}

fn spectrum_outputs(
    cfg: &ExperimentConfig,
    v: &Validated,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    let band = (20e3, v.capture.sample_rate_hz / 2.0);
    for engine in cfg.scenario.engine.engines() {
        let sfx = engine_suffix(cfg.scenario.engine, engine);
        for (label, mismatch) in [
            ("on", v.mismatch),
            ("off", MismatchConfig { enabled: false, ..v.mismatch }),
        ] {
            let spec = capture_spectrum(v, &mismatch, engine, &v.capture)?;
            sink.write(&format!("spectrum_{label}{sfx}.csv"), &spectrum_csv(&spec))?;
            let peaks = spectral_peaks(&spec, band, -60.0);
            sink.write(
                &format!("peaks_{label}{sfx}.csv"),
                &table_csv("freq_hz,power_db", &peaks),
            )?;
        }
    }
    Ok(())
}

fn depth_outputs(
    cfg: &ExperimentConfig,
    v: &Validated,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    // depth is measured noise-free on the fast engine; the emitted
    // spectra keep the configured noise for inspection
    let report = cancellation_depth(
        &v.setup,
        &v.mismatch,
        v.capture.sample_rate_hz,
        v.capture.n_periods,
    )?;
    sink.write(
        "depth.csv",
        &table_csv(
            "amplitude_ratio,delay_error_s,bias_error_rad,depth_db,leakage_peak_on_db,leakage_peak_off_db",
            &[vec![
                v.mismatch.amplitude_ratio,
                v.mismatch.delay_error_s,
                v.mismatch.bias_error_rad,
                report.depth_db,
                report.leakage_peak_on_db,
                report.leakage_peak_off_db,
            ]],
        ),
    )?;
    spectrum_outputs(cfg, v, sink)
}

fn isar_params(v: &Validated, n_periods: usize) -> IsarParams {
    IsarParams {
        bandwidth_hz: v.setup.chirp.bandwidth_hz(),
        center_wavelength_m: C / v.setup.chirp.center_frequency_hz(),
        integration_time_s: n_periods as f64 * v.setup.chirp.period_s,
        rotation_rate_rad_per_s: 2.0 * PI / v.setup.scene.turntable_period_s,
    }
}

fn image_outputs(
    cfg: &ExperimentConfig,
    v: &Validated,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    let imaging = cfg.imaging.as_ref().expect("validated");
    let hp = cfg.highpass_spec();
    let params = isar_params(v, imaging.n_periods);
    let capture = CaptureConfig {
        n_periods: imaging.n_periods,
        ..v.capture
    };
    for engine in cfg.scenario.engine.engines() {
        let sfx = engine_suffix(cfg.scenario.engine, engine);
        for (label, mismatch) in [
            ("on", v.mismatch),
            ("off", MismatchConfig { enabled: false, ..v.mismatch }),
        ] {
            let traces = run_engine(&v.setup, &mismatch, &v.noise, engine, &capture, &v.physical)?;
            let cube = build_cube(&traces)?;
            let img = form_image(&cube, hp.as_ref(), &v.setup.chirp, &params)?;
            sink.write(&format!("image_{label}{sfx}.pgm"), &image_pgm(&img))?;
            sink.write(&format!("image_{label}{sfx}_axes.csv"), &image_axes_csv(&img))?;
            let peaks: Vec<Vec<f64>> =
                extract_peaks(&img, imaging.peak_threshold_db, imaging.peak_min_separation_cells)
                    .into_iter()
                    .map(|p| vec![p.range_m, p.cross_range_m, p.power_db])
                    .collect();
            sink.write(
                &format!("peaks_{label}{sfx}.csv"),
                &table_csv("range_m,cross_range_m,power_db", &peaks),
            )?;
        }
    }
    Ok(())
}

/// One row per slow-time sample of the distance-measurement protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingRow {
    pub sample_index: usize,
    pub slow_time_s: f64,
    pub theoretical_m: f64,
    pub estimated_m: f64,
    pub error_m: f64,
}

/// Sweep the single-target scene across one turntable rotation,
/// estimating distance per sample from the de-chirped spectrum peak in
/// the configured band.
pub fn ranging_protocol(
    cfg: &ExperimentConfig,
    v: &Validated,
    mismatch: &MismatchConfig,
    engine: EngineKind,
) -> Result<Vec<RangingRow>, CliError> {
    let ranging = cfg
        .ranging
        .as_ref()
        .ok_or_else(|| CliError::config("ranging: section required"))?;
    let period = v.setup.chirp.period_s;
    let n_periods = ((ranging.capture_time_s / period).round() as usize).max(1);
    let step = v.setup.scene.turntable_period_s / (ranging.n_samples - 1) as f64;
    let mut rows = Vec::with_capacity(ranging.n_samples);
    for i in 0..ranging.n_samples {
        let slow_time = i as f64 * step;
        let capture = CaptureConfig {
            sample_rate_hz: v.capture.sample_rate_hz,
            n_periods,
            slow_time_start_s: slow_time,
        };
        // decorrelate the noise between samples, reproducibly
        let noise = NoiseSpec {
            seed: v
                .noise
                .seed
                .wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..v.noise
        };
        let traces = run_engine(&v.setup, mismatch, &noise, engine, &capture, &v.physical)?;
        let joined = concat_traces(&traces)?;
        let spec = spectrum(&joined, Window::Hann)?;
        let peak = find_peak(&spec, (ranging.band_lo_hz, ranging.band_hi_hz))?;
        let estimated = frequency_to_range(peak.frequency_hz, &v.setup.chirp)
            - C * v.setup.scene.system_delay_offset_s / 2.0;
        let mid = slow_time + 0.5 * n_periods as f64 * period;
        let theoretical = v.setup.scene.target_distance(0, mid);
        rows.push(RangingRow {
            sample_index: i,
            slow_time_s: slow_time,
            theoretical_m: theoretical,
            estimated_m: estimated,
            error_m: estimated - theoretical,
        });
    }
    Ok(rows)
}

fn ranging_outputs(
    cfg: &ExperimentConfig,
    v: &Validated,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    for engine in cfg.scenario.engine.engines() {
        let sfx = engine_suffix(cfg.scenario.engine, engine);
        for (label, mismatch) in [
            ("on", v.mismatch),
            ("off", MismatchConfig { enabled: false, ..v.mismatch }),
        ] {
            let rows = ranging_protocol(cfg, v, &mismatch, engine)?;
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.sample_index as f64,
                        r.slow_time_s,
                        r.theoretical_m,
                        r.estimated_m,
                        r.error_m,
                    ]
                })
                .collect();
            sink.write(
                &format!("ranging_{label}{sfx}.csv"),
                &table_csv(
                    "sample_index,slow_time_s,theoretical_m,estimated_m,error_m",
                    &table,
                ),
            )?;
        }
    }
    Ok(())
}

/// `sim sweep`: depth table along one mismatch axis.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let v = cfg.validate()?;
    let grid = cfg.sweep_grid(axis)?;
    let table = depth_sweep(
        &v.setup,
        &v.mismatch,
        axis,
        &grid,
        v.capture.sample_rate_hz,
        v.capture.n_periods,
    )?;
    let mut sink = OutputSink::new(out_dir)?;
    sink.write("config.toml", cfg.to_toml().as_bytes())?;
    let rows: Vec<Vec<f64>> = table.iter().map(|&(x, d)| vec![x, d]).collect();
    sink.write(
        &format!("sweep_{}.csv", axis.name()),
        &table_csv("mismatch_value,depth_db", &rows),
    )?;
    let manifest = sink.into_manifest(
        cfg,
        cfg.scenario.engine.name(),
        started.elapsed().as_secs_f64() * 1e3,
    );
    manifest.save(out_dir)?;
    Ok(manifest)
}

/// `sim match`: automatic amplitude/delay matching; a best-effort
/// result pinned on the search bounds is reported with status 0.
pub fn run_match(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let v = cfg.validate()?;
    let bounds = cfg.match_bounds()?;
    let (result, converged) =
        match auto_match(&v.setup, &v.mismatch, &bounds, v.capture.sample_rate_hz) {
            Ok(r) => (r, 1.0),
            Err(CoreError::NotConverged { best }) => (best, 0.0),
            Err(e) => return Err(e.into()),
        };
    let mut sink = OutputSink::new(out_dir)?;
    sink.write("config.toml", cfg.to_toml().as_bytes())?;
    sink.write(
        "match.csv",
        &table_csv(
            "start_ratio,start_delay_s,ratio,delay_s,depth_db,iterations,converged",
            &[vec![
                v.mismatch.amplitude_ratio,
                v.mismatch.delay_error_s,
                result.amplitude_ratio,
                result.delay_error_s,
                result.depth_db,
                result.iterations as f64,
                converged,
            ]],
        ),
    )?;
    if converged == 0.0 {
        eprintln!(
            "note: optimum pinned on a search bound; best depth {:.1} dB at ratio {:.6}, delay {:.3e} s",
            result.depth_db, result.amplitude_ratio, result.delay_error_s
        );
    }
    let manifest = sink.into_manifest(
        cfg,
        cfg.scenario.engine.name(),
        started.elapsed().as_secs_f64() * 1e3,
    );
    manifest.save(out_dir)?;
    Ok(manifest)
}
