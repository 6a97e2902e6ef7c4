//! Deterministic output writers: CSV tables, 16-bit PGM images with
//! sidecar axis files, and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! re-run with the same config and seed produces byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use phodar_core::{IsarImage, SpectrumEstimate, IMAGE_FLOOR_DB};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Collects emitted files and their checksums while a scenario runs.
pub struct OutputSink {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: String,
    pub kind: String,
    pub engine: String,
    pub seed: u64,
    pub wall_clock_ms: f64,
    pub outputs: Vec<OutputRecord>,
    pub config: ExperimentConfig,
}

impl OutputSink {
    pub fn new(dir: &Path) -> Result<OutputSink, CliError> {
        fs::create_dir_all(dir)?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.records.push(OutputRecord {
            path: name.to_string(),
            sha256: hex,
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn into_manifest(
        self,
        cfg: &ExperimentConfig,
        engine: &str,
        wall_clock_ms: f64,
    ) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: cfg.scenario.name.clone(),
            kind: cfg.scenario.kind.name().to_string(),
            engine: engine.to_string(),
            seed: cfg.scenario.seed,
            wall_clock_ms,
            outputs: self.records,
            config: cfg.clone(),
        }
    }
}

impl RunManifest {
    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::runtime(e.to_string()))?;
        fs::write(dir.join("manifest.toml"), text)?;
        Ok(())
    }
}

pub fn spectrum_csv(spec: &SpectrumEstimate) -> Vec<u8> {
    let mut out = String::from("freq_hz,power_db\n");
    for (f, p) in spec.freq_hz.iter().zip(&spec.power_db) {
        out.push_str(&format!("{f},{p}\n"));
    }
    out.into_bytes()
}

pub fn table_csv(header: &str, rows: &[Vec<f64>]) -> Vec<u8> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// 16-bit binary PGM, big-endian sample order, row-major over
/// (range, cross-range); the dB scale [-120, 0] maps to [0, 65535].
pub fn image_pgm(img: &IsarImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.n_cross, img.n_range).into_bytes();
    for &db in &img.magnitude_db {
        let unit = ((db - IMAGE_FLOOR_DB) / -IMAGE_FLOOR_DB).clamp(0.0, 1.0);
        let v = (unit * 65535.0).round() as u16;
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

/// Sidecar CSV giving both image axes in meters.
pub fn image_axes_csv(img: &IsarImage) -> Vec<u8> {
    let mut out = String::from("axis,index,value_m\n");
    for (i, v) in img.range_axis_m.iter().enumerate() {
        out.push_str(&format!("range,{i},{v}\n"));
    }
    for (i, v) in img.cross_range_axis_m.iter().enumerate() {
        out.push_str(&format!("cross_range,{i},{v}\n"));
    }
    out.into_bytes()
}
