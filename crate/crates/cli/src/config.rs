//! Experiment configuration: flat TOML sections per module, explicit
//! units in key names, unknown keys rejected.

use serde::{Deserialize, Serialize};

use phodar_core::{
    CaptureConfig, ChirpParams, EngineKind, FilterSpec, LinkSetup, MatchBounds, MismatchConfig,
    ModulatorConfig, NoiseSpec, PdConfig, PhysicalConfig, PointTarget, Scene, SweepAxis,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub chirp: ChirpSection,
    pub modulator: ModulatorSection,
    pub photodetector: PdSection,
    pub scene: SceneSection,
    pub mismatch: MismatchSection,
    pub noise: NoiseSection,
    pub capture: CaptureSection,
    #[serde(default)]
    pub physical: PhysicalSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imaging: Option<ImagingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranging: Option<RangingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "match")]
    pub matching: Option<MatchSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Spectrum,
    Depth,
    Image,
    Ranging,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Spectrum => "spectrum",
            ScenarioKind::Depth => "depth",
            ScenarioKind::Image => "image",
            ScenarioKind::Ranging => "ranging",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineSelection {
    Fast,
    Physical,
    Both,
}

impl EngineSelection {
    pub fn name(&self) -> &'static str {
        match self {
            EngineSelection::Fast => "fast",
            EngineSelection::Physical => "physical",
            EngineSelection::Both => "both",
        }
    }

    pub fn engines(&self) -> Vec<EngineKind> {
        match self {
            EngineSelection::Fast => vec![EngineKind::Fast],
            EngineSelection::Physical => vec![EngineKind::Physical],
            EngineSelection::Both => vec![EngineKind::Fast, EngineKind::Physical],
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "fast" => Ok(EngineSelection::Fast),
            "physical" => Ok(EngineSelection::Physical),
            "both" => Ok(EngineSelection::Both),
            other => Err(CliError::config(format!(
                "scenario.engine: unknown engine '{other}' (expected fast|physical|both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub kind: ScenarioKind,
    pub engine: EngineSelection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpSection {
    pub f_start_hz: f64,
    pub chirp_rate_hz_per_s: f64,
    pub period_s: f64,
    pub amplitude_v: f64,
    #[serde(default)]
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSection {
    pub v_pi_v: f64,
    pub bias_phase_rad: f64,
    pub input_power_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSection {
    pub responsivity_a_per_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub antenna_to_center_m: f64,
    pub turntable_period_s: f64,
    pub leakage_delay_s: f64,
    pub leakage_amplitude_v: f64,
    #[serde(default)]
    pub system_delay_offset_s: f64,
    #[serde(default)]
    pub targets: Vec<TargetSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub radius_m: f64,
    pub initial_angle_rad: f64,
    pub reflectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MismatchSection {
    pub amplitude_ratio: f64,
    #[serde(default)]
    pub delay_error_s: f64,
    #[serde(default)]
    pub bias_error_rad: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureSection {
    pub sample_rate_hz: f64,
    pub n_periods: usize,
    #[serde(default)]
    pub slow_time_start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub sample_rate_hz: f64,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        PhysicalSection {
            sample_rate_hz: 64e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSection {
    pub n_periods: usize,
    pub highpass_enabled: bool,
    pub highpass_cutoff_hz: f64,
    pub peak_threshold_db: f64,
    pub peak_min_separation_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangingSection {
    pub n_samples: usize,
    pub capture_time_s: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub amplitude_grid: Vec<f64>,
    pub delay_grid_s: Vec<f64>,
    pub bias_grid_rad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSection {
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub delay_lo_s: f64,
    pub delay_hi_s: f64,
}

/// Core-level objects assembled from a validated config.
#[derive(Debug, Clone)]
pub struct Validated {
    pub setup: LinkSetup,
    pub mismatch: MismatchConfig,
    pub noise: NoiseSpec,
    pub capture: CaptureConfig,
    pub physical: PhysicalConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    /// Cross-field validation, then assembly of the core-level objects.
    pub fn validate(&self) -> Result<Validated, CliError> {
        let setup = LinkSetup {
            chirp: ChirpParams {
                f_start_hz: self.chirp.f_start_hz,
                chirp_rate_hz_per_s: self.chirp.chirp_rate_hz_per_s,
                period_s: self.chirp.period_s,
                amplitude_v: self.chirp.amplitude_v,
                delay_s: self.chirp.delay_s,
            },
            scene: Scene {
                antenna_to_center_m: self.scene.antenna_to_center_m,
                turntable_period_s: self.scene.turntable_period_s,
                targets: self
                    .scene
                    .targets
                    .iter()
                    .map(|t| PointTarget {
                        radius_m: t.radius_m,
                        initial_angle_rad: t.initial_angle_rad,
                        reflectivity: t.reflectivity,
                    })
                    .collect(),
                leakage_delay_s: self.scene.leakage_delay_s,
                leakage_amplitude_v: self.scene.leakage_amplitude_v,
                system_delay_offset_s: self.scene.system_delay_offset_s,
            },
            modulator: ModulatorConfig {
                v_pi_v: self.modulator.v_pi_v,
                bias_phase_rad: self.modulator.bias_phase_rad,
                input_power_scale: self.modulator.input_power_scale,
            },
            pd: PdConfig {
                responsivity_a_per_w: self.photodetector.responsivity_a_per_w,
            },
        };
        setup
            .chirp
            .validate()
            .map_err(|e| CliError::config(format!("chirp: {e}")))?;
        setup
            .scene
            .validate()
            .map_err(|e| CliError::config(format!("scene: {e}")))?;
        setup
            .modulator
            .validate()
            .map_err(|e| CliError::config(format!("modulator: {e}")))?;
        if !(setup.pd.responsivity_a_per_w > 0.0) {
            return Err(CliError::config(
                "photodetector.responsivity_a_per_w: must be > 0",
            ));
        }
        let mismatch = MismatchConfig {
            amplitude_ratio: self.mismatch.amplitude_ratio,
            delay_error_s: self.mismatch.delay_error_s,
            bias_error_rad: self.mismatch.bias_error_rad,
            enabled: self.mismatch.enabled,
        };
        mismatch
            .validate()
            .map_err(|e| CliError::config(format!("mismatch: {e}")))?;
        if self.noise.std_dev < 0.0 {
            return Err(CliError::config("noise.std_dev: must be >= 0"));
        }
        let noise = NoiseSpec {
            enabled: self.noise.enabled,
            std_dev: self.noise.std_dev,
            seed: self.scenario.seed,
        };
        if !(self.capture.sample_rate_hz > 0.0) {
            return Err(CliError::config("capture.sample_rate_hz: must be > 0"));
        }
        if self.capture.n_periods == 0 {
            return Err(CliError::config("capture.n_periods: must be >= 1"));
        }
        if !(self.physical.sample_rate_hz > 0.0) {
            return Err(CliError::config("physical.sample_rate_hz: must be > 0"));
        }
        match self.scenario.kind {
            ScenarioKind::Image => {
                let img = self.imaging.as_ref().ok_or_else(|| {
                    CliError::config("imaging: section required for kind = \"image\"")
                })?;
                if img.n_periods == 0 {
                    return Err(CliError::config("imaging.n_periods: must be >= 1"));
                }
                if !(img.highpass_cutoff_hz > 0.0)
                    || img.highpass_cutoff_hz >= self.capture.sample_rate_hz / 2.0
                {
                    return Err(CliError::config(
                        "imaging.highpass_cutoff_hz: must sit below the capture Nyquist",
                    ));
                }
            }
            ScenarioKind::Ranging => {
                let rng = self.ranging.as_ref().ok_or_else(|| {
                    CliError::config("ranging: section required for kind = \"ranging\"")
                })?;
                if rng.n_samples < 2 {
                    return Err(CliError::config("ranging.n_samples: must be >= 2"));
                }
                if !(rng.capture_time_s > 0.0) {
                    return Err(CliError::config("ranging.capture_time_s: must be > 0"));
                }
                if !(rng.band_lo_hz < rng.band_hi_hz) {
                    return Err(CliError::config(
                        "ranging.band_lo_hz: must be below ranging.band_hi_hz",
                    ));
                }
                if self.scene.targets.len() != 1 {
                    return Err(CliError::config(
                        "scene.targets: ranging needs exactly one target",
                    ));
                }
            }
            ScenarioKind::Spectrum | ScenarioKind::Depth => {}
        }
        Ok(Validated {
            setup,
            mismatch,
            noise,
            capture: CaptureConfig {
                sample_rate_hz: self.capture.sample_rate_hz,
                n_periods: self.capture.n_periods,
                slow_time_start_s: self.capture.slow_time_start_s,
            },
            physical: PhysicalConfig {
                sample_rate_hz: self.physical.sample_rate_hz,
            },
        })
    }

    pub fn highpass_spec(&self) -> Option<FilterSpec> {
        self.imaging.as_ref().and_then(|img| {
            img.highpass_enabled
                .then(|| FilterSpec::highpass(img.highpass_cutoff_hz))
        })
    }

    pub fn sweep_grid(&self, axis: SweepAxis) -> Result<Vec<f64>, CliError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::config("sweep: section required for the sweep command"))?;
        let grid = match axis {
            SweepAxis::Amplitude => &sweep.amplitude_grid,
            SweepAxis::Delay => &sweep.delay_grid_s,
            SweepAxis::Bias => &sweep.bias_grid_rad,
        };
        if grid.is_empty() {
            return Err(CliError::config(format!(
                "sweep: grid for axis '{}' is empty",
                axis.name()
            )));
        }
        Ok(grid.clone())
    }

    pub fn match_bounds(&self) -> Result<MatchBounds, CliError> {
        let m = self
            .matching
            .as_ref()
            .ok_or_else(|| CliError::config("match: section required for the match command"))?;
        if !(m.ratio_lo < m.ratio_hi) || !(m.delay_lo_s < m.delay_hi_s) {
            return Err(CliError::config("match: bounds must be nonempty intervals"));
        }
        Ok(MatchBounds {
            amplitude_ratio: (m.ratio_lo, m.ratio_hi),
            delay_error_s: (m.delay_lo_s, m.delay_hi_s),
        })
    }
}
