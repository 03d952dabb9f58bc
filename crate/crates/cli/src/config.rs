//! Run-configuration JSON schema and its mapping onto the core types.
//!
//! All keys carry explicit unit suffixes; angles are degrees and small
//! lengths millimeters in the file, converted to SI here.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cobeam::beamform::{ApodizationChoice, FilterSpec, ImagingConfig, Method, WindowKind};
use cobeam::geometry::{build_scoba, build_scobar, SparseDesign};
use cobeam::simulate::{make_cyst_phantom, synth_pulse, Phantom, PulseSpec, Scatterer};

/// Marker for configuration-level failures (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
pub enum AngleSpec {
    /// Explicit list of angles, degrees.
    List(Vec<f64>),
    /// Uniform sweep, degrees.
    Range { start_deg: f64, stop_deg: f64, count: usize },
}

impl AngleSpec {
    fn to_radians(&self) -> Result<Vec<f64>> {
        match self {
            AngleSpec::List(v) => {
                if v.is_empty() {
                    bail!(config_err("scan_angles_deg: empty angle list"));
                }
                Ok(v.iter().map(|d| d.to_radians()).collect())
            }
            AngleSpec::Range { start_deg, stop_deg, count } => {
                if *count < 1 || stop_deg < start_deg {
                    bail!(config_err("scan_angles_deg: need count >= 1 and stop >= start"));
                }
                if *count == 1 {
                    return Ok(vec![start_deg.to_radians()]);
                }
                let step = (stop_deg - start_deg) / (*count as f64 - 1.0);
                Ok((0..*count).map(|k| (start_deg + step * k as f64).to_radians()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSection {
    pub speed_of_sound_mps: f64,
    pub center_frequency_hz: f64,
    pub sampling_frequency_hz: f64,
    pub pitch_m: f64,
    pub element_half_count: u32,
    pub scan_angles_deg: AngleSpec,
    pub depth_range_mm: [f64; 2],
    #[serde(default = "default_dynamic_range")]
    pub dynamic_range_db: f64,
}

fn default_dynamic_range() -> f64 {
    60.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default = "default_cycles")]
    pub cycles: u32,
}

fn default_cycles() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocusSection {
    pub r_mm: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSection {
    pub r_mm: f64,
    #[serde(default)]
    pub theta_deg: f64,
    #[serde(default = "default_amp")]
    pub amp: f64,
}

fn default_amp() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CystSection {
    pub center_mm: [f64; 2],
    pub radius_mm: f64,
    pub density_per_mm2: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scatterers: Vec<ScattererSection>,
    #[serde(default)]
    pub cyst: Option<CystSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub imaging: ImagingSection,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub design: Option<DesignSection>,
    #[serde(default)]
    pub apodization: Option<ApodizationChoice>,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
    #[serde(default)]
    pub pulse: Option<PulseSection>,
    #[serde(default)]
    pub phantom: Option<PhantomSection>,
    #[serde(default)]
    pub transmit_focus: Option<FocusSection>,
    #[serde(default = "default_spreading")]
    pub spreading_1_over_r: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_spreading() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        config.imaging_config().map_err(|e| config_err(e.to_string()))?;
        Ok((config, bytes))
    }

    pub fn imaging_config(&self) -> Result<ImagingConfig> {
        let im = &self.imaging;
        let config = ImagingConfig {
            speed_of_sound_mps: im.speed_of_sound_mps,
            center_frequency_hz: im.center_frequency_hz,
            sampling_frequency_hz: im.sampling_frequency_hz,
            pitch_m: im.pitch_m,
            element_half_count: im.element_half_count,
            scan_angles_rad: im.scan_angles_deg.to_radians()?,
            depth_range_m: (im.depth_range_mm[0] * 1e-3, im.depth_range_mm[1] * 1e-3),
            dynamic_range_db: im.dynamic_range_db,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn filter_spec(&self) -> FilterSpec {
        self.filter
            .unwrap_or_else(|| FilterSpec::default_bandpass(self.imaging.center_frequency_hz))
    }

    pub fn pulse_samples(&self) -> Result<Vec<f64>> {
        let cycles = self.pulse.map_or(default_cycles(), |p| p.cycles);
        Ok(synth_pulse(&PulseSpec {
            cycles,
            center_frequency_hz: self.imaging.center_frequency_hz,
            window: WindowKind::Hanning,
            sampling_frequency_hz: self.imaging.sampling_frequency_hz,
        })?)
    }

    /// Transmit focus (range, angle) in SI; defaults to broadside at the
    /// middle of the depth range.
    pub fn transmit_focus_si(&self) -> (f64, f64) {
        match &self.transmit_focus {
            Some(f) => (f.r_mm * 1e-3, f.theta_deg.to_radians()),
            None => {
                let (lo, hi) = (self.imaging.depth_range_mm[0], self.imaging.depth_range_mm[1]);
                ((lo + hi) / 2.0 * 1e-3, 0.0)
            }
        }
    }

    /// The sparse design of the config, built for this N.
    pub fn design_for(&self, method: Method) -> Result<Option<SparseDesign>> {
        if !method.is_sparse() {
            return Ok(None);
        }
        let section = self.design.ok_or_else(|| {
            config_err(format!("method '{method}' requires a design section {{a, b}}"))
        })?;
        let n = self.imaging.element_half_count;
        let design = match method {
            Method::Scoba => build_scoba(n, section.a, section.b),
            Method::Scobar => build_scobar(n, section.a, section.b),
            _ => unreachable!(),
        }
        .map_err(|e| config_err(e.to_string()))?;
        Ok(Some(design))
    }

    /// Paper-protocol defaults when the config does not pin an apodization:
    /// DAS and SCOBA run effective-unity weighting, COBA and SCOBAR the
    /// triangular co-array weighting.
    pub fn apodization_for(&self, method: Method) -> ApodizationChoice {
        self.apodization.unwrap_or(match method {
            Method::Das | Method::Scoba => ApodizationChoice::Unity,
            Method::Coba | Method::Scobar => ApodizationChoice::Triangle,
        })
    }

    /// Assemble the phantom: listed point scatterers plus the optional cyst
    /// speckle background.
    pub fn phantom(&self, imaging: &ImagingConfig) -> Result<Phantom> {
        let section = self.phantom.clone().unwrap_or_default();
        let mut scatterers: Vec<Scatterer> = section
            .scatterers
            .iter()
            .map(|s| Scatterer {
                range_m: s.r_mm * 1e-3,
                angle_rad: s.theta_deg.to_radians(),
                amplitude: s.amp,
            })
            .collect();
        if let Some(cyst) = &section.cyst {
            let speckle = make_cyst_phantom(
                imaging,
                (cyst.center_mm[0] * 1e-3, cyst.center_mm[1] * 1e-3),
                cyst.radius_mm * 1e-3,
                cyst.density_per_mm2,
                cyst.seed,
            )?;
            scatterers.extend(speckle.scatterers);
        }
        Ok(Phantom { scatterers, seed: section.seed })
    }
}
