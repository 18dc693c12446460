//! TOML run configuration covering all four stages.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::md::CrackKind;
use crate::paris::UnitSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub run: RunSection,
    pub rve: RveSection,
    pub load: LoadSection,
    pub extract: ExtractSection,
    pub fit: FitSection,
    #[serde(rename = "macro")]
    pub macro_: MacroSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RveSection {
    /// Requested box dimensions, Å.
    pub box_dims: [f64; 3],
    pub lattice_constant: f64,
    /// Edge-crack length, Å.
    pub crack_length: f64,
    pub crack_kind: CrackKind,
    pub c_fraction: f64,
    pub vacancy_fraction: f64,
    #[serde(default = "default_fixed_planes")]
    pub fixed_planes: usize,
    #[serde(default)]
    pub temperature_k: f64,
}

fn default_fixed_planes() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    pub cycles: usize,
    /// Peak engineering strain of the first and last cycle; the schedule
    /// ramps between them following `(k/(n-1))^peak_exponent`.
    pub peak_start: f64,
    pub peak_end: f64,
    /// Ramp shape; 1 is linear, above 1 back-loads the amplitude growth.
    #[serde(default = "default_peak_exponent")]
    pub peak_exponent: f64,
    pub load_ratio: f64,
    pub strain_rate_per_ps: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_every")]
    pub emit_every: usize,
}

fn default_dt() -> f64 {
    0.001
}

fn default_peak_exponent() -> f64 {
    1.0
}

fn default_every() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSection {
    /// Å per pixel.
    pub resolution: f64,
    /// Splat radius, Å.
    pub disc_radius: f64,
    pub median_window: usize,
    pub binarize_threshold: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Inclusive ΔK window for the regression; omitted bounds are open.
    pub window_min: Option<f64>,
    pub window_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroSection {
    /// Plate width, mm.
    pub width: f64,
    /// Plate height, mm.
    pub height: f64,
    /// Initial crack length, mm.
    pub a0: f64,
    pub elem_size: f64,
    pub youngs_mpa: f64,
    pub poisson: f64,
    pub sigma_max_mpa: f64,
    pub sigma_min_mpa: f64,
    pub da: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Cycle counts at which to dump field snapshots.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Fixed growth constants; when absent the fitted micro constants
    /// are used.
    pub constants: Option<ConstantsSection>,
}

fn default_max_steps() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub c: f64,
    pub m: f64,
    /// `mpa_sqrt_m` or `mpa_sqrt_mm`.
    pub units: String,
}

impl ConstantsSection {
    pub fn unit_system(&self) -> Result<UnitSystem, PipelineError> {
        UnitSystem::parse(&self.units)
            .ok_or_else(|| PipelineError::Config(format!("unknown unit tag {:?}", self.units)))
    }
}

impl PipelineConfig {
    /// Desk-scale preset: minutes, not hours.
    pub fn ci(seed: u64) -> Self {
        PipelineConfig {
            run: RunSection {
                name: "ci".into(),
                seed,
            },
            rve: RveSection {
                box_dims: [100.0, 100.0, 8.55],
                lattice_constant: 2.85,
                crack_length: 30.0,
                crack_kind: CrackKind::Blunt,
                c_fraction: 0.0,
                vacancy_fraction: 0.0,
                fixed_planes: 3,
                temperature_k: 0.0,
            },
            load: LoadSection {
                cycles: 12,
                peak_start: 0.050,
                peak_end: 0.110,
                peak_exponent: 2.0,
                load_ratio: 0.1,
                strain_rate_per_ps: 0.05,
                dt: 0.001,
                emit_every: 1,
            },
            extract: ExtractSection {
                resolution: 0.5,
                disc_radius: 3.6,
                median_window: 3,
                binarize_threshold: 128,
            },
            fit: FitSection {
                window_min: None,
                window_max: None,
            },
            macro_: MacroSection {
                width: 60.0,
                height: 120.0,
                a0: 10.0,
                elem_size: 2.0,
                youngs_mpa: 206_000.0,
                poisson: 0.3,
                sigma_max_mpa: 50.0,
                sigma_min_mpa: 0.0,
                da: 2.0,
                max_steps: 200,
                snapshots: Vec::new(),
                constants: Some(ConstantsSection {
                    c: 1.4299e-11,
                    m: 2.9041,
                    units: "mpa_sqrt_mm".into(),
                }),
            },
        }
    }

    /// Full-scale preset: the documented long-running configuration.
    pub fn paper(seed: u64) -> Self {
        let mut cfg = Self::ci(seed);
        cfg.run.name = "paper".into();
        cfg.rve.box_dims = [200.0, 200.0, 10.0];
        cfg.rve.crack_length = 40.0;
        cfg.rve.temperature_k = 10.0;
        cfg.load.cycles = 30;
        cfg.load.peak_start = 0.040;
        cfg.load.peak_end = 0.110;
        cfg.load.peak_exponent = 2.0;
        cfg.load.load_ratio = 0.5;
        cfg.macro_.elem_size = 1.0;
        cfg.macro_.da = 1.0;
        cfg.macro_.snapshots = vec![10_000.0, 40_000.0, 55_000.0, 63_000.0];
        cfg
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self, PipelineError> {
        match name {
            "ci" => Ok(Self::ci(seed)),
            "paper" => Ok(Self::paper(seed)),
            other => Err(PipelineError::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.load.cycles == 0 {
            return Err(PipelineError::Config("load.cycles must be positive".into()));
        }
        if self.load.peak_start < 0.0 || self.load.peak_end < self.load.peak_start {
            return Err(PipelineError::Config(
                "load peaks must satisfy 0 <= peak_start <= peak_end".into(),
            ));
        }
        if self.extract.median_window % 2 == 0 || self.extract.median_window < 3 {
            return Err(PipelineError::Config(
                "extract.median_window must be odd and >= 3".into(),
            ));
        }
        if let Some(c) = &self.macro_.constants {
            c.unit_system()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = PipelineConfig::ci(42);
        let text = cfg.to_toml();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.run.seed, 42);
        assert_eq!(back.load.cycles, cfg.load.cycles);
        assert_eq!(back.macro_.constants.as_ref().unwrap().units, "mpa_sqrt_mm");
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut text = PipelineConfig::ci(1).to_toml();
        text.push_str("\n[typo_section]\nx = 1\n");
        assert!(toml::from_str::<PipelineConfig>(&text).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = PipelineConfig::ci(1);
        cfg.extract.median_window = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::ci(1);
        cfg.macro_.constants.as_mut().unwrap().units = "ksi_sqrt_in".into();
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::preset("nightly", 1).is_err());
        assert!(PipelineConfig::ci(1).validate().is_ok());
    }
}
