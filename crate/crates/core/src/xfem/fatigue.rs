//! Crack-growth stepping: alternate elastic solves with power-law cycle
//! increments until the tip approaches a free boundary.

use serde::{Deserialize, Serialize};

use super::assemble::{solve_plate, PlateProblem, Solution};
use super::crack::{kink_angle, Crack};
use super::mesh::Mesh;
use super::sif::interaction_integral;
use super::{Material, XfemError};
use crate::paris::{stress_intensity, ParisConstants, UnitSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FatigueConfig {
    /// Plate width (crack direction), mm.
    pub width: f64,
    /// Plate height (loading direction), mm.
    pub height: f64,
    /// Initial edge-crack length, mm.
    pub a0: f64,
    /// Nominal element size, mm.
    pub elem_size: f64,
    pub material: Material,
    pub sigma_max_mpa: f64,
    pub sigma_min_mpa: f64,
    /// Growth-law constants; converted to MPa·√mm internally.
    pub paris: ParisConstants,
    /// Crack increment per step, mm.
    pub da: f64,
    pub max_steps: usize,
}

impl FatigueConfig {
    /// The reference plate: 60 × 120 mm, 10 mm edge crack, 50 MPa pulsating
    /// tension.
    pub fn reference_plate(paris: ParisConstants) -> Self {
        FatigueConfig {
            width: 60.0,
            height: 120.0,
            a0: 10.0,
            elem_size: 1.0,
            material: Material::steel(),
            sigma_max_mpa: 50.0,
            sigma_min_mpa: 0.0,
            paris,
            da: 1.0,
            max_steps: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifeStep {
    pub step: usize,
    /// Crack length at the start of the step, mm.
    pub a: f64,
    /// Cumulative cycles at the start of the step.
    pub cycles: f64,
    /// Range of the closed-form stress intensity over the cycle, MPa·√mm.
    pub delta_k: f64,
    /// Field-extracted stress intensities at peak load, MPa·√mm.
    pub k1_fem: f64,
    pub k2_fem: f64,
    /// Growth direction for this step, degrees off the current tangent.
    pub kink_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Tip within two elements of a free boundary: treated as fracture.
    NearBoundary,
    MaxSteps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FatigueOutcome {
    pub steps: Vec<LifeStep>,
    pub stop: StopReason,
    pub cycles_to_failure: f64,
    pub final_a: f64,
    /// Crack vertices at the end of the run.
    pub path: Vec<[f64; 2]>,
}

fn validate(cfg: &FatigueConfig) -> Result<(), XfemError> {
    cfg.material.validate()?;
    if cfg.a0 <= 0.0 || cfg.a0 >= cfg.width || cfg.da <= 0.0 {
        return Err(XfemError::BadGeometry(format!(
            "a0 = {}, da = {}, width = {}",
            cfg.a0, cfg.da, cfg.width
        )));
    }
    if cfg.sigma_max_mpa <= cfg.sigma_min_mpa {
        return Err(XfemError::BadGeometry(
            "sigma_max must exceed sigma_min".into(),
        ));
    }
    if cfg.paris.c <= 0.0 || !(0.0..10.0).contains(&cfg.paris.m) {
        return Err(XfemError::BadGrowthLaw);
    }
    Ok(())
}

/// Run the growth loop. `on_step` sees each converged solution along
/// with the cumulative cycle count at the start of the step, for field
/// output.
pub fn run_fatigue(
    cfg: &FatigueConfig,
    mut on_step: Option<&mut dyn FnMut(usize, f64, &Solution)>,
) -> Result<FatigueOutcome, XfemError> {
    validate(cfg)?;
    let paris = cfg.paris.convert_to(UnitSystem::MpaSqrtMm);
    let mesh = Mesh::rectangle(cfg.width, cfg.height, cfg.elem_size)?;
    let y_crack = (mesh.ny / 2) as f64 * mesh.dy + 0.5 * mesh.dy;
    let mut crack = Crack::edge(cfg.a0, y_crack);
    let margin = 2.0 * mesh.dx.max(mesh.dy);

    let mut steps = Vec::new();
    let mut cycles = 0.0f64;
    let mut stop = StopReason::MaxSteps;
    for step in 0..cfg.max_steps {
        let tip = crack.tip();
        if tip[0] >= cfg.width - margin
            || tip[1] <= margin
            || tip[1] >= cfg.height - margin
        {
            stop = StopReason::NearBoundary;
            break;
        }
        let sol = solve_plate(&PlateProblem {
            mesh: mesh.clone(),
            crack: crack.clone(),
            material: cfg.material,
            sigma_mpa: cfg.sigma_max_mpa,
        })?;
        let sif = interaction_integral(&sol);
        if let Some(cb) = on_step.as_deref_mut() {
            cb(step, cycles, &sol);
        }
        let kink = kink_angle(sif.k1, sif.k2);
        // cycle count from the closed-form range at the step midpoint
        let a_mid = crack.length() + 0.5 * cfg.da;
        let dk = stress_intensity(cfg.sigma_max_mpa - cfg.sigma_min_mpa, a_mid)
            .expect("positive midpoint length");
        let dn = cfg.da / paris.rate(dk);
        steps.push(LifeStep {
            step,
            a: crack.length(),
            cycles,
            delta_k: dk,
            k1_fem: sif.k1,
            k2_fem: sif.k2,
            kink_deg: kink.to_degrees(),
        });
        cycles += dn;
        crack.grow(cfg.da, kink);
    }
    let final_a = crack.length();
    Ok(FatigueOutcome {
        steps,
        stop,
        cycles_to_failure: cycles,
        final_a,
        path: crack.points,
    })
}
