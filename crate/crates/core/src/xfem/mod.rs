//! 2D enriched finite elements for edge-cracked plates under tension,
//! with crack-growth stepping driven by a power-law growth rate.
//!
//! Units are mm, N and MPa throughout; stress intensities come out in
//! MPa·√mm.

mod assemble;
mod crack;
mod enrich;
mod fatigue;
mod mesh;
mod sif;
mod solve;
mod vtk;

pub use assemble::{solve_plate, PlateProblem, Solution};
pub use crack::{hoop_stress_derivative, kink_angle, Crack, TipFrame};
pub use enrich::{classify, ElementStatus, Enrichment};
pub use fatigue::{run_fatigue, FatigueConfig, FatigueOutcome, LifeStep, StopReason};
pub use mesh::Mesh;
pub use sif::{interaction_integral, SifResult};
pub use vtk::write_vtk;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum XfemError {
    #[error("invalid geometry: {0}")]
    BadGeometry(String),
    #[error("invalid material: {0}")]
    BadMaterial(String),
    #[error("crack leaves the plate: {0}")]
    CrackEscaped(String),
    #[error("stiffness matrix is not positive definite (pivot {0:.3e} at dof {1})")]
    NotSpd(f64, usize),
    #[error("growth constants must satisfy c > 0 and 0 < m < 10")]
    BadGrowthLaw,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Linear elastic, isotropic, plane stress.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Material {
    /// Young's modulus, MPa.
    pub youngs_mpa: f64,
    pub poisson: f64,
}

impl Material {
    /// Structural steel defaults.
    pub fn steel() -> Self {
        Material {
            youngs_mpa: 206_000.0,
            poisson: 0.3,
        }
    }

    pub fn validate(&self) -> Result<(), XfemError> {
        if self.youngs_mpa <= 0.0 || !(0.0..0.5).contains(&self.poisson) {
            return Err(XfemError::BadMaterial(format!(
                "E = {} MPa, nu = {}",
                self.youngs_mpa, self.poisson
            )));
        }
        Ok(())
    }

    /// Plane-stress constitutive matrix, row-major (σxx, σyy, τxy).
    pub fn d_matrix(&self) -> [[f64; 3]; 3] {
        let e = self.youngs_mpa;
        let nu = self.poisson;
        let f = e / (1.0 - nu * nu);
        [
            [f, f * nu, 0.0],
            [f * nu, f, 0.0],
            [0.0, 0.0, f * (1.0 - nu) / 2.0],
        ]
    }

    /// Kolosov constant, plane stress.
    pub fn kappa(&self) -> f64 {
        (3.0 - self.poisson) / (1.0 + self.poisson)
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_mpa / (2.0 * (1.0 + self.poisson))
    }
}

/// Handbook single-edge-notch tension correction factor Y(a/W); the
/// polynomial fit valid up to a/W ≈ 0.6.
pub fn sent_correction(a_over_w: f64) -> f64 {
    let x = a_over_w;
    1.122 - 0.231 * x + 10.55 * x * x - 21.71 * x.powi(3) + 30.382 * x.powi(4)
}

/// Reference edge-crack stress intensity: Y σ √(πa).
pub fn sent_k1(sigma: f64, a: f64, width: f64) -> f64 {
    sent_correction(a / width) * sigma * (std::f64::consts::PI * a).sqrt()
}
