//! Toy-scale molecular dynamics for the micro RVE.
//!
//! Internal unit system: length Å, time ps, energy eV, so mass carries
//! eV·ps²/Å². Stress comes out in eV/Å³ and converts to GPa via
//! [`EVA3_TO_GPA`].

mod dump;
mod integrate;
mod lattice;
mod loading;
mod neighbor;
mod potential;
mod virial;

pub use dump::{read_lammps_dump, write_xyz_extended, DumpAtom};
pub use integrate::{compute_forces, relax, step_velocity_verlet, total_energy, RelaxParams};
pub use lattice::{build_rve, CrackKind, CrackSpec, RveParams};
pub use loading::{run_cyclic_loading, CycleRecord, EmitParams, LoadProgram};
pub use neighbor::NeighborList;
pub use potential::{PairForm, PairPotential};
pub use virial::{virial_stress, von_mises, VirialStressField};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1 amu expressed in eV·ps²/Å².
pub const AMU_TO_INTERNAL: f64 = 1.0364269656262e-4;
/// Boltzmann constant, eV/K.
pub const KB_EV: f64 = 8.617333262e-5;
/// 1 eV/Å³ in GPa.
pub const EVA3_TO_GPA: f64 = 160.21766208;

pub const MASS_FE_AMU: f64 = 55.845;
pub const MASS_C_AMU: f64 = 12.011;

#[derive(Debug, Error)]
pub enum MdError {
    #[error("invalid RVE geometry: {0}")]
    BadGeometry(String),
    #[error("defect fraction {0} outside [0, 0.05]")]
    BadFraction(f64),
    #[error("crack does not fit the box: {0}")]
    BadCrack(String),
    #[error("atoms {0} and {1} overlap at separation {2:.3} Å (corrupted state)")]
    Overlap(usize, usize, f64),
    #[error("non-finite state after integration step (reduce dt)")]
    BlowUp,
    #[error("relaxation failed to reach tolerance {tolerance} in {steps} steps (max force {max_force:.3e})")]
    RelaxationFailed {
        tolerance: f64,
        steps: usize,
        max_force: f64,
    },
    #[error("invalid load program: {0}")]
    BadProgram(String),
    #[error("zero atomic volume")]
    ZeroVolume,
    #[error("emission failed: {0}")]
    Emission(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dump file: {0}")]
    MalformedDump(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    Fe,
    /// Carbon replacing an Fe site.
    CSubstitutional,
    /// Carbon at an octahedral interstice.
    CInterstitial,
}

impl Species {
    pub fn mass_amu(&self) -> f64 {
        match self {
            Species::Fe => MASS_FE_AMU,
            _ => MASS_C_AMU,
        }
    }

    pub fn mass_internal(&self) -> f64 {
        self.mass_amu() * AMU_TO_INTERNAL
    }

    pub fn is_carbon(&self) -> bool {
        !matches!(self, Species::Fe)
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Species::Fe => "Fe",
            _ => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    Mobile,
    FixedTop,
    FixedBottom,
}

impl Group {
    pub fn is_fixed(&self) -> bool {
        !matches!(self, Group::Mobile)
    }
}

/// Orthogonal simulation box. x and y are free; z may be periodic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub periodic_z: bool,
}

impl SimBox {
    pub fn length(&self, d: usize) -> f64 {
        self.hi[d] - self.lo[d]
    }

    /// Minimum-image displacement from a to b.
    #[inline]
    pub fn displacement(&self, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        let mut d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        if self.periodic_z {
            let lz = self.length(2);
            d[2] -= lz * (d[2] / lz).round();
        }
        d
    }

    /// Wrap a position into the box along periodic directions.
    #[inline]
    pub fn wrap(&self, p: &mut [f64; 3]) {
        if self.periodic_z {
            let lz = self.length(2);
            p[2] -= lz * ((p[2] - self.lo[2]) / lz).floor();
        }
    }
}

/// Masked interaction seam for the sharp (bond-cut) crack: pairs whose
/// midpoint lies left of `x_max` and which straddle `y` do not interact.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Seam {
    pub x_max: f64,
    pub y: f64,
}

impl Seam {
    #[inline]
    pub fn masks(&self, a: &[f64; 3], b: &[f64; 3]) -> bool {
        0.5 * (a[0] + b[0]) < self.x_max && (a[1] - self.y) * (b[1] - self.y) < 0.0
    }
}

/// The full MD state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomSystem {
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub species: Vec<Species>,
    pub group: Vec<Group>,
    pub sim_box: SimBox,
    /// Lattice constant the system was built with (Å); sets the per-atom
    /// volume a³/2 used by the virial stress.
    pub lattice_constant: f64,
    pub seam: Option<Seam>,
}

impl AtomSystem {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// BCC volume per atom, Å³.
    pub fn atomic_volume(&self) -> f64 {
        self.lattice_constant.powi(3) / 2.0
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.species)
            .map(|(v, s)| {
                0.5 * s.mass_internal() * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            })
            .sum()
    }

    pub fn mobile_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.group
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_fixed())
            .map(|(i, _)| i)
    }

    /// Seeded Maxwell–Boltzmann velocities on mobile atoms, zero net momentum.
    pub fn thermalize(&mut self, temperature_k: f64, seed: u64) {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mobile: Vec<usize> = self.mobile_indices().collect();
        let mut p_net = [0.0f64; 3];
        for &i in &mobile {
            let m = self.species[i].mass_internal();
            let sigma = (KB_EV * temperature_k / m).sqrt();
            for d in 0..3 {
                // Box-Muller, explicit for reproducibility across rand versions
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let g = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                self.velocities[i][d] = sigma * g;
                p_net[d] += m * self.velocities[i][d];
            }
        }
        if !mobile.is_empty() {
            let m_tot: f64 = mobile.iter().map(|&i| self.species[i].mass_internal()).sum();
            for &i in &mobile {
                for d in 0..3 {
                    self.velocities[i][d] -= p_net[d] / m_tot;
                }
            }
        }
    }
}
