//! Force evaluation, Velocity-Verlet integration and quenched relaxation.

use super::{AtomSystem, MdError, NeighborList, PairPotential};

/// Minimum pair separation as a fraction of r0 before the state is
/// declared corrupted.
const MIN_SEPARATION_FRAC: f64 = 0.35;

/// Pairwise forces and the total potential energy.
///
/// Forces are f_i = −∇U(r_i); they vanish beyond the cutoff and satisfy
/// Newton's third law pairwise. Fixed-group atoms receive forces too, but
/// the integrator never applies them.
pub fn compute_forces(
    system: &AtomSystem,
    potential: &PairPotential,
    neighbors: &NeighborList,
) -> Result<(Vec<[f64; 3]>, f64), MdError> {
    let min_sep = MIN_SEPARATION_FRAC * potential.r0;
    let mut forces = vec![[0.0f64; 3]; system.len()];
    let mut energy = 0.0;
    for &(i, j) in &neighbors.pairs {
        let (i, j) = (i as usize, j as usize);
        let pi = &system.positions[i];
        let pj = &system.positions[j];
        if let Some(seam) = &system.seam {
            if seam.masks(pi, pj) {
                continue;
            }
        }
        let d = system.sim_box.displacement(pi, pj);
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if r2 >= potential.r_cut * potential.r_cut {
            continue;
        }
        let r = r2.sqrt();
        if r < min_sep {
            return Err(MdError::Overlap(i, j, r));
        }
        let (u, du) = potential.energy_and_derivative(r, system.species[i], system.species[j]);
        energy += u;
        // force on i points away from j when du > 0 (repulsive side)
        let scale = -du / r;
        for k in 0..3 {
            let f = scale * (-d[k]); // d is i→j, so i feels −d direction times scale
            forces[i][k] += f;
            forces[j][k] -= f;
        }
    }
    Ok((forces, energy))
}

/// One Velocity-Verlet step. `forces` must hold the forces for the current
/// positions on entry and holds the new forces on exit.
///
/// Mobile atoms integrate Newton's equations; fixed-group atoms move
/// ballistically at whatever velocity the loading driver prescribed.
pub fn step_velocity_verlet(
    system: &mut AtomSystem,
    potential: &PairPotential,
    dt: f64,
    neighbors: &mut NeighborList,
    forces: &mut Vec<[f64; 3]>,
) -> Result<f64, MdError> {
    debug_assert!(dt > 0.0);
    let n = system.len();
    for i in 0..n {
        if !system.group[i].is_fixed() {
            let inv_m = 1.0 / system.species[i].mass_internal();
            for k in 0..3 {
                system.velocities[i][k] += 0.5 * dt * forces[i][k] * inv_m;
            }
        }
        for k in 0..3 {
            system.positions[i][k] += dt * system.velocities[i][k];
        }
        let p = &mut system.positions[i];
        system.sim_box.wrap(p);
    }
    neighbors.ensure(system);
    let (new_forces, energy) = compute_forces(system, potential, neighbors)?;
    *forces = new_forces;
    for i in 0..n {
        if !system.group[i].is_fixed() {
            let inv_m = 1.0 / system.species[i].mass_internal();
            for k in 0..3 {
                system.velocities[i][k] += 0.5 * dt * forces[i][k] * inv_m;
            }
        }
    }
    for i in 0..n {
        for k in 0..3 {
            if !system.positions[i][k].is_finite() || !system.velocities[i][k].is_finite() {
                return Err(MdError::BlowUp);
            }
        }
    }
    Ok(energy)
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxParams {
    /// Convergence threshold on the max per-atom force (eV/Å).
    pub tolerance: f64,
    pub max_steps: usize,
    pub dt: f64,
}

impl Default for RelaxParams {
    fn default() -> Self {
        RelaxParams {
            tolerance: 1e-3,
            max_steps: 20_000,
            dt: 0.002,
        }
    }
}

fn max_mobile_force(system: &AtomSystem, forces: &[[f64; 3]]) -> f64 {
    system
        .mobile_indices()
        .map(|i| {
            let f = &forces[i];
            (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Quenched-dynamics energy minimization: Velocity-Verlet with the
/// velocity projected onto the force direction, zeroed whenever the power
/// F·v goes negative. Returns the number of steps taken.
pub fn relax(
    system: &mut AtomSystem,
    potential: &PairPotential,
    neighbors: &mut NeighborList,
    params: RelaxParams,
) -> Result<usize, MdError> {
    for v in system.velocities.iter_mut() {
        *v = [0.0; 3];
    }
    neighbors.ensure(system);
    let (mut forces, _) = compute_forces(system, potential, neighbors)?;
    if max_mobile_force(system, &forces) <= params.tolerance {
        return Ok(0);
    }
    for step in 1..=params.max_steps {
        step_velocity_verlet(system, potential, params.dt, neighbors, &mut forces)?;
        // quench: project velocity on the current force
        let mut power = 0.0;
        let mut f2 = 0.0;
        for i in system.mobile_indices() {
            for k in 0..3 {
                power += system.velocities[i][k] * forces[i][k];
                f2 += forces[i][k] * forces[i][k];
            }
        }
        if power <= 0.0 || f2 == 0.0 {
            for i in 0..system.len() {
                if !system.group[i].is_fixed() {
                    system.velocities[i] = [0.0; 3];
                }
            }
        } else {
            let scale = power / f2;
            for i in 0..system.len() {
                if !system.group[i].is_fixed() {
                    for k in 0..3 {
                        system.velocities[i][k] = scale * forces[i][k];
                    }
                }
            }
        }
        if max_mobile_force(system, &forces) <= params.tolerance {
            return Ok(step);
        }
    }
    Err(MdError::RelaxationFailed {
        tolerance: params.tolerance,
        steps: params.max_steps,
        max_force: max_mobile_force(system, &forces),
    })
}

/// Total energy (kinetic + potential) of the current state.
pub fn total_energy(
    system: &AtomSystem,
    potential: &PairPotential,
    neighbors: &NeighborList,
) -> Result<f64, MdError> {
    let (_, pe) = compute_forces(system, potential, neighbors)?;
    Ok(pe + system.kinetic_energy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::md::{Group, SimBox, Species};
    use approx::assert_abs_diff_eq;

    fn two_atoms(sep: f64) -> AtomSystem {
        AtomSystem {
            positions: vec![[20.0, 20.0, 20.0], [20.0 + sep, 20.0, 20.0]],
            velocities: vec![[0.0; 3]; 2],
            species: vec![Species::Fe; 2],
            group: vec![Group::Mobile; 2],
            sim_box: SimBox {
                lo: [0.0; 3],
                hi: [40.0; 3],
                periodic_z: false,
            },
            lattice_constant: 2.85,
            seam: None,
        }
    }

    #[test]
    fn forces_zero_beyond_cutoff() {
        let p = PairPotential::fe_default();
        let sys = two_atoms(p.r_cut + 1e-6);
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (f, e) = compute_forces(&sys, &p, &nl).unwrap();
        assert_eq!(f[0], [0.0; 3]);
        assert_eq!(f[1], [0.0; 3]);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn forces_zero_at_equilibrium() {
        let p = PairPotential::fe_default();
        let sys = two_atoms(p.equilibrium_spacing());
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (f, _) = compute_forces(&sys, &p, &nl).unwrap();
        assert_abs_diff_eq!(f[0][0], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn force_matches_central_difference() {
        let p = PairPotential::fe_default();
        let r = 0.9 * p.equilibrium_spacing();
        let sys = two_atoms(r);
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (f, _) = compute_forces(&sys, &p, &nl).unwrap();
        let h = 1e-6;
        let fd = -(p.energy(r + h, Species::Fe, Species::Fe)
            - p.energy(r - h, Species::Fe, Species::Fe))
            / (2.0 * h);
        // force on atom 1 along +x equals −dU/dr
        assert_abs_diff_eq!(f[1][0], fd, epsilon = 1e-6 * fd.abs());
        // Newton's third law
        assert_abs_diff_eq!(f[0][0] + f[1][0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn overlap_detected() {
        let p = PairPotential::fe_default();
        let sys = two_atoms(0.2);
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        assert!(matches!(
            compute_forces(&sys, &p, &nl),
            Err(MdError::Overlap(..))
        ));
    }

    #[test]
    fn zero_state_unchanged() {
        let p = PairPotential::fe_default();
        let mut sys = two_atoms(p.equilibrium_spacing());
        let mut nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (mut f, _) = compute_forces(&sys, &p, &nl).unwrap();
        let before = sys.positions.clone();
        step_velocity_verlet(&mut sys, &p, 0.001, &mut nl, &mut f).unwrap();
        for (a, b) in before.iter().zip(&sys.positions) {
            for k in 0..3 {
                assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ballistic_free_atom() {
        let p = PairPotential::fe_default();
        let mut sys = two_atoms(30.0); // far apart, non-interacting
        sys.velocities[0] = [1.0, 0.0, 0.0];
        let mut nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (mut f, _) = compute_forces(&sys, &p, &nl).unwrap();
        let x0 = sys.positions[0][0];
        for _ in 0..100 {
            step_velocity_verlet(&mut sys, &p, 0.001, &mut nl, &mut f).unwrap();
        }
        assert_abs_diff_eq!(sys.positions[0][0], x0 + 0.1, epsilon = 1e-12);
    }

    #[test]
    fn two_atom_oscillator_conserves_energy() {
        let p = PairPotential::fe_default();
        let mut sys = two_atoms(0.97 * p.equilibrium_spacing());
        let mut nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let (mut f, _) = compute_forces(&sys, &p, &nl).unwrap();
        let e0 = total_energy(&sys, &p, &nl).unwrap();
        for _ in 0..10_000 {
            step_velocity_verlet(&mut sys, &p, 0.001, &mut nl, &mut f).unwrap();
        }
        let e1 = total_energy(&sys, &p, &nl).unwrap();
        assert!(
            ((e1 - e0) / e0.abs()).abs() < 1e-4,
            "energy drift {:.3e}",
            (e1 - e0) / e0.abs()
        );
    }

    #[test]
    fn relax_perturbed_dimer() {
        let p = PairPotential::fe_default();
        let mut sys = two_atoms(1.05 * p.equilibrium_spacing());
        let mut nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let params = RelaxParams {
            tolerance: 1e-6,
            ..Default::default()
        };
        relax(&mut sys, &p, &mut nl, params).unwrap();
        let (f, _) = compute_forces(&sys, &p, &nl).unwrap();
        assert!(max_mobile_force(&sys, &f) <= 1e-6);
    }
}
