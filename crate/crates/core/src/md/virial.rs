//! Per-atom virial stress and von Mises equivalent stress.

use super::{AtomSystem, MdError, NeighborList, PairPotential};

/// Per-atom stress state. Components are ordered
/// (σ_xx, σ_yy, σ_zz, τ_xy, τ_yz, τ_zx) in eV/Å³.
#[derive(Debug, Clone)]
pub struct VirialStressField {
    pub per_atom: Vec<[f64; 6]>,
    pub von_mises: Vec<f64>,
    /// Atomic volume used for the 1/V scaling, Å³.
    pub atomic_volume: f64,
}

/// Von Mises equivalent of a stress tensor in component order
/// (xx, yy, zz, xy, yz, zx).
pub fn von_mises(s: &[f64; 6]) -> f64 {
    let d1 = s[0] - s[1];
    let d2 = s[1] - s[2];
    let d3 = s[2] - s[0];
    (0.5 * (d1 * d1 + d2 * d2 + d3 * d3) + 3.0 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]))
        .sqrt()
}

/// Per-atom virial stress: half the pairwise force moment minus the
/// kinetic dyad, scaled by the atomic volume.
pub fn virial_stress(
    system: &AtomSystem,
    potential: &PairPotential,
    neighbors: &NeighborList,
) -> Result<VirialStressField, MdError> {
    let volume = system.atomic_volume();
    if volume <= 0.0 {
        return Err(MdError::ZeroVolume);
    }
    let inv_v = 1.0 / volume;
    let mut per_atom = vec![[0.0f64; 6]; system.len()];
    for &(i, j) in &neighbors.pairs {
        let (i, j) = (i as usize, j as usize);
        let pi = &system.positions[i];
        let pj = &system.positions[j];
        if let Some(seam) = &system.seam {
            if seam.masks(pi, pj) {
                continue;
            }
        }
        let d = system.sim_box.displacement(pi, pj); // i → j
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if r2 >= potential.r_cut * potential.r_cut {
            continue;
        }
        let r = r2.sqrt();
        let (_, du) = potential.energy_and_derivative(r, system.species[i], system.species[j]);
        // force on i from j: (du/r)·d; the moment (r_j − r_i) ⊗ f is the
        // same for both partners
        let scale = du / r;
        let m = [
            0.5 * d[0] * scale * d[0],
            0.5 * d[1] * scale * d[1],
            0.5 * d[2] * scale * d[2],
            0.5 * d[0] * scale * d[1],
            0.5 * d[1] * scale * d[2],
            0.5 * d[2] * scale * d[0],
        ];
        for k in 0..6 {
            per_atom[i][k] += m[k];
            per_atom[j][k] += m[k];
        }
    }
    for (idx, s) in per_atom.iter_mut().enumerate() {
        let m = system.species[idx].mass_internal();
        let v = &system.velocities[idx];
        s[0] -= m * v[0] * v[0];
        s[1] -= m * v[1] * v[1];
        s[2] -= m * v[2] * v[2];
        s[3] -= m * v[0] * v[1];
        s[4] -= m * v[1] * v[2];
        s[5] -= m * v[2] * v[0];
        for k in 0..6 {
            s[k] *= inv_v;
        }
    }
    let von = per_atom.iter().map(von_mises).collect();
    Ok(VirialStressField {
        per_atom,
        von_mises: von,
        atomic_volume: volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::md::{Group, SimBox, Species};
    use approx::assert_abs_diff_eq;

    fn pair_system(sep: f64) -> AtomSystem {
        AtomSystem {
            positions: vec![[10.0, 10.0, 10.0], [10.0 + sep, 10.0, 10.0]],
            velocities: vec![[0.0; 3]; 2],
            species: vec![Species::Fe; 2],
            group: vec![Group::Mobile; 2],
            sim_box: SimBox {
                lo: [0.0; 3],
                hi: [30.0; 3],
                periodic_z: false,
            },
            lattice_constant: 2.85,
            seam: None,
        }
    }

    #[test]
    fn two_atom_hand_evaluation() {
        let p = PairPotential::fe_default();
        let sep = 0.92 * p.r0;
        let sys = pair_system(sep);
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let field = virial_stress(&sys, &p, &nl).unwrap();
        let (_, du) = p.energy_and_derivative(sep, Species::Fe, Species::Fe);
        // pair force on atom 1 along x is −du; moment term is ½·d·f
        let f = -du;
        let expected = 0.5 * sep * (-f) / sys.atomic_volume();
        assert_abs_diff_eq!(field.per_atom[0][0], expected, epsilon = 1e-10 * expected.abs());
        assert_abs_diff_eq!(field.per_atom[1][0], expected, epsilon = 1e-10 * expected.abs());
        for k in 3..6 {
            assert_abs_diff_eq!(field.per_atom[0][k], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn hydrostatic_von_mises_is_zero() {
        let s = [2.5, 2.5, 2.5, 0.0, 0.0, 0.0];
        assert_abs_diff_eq!(von_mises(&s), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn uniaxial_von_mises() {
        let s = [3.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_abs_diff_eq!(von_mises(&s), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn von_mises_nonnegative() {
        let s = [-1.0, 2.0, 0.3, -0.7, 0.1, 0.9];
        assert!(von_mises(&s) >= 0.0);
    }

    #[test]
    fn tension_gives_positive_sigma_xx() {
        let p = PairPotential::fe_default();
        // stretched pair: attractive restoring force ⇒ tensile virial
        let sys = pair_system(1.08 * p.r0);
        let nl = NeighborList::build(&sys, p.r_cut, 0.5);
        let field = virial_stress(&sys, &p, &nl).unwrap();
        assert!(field.per_atom[0][0] > 0.0);
    }
}
