//! Cell-list neighbor search with a skin distance.
//!
//! Pairs are stored as a half list (i < j by construction order) and the
//! list is rebuilt only when some atom has moved more than half the skin
//! since the last build. Pair order is a deterministic function of the
//! positions, so force accumulation is reproducible.

use super::{AtomSystem, SimBox};

#[derive(Debug, Clone)]
pub struct NeighborList {
    /// Interaction cutoff (without skin).
    pub r_cut: f64,
    pub skin: f64,
    pub pairs: Vec<(u32, u32)>,
    ref_positions: Vec<[f64; 3]>,
}

impl NeighborList {
    pub fn build(system: &AtomSystem, r_cut: f64, skin: f64) -> Self {
        let mut nl = NeighborList {
            r_cut,
            skin,
            pairs: Vec::new(),
            ref_positions: Vec::new(),
        };
        nl.rebuild(system);
        nl
    }

    pub fn rebuild(&mut self, system: &AtomSystem) {
        let reach = self.r_cut + self.skin;
        let reach2 = reach * reach;
        let pos = &system.positions;
        let n = pos.len();
        self.pairs.clear();
        self.ref_positions.clear();
        self.ref_positions.extend_from_slice(pos);
        if n < 2 {
            return;
        }

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in pos {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let mut ncell = [1usize; 3];
        let mut inv_size = [0f64; 3];
        for d in 0..3 {
            let extent = (hi[d] - lo[d]).max(1e-9);
            ncell[d] = ((extent / reach).floor() as usize).max(1);
            // too few periodic z cells would duplicate neighbors; collapse
            if d == 2 && system.sim_box.periodic_z && ncell[2] < 3 {
                ncell[2] = 1;
            }
            inv_size[d] = ncell[d] as f64 / extent;
        }
        let cell_index = |p: &[f64; 3]| -> usize {
            let mut c = [0usize; 3];
            for d in 0..3 {
                c[d] = (((p[d] - lo[d]) * inv_size[d]) as usize).min(ncell[d] - 1);
            }
            (c[2] * ncell[1] + c[1]) * ncell[0] + c[0]
        };
        let mut bins: Vec<Vec<u32>> = vec![Vec::new(); ncell[0] * ncell[1] * ncell[2]];
        for (i, p) in pos.iter().enumerate() {
            bins[cell_index(p)].push(i as u32);
        }

        // forward half-stencil over cells; z wraps when periodic
        let sim_box = &system.sim_box;
        let mut stencil: Vec<(i64, i64, i64)> = Vec::new();
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dz, dy, dx) > (0, 0, 0) || (dz, dy, dx) == (0, 0, 0) {
                        stencil.push((dx, dy, dz));
                    }
                }
            }
        }
        for cz in 0..ncell[2] {
            for cy in 0..ncell[1] {
                for cx in 0..ncell[0] {
                    let here = (cz * ncell[1] + cy) * ncell[0] + cx;
                    for &(dx, dy, dz) in &stencil {
                        let nx = cx as i64 + dx;
                        let ny = cy as i64 + dy;
                        let mut nz = cz as i64 + dz;
                        if nx < 0 || nx >= ncell[0] as i64 || ny < 0 || ny >= ncell[1] as i64 {
                            continue;
                        }
                        let mut wrapped = false;
                        if nz < 0 || nz >= ncell[2] as i64 {
                            if sim_box.periodic_z && ncell[2] >= 3 {
                                nz = (nz + ncell[2] as i64) % ncell[2] as i64;
                                wrapped = true;
                            } else {
                                continue;
                            }
                        }
                        let there = (nz as usize * ncell[1] + ny as usize) * ncell[0] + nx as usize;
                        if there == here && (dx, dy, dz) != (0, 0, 0) && !wrapped {
                            continue;
                        }
                        if (dx, dy, dz) == (0, 0, 0) {
                            let bin = &bins[here];
                            for (a, &i) in bin.iter().enumerate() {
                                for &j in &bin[a + 1..] {
                                    if within(sim_box, &pos[i as usize], &pos[j as usize], reach2) {
                                        self.pairs.push((i, j));
                                    }
                                }
                            }
                        } else if there != here {
                            for &i in &bins[here] {
                                for &j in &bins[there] {
                                    if within(sim_box, &pos[i as usize], &pos[j as usize], reach2) {
                                        self.pairs.push((i.min(j), i.max(j)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// True once some atom has drifted more than skin/2 from the reference.
    pub fn needs_rebuild(&self, system: &AtomSystem) -> bool {
        let lim2 = (self.skin * 0.5) * (self.skin * 0.5);
        system
            .positions
            .iter()
            .zip(&self.ref_positions)
            .any(|(p, r)| {
                let d = system.sim_box.displacement(r, p);
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2] > lim2
            })
    }

    pub fn ensure(&mut self, system: &AtomSystem) {
        if self.ref_positions.len() != system.len() || self.needs_rebuild(system) {
            self.rebuild(system);
        }
    }
}

#[inline]
fn within(sim_box: &SimBox, a: &[f64; 3], b: &[f64; 3], reach2: f64) -> bool {
    let d = sim_box.displacement(a, b);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= reach2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::md::{Group, Species};

    fn toy_system(positions: Vec<[f64; 3]>, periodic_z: bool, lz: f64) -> AtomSystem {
        let n = positions.len();
        AtomSystem {
            positions,
            velocities: vec![[0.0; 3]; n],
            species: vec![Species::Fe; n],
            group: vec![Group::Mobile; n],
            sim_box: SimBox {
                lo: [0.0, 0.0, 0.0],
                hi: [100.0, 100.0, lz],
                periodic_z,
            },
            lattice_constant: 2.85,
            seam: None,
        }
    }

    #[test]
    fn finds_all_pairs_brute_force() {
        // pseudo-random scatter, compare against O(N^2)
        let mut positions = Vec::new();
        let mut state = 0x12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            positions.push([next() * 40.0, next() * 40.0, next() * 8.0]);
        }
        let sys = toy_system(positions, true, 8.0);
        let nl = NeighborList::build(&sys, 4.5, 0.5);
        let mut expected = std::collections::HashSet::new();
        let reach2 = 5.0 * 5.0;
        for i in 0..sys.len() {
            for j in i + 1..sys.len() {
                if within(&sys.sim_box, &sys.positions[i], &sys.positions[j], reach2) {
                    expected.insert((i as u32, j as u32));
                }
            }
        }
        let got: std::collections::HashSet<(u32, u32)> = nl.pairs.iter().copied().collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), nl.pairs.len(), "no duplicate pairs");
    }

    #[test]
    fn skin_defers_rebuild() {
        let sys = toy_system(vec![[10.0, 10.0, 4.0], [13.0, 10.0, 4.0]], false, 8.0);
        let nl = NeighborList::build(&sys, 4.5, 1.0);
        let mut moved = sys.clone();
        moved.positions[0][0] += 0.4; // under skin/2
        assert!(!nl.needs_rebuild(&moved));
        moved.positions[0][0] += 0.2; // over skin/2
        assert!(nl.needs_rebuild(&moved));
    }
}
