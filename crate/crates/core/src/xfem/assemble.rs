//! Stiffness assembly and the plate boundary-value problem.
//!
//! The plate is loaded by uniform vertical traction on the top and
//! bottom edges; rigid-body modes are pinned at the right edge, far from
//! the crack, so the handbook single-edge-notch correction applies.

use super::crack::{Crack, TipFrame};
use super::enrich::{classify, ElementStatus, Enrichment};
use super::mesh::Mesh;
use super::solve::BandedSpd;
use super::{Material, XfemError};

#[derive(Debug, Clone)]
pub struct PlateProblem {
    pub mesh: Mesh,
    pub crack: Crack,
    pub material: Material,
    /// Remote tension, MPa.
    pub sigma_mpa: f64,
}

/// A single interpolation channel: one scalar shape function carrying a
/// (u, v) DOF pair starting at `dof`.
pub struct Channel {
    pub dof: usize,
    pub phi: f64,
    pub grad: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub enrich: Enrichment,
    pub mesh: Mesh,
    pub crack: Crack,
    pub material: Material,
    pub sigma_mpa: f64,
}

const GP: f64 = 0.577_350_269_189_625_8; // 1/√3

/// Parent-space quadrature: an s×s subgrid with 2×2 Gauss per cell.
/// Weights sum to 4.
pub fn quad_rule(subdiv: usize) -> Vec<(f64, f64, f64)> {
    let s = subdiv.max(1);
    let hs = 1.0 / s as f64;
    let w = hs * hs;
    let mut pts = Vec::with_capacity(4 * s * s);
    for j in 0..s {
        for i in 0..s {
            let cx = -1.0 + (2 * i + 1) as f64 * hs;
            let cy = -1.0 + (2 * j + 1) as f64 * hs;
            for &gy in &[-GP, GP] {
                for &gx in &[-GP, GP] {
                    pts.push((cx + gx * hs, cy + gy * hs, w));
                }
            }
        }
    }
    pts
}

pub fn subdivision_for(status: ElementStatus) -> usize {
    match status {
        ElementStatus::Standard => 1,
        ElementStatus::Blending => 3,
        ElementStatus::Cut => 4,
        ElementStatus::Tip => 8,
    }
}

/// Evaluate all interpolation channels of element `e` at parent point
/// (ξ, η).
pub fn channels(
    mesh: &Mesh,
    crack: &Crack,
    enr: &Enrichment,
    frame: &TipFrame,
    e: usize,
    xi: f64,
    eta: f64,
) -> Vec<Channel> {
    let nodes = mesh.elem_nodes(e);
    let (n, dn) = Mesh::shape(xi, eta);
    let (jx, jy) = (2.0 / mesh.dx, 2.0 / mesh.dy);
    let x = mesh.to_physical(e, xi, eta);

    let any_h = nodes.iter().any(|&nd| enr.h_dof[nd].is_some());
    let any_t = nodes.iter().any(|&nd| enr.tip_dof[nd].is_some());
    let h_here = if any_h { crack.heaviside(x) } else { 0.0 };
    let (f_here, g_here) = if any_t {
        let (r, th) = frame.polar(x);
        (TipFrame::branch(r, th), frame.branch_grad(x))
    } else {
        ([0.0; 4], [[0.0; 2]; 4])
    };

    let mut out = Vec::with_capacity(8);
    for a in 0..4 {
        let nd = nodes[a];
        let g = [dn[a][0] * jx, dn[a][1] * jy];
        out.push(Channel {
            dof: enr.std_dof[nd],
            phi: n[a],
            grad: g,
        });
        if let Some(dof) = enr.h_dof[nd] {
            let shift = h_here - crack.heaviside(mesh.node_coord(nd));
            out.push(Channel {
                dof,
                phi: n[a] * shift,
                grad: [g[0] * shift, g[1] * shift],
            });
        }
        if let Some(dof) = enr.tip_dof[nd] {
            let pc = mesh.node_coord(nd);
            let (rn, thn) = frame.polar([pc[0], pc[1]]);
            let f_node = TipFrame::branch(rn, thn);
            for k in 0..4 {
                let shift = f_here[k] - f_node[k];
                out.push(Channel {
                    dof: dof + 2 * k,
                    phi: n[a] * shift,
                    grad: [
                        g[0] * shift + n[a] * g_here[k][0],
                        g[1] * shift + n[a] * g_here[k][1],
                    ],
                });
            }
        }
    }
    out
}

fn element_dof_span(mesh: &Mesh, enr: &Enrichment, e: usize) -> (usize, usize) {
    let mut lo = usize::MAX;
    let mut hi = 0;
    for nd in mesh.elem_nodes(e) {
        let mut last = enr.std_dof[nd] + 1;
        if let Some(d) = enr.h_dof[nd] {
            last = last.max(d + 1);
        }
        if let Some(d) = enr.tip_dof[nd] {
            last = last.max(d + 7);
        }
        lo = lo.min(enr.std_dof[nd]);
        hi = hi.max(last);
    }
    (lo, hi)
}

pub fn solve_plate(problem: &PlateProblem) -> Result<Solution, XfemError> {
    problem.material.validate()?;
    let mesh = &problem.mesh;
    let crack = &problem.crack;
    let enr = classify(mesh, crack)?;
    let frame = crack.tip_frame();
    let d = problem.material.d_matrix();

    let mut bw = 0;
    for e in 0..mesh.n_elems() {
        let (lo, hi) = element_dof_span(mesh, &enr, e);
        bw = bw.max(hi - lo);
    }
    let mut k = BandedSpd::new(enr.n_dofs, bw);
    let det_j = 0.25 * mesh.dx * mesh.dy;

    for e in 0..mesh.n_elems() {
        let rule = quad_rule(subdivision_for(enr.status[e]));
        for (xi, eta, w) in rule {
            let ch = channels(mesh, crack, &enr, &frame, e, xi, eta);
            let wj = w * det_j;
            for a in 0..ch.len() {
                let ga = ch[a].grad;
                for b in 0..ch.len() {
                    let gb = ch[b].grad;
                    let blk = [
                        [
                            d[0][0] * ga[0] * gb[0] + d[2][2] * ga[1] * gb[1],
                            d[0][1] * ga[0] * gb[1] + d[2][2] * ga[1] * gb[0],
                        ],
                        [
                            d[0][1] * ga[1] * gb[0] + d[2][2] * ga[0] * gb[1],
                            d[1][1] * ga[1] * gb[1] + d[2][2] * ga[0] * gb[0],
                        ],
                    ];
                    for r in 0..2 {
                        for c in 0..2 {
                            let i = ch[a].dof + r;
                            let j = ch[b].dof + c;
                            if i >= j {
                                k.add(i, j, blk[r][c] * wj);
                            }
                        }
                    }
                }
            }
        }
    }

    // consistent nodal forces for uniform traction on the top and bottom
    let mut rhs = vec![0.0; enr.n_dofs];
    let f_edge = 0.5 * problem.sigma_mpa * mesh.dx;
    for i in 0..mesh.nx {
        for (j, sign) in [(mesh.ny, 1.0), (0, -1.0)] {
            for nd in [mesh.node_id(i, j), mesh.node_id(i + 1, j)] {
                rhs[enr.std_dof[nd] + 1] += sign * f_edge;
            }
        }
    }

    // pin rigid-body modes at the right edge: full pin bottom-right,
    // horizontal pin top-right
    let penalty = 1e10 * k.max_diag();
    let pin_a = mesh.node_id(mesh.nx, 0);
    let pin_b = mesh.node_id(mesh.nx, mesh.ny);
    for dof in [
        enr.std_dof[pin_a],
        enr.std_dof[pin_a] + 1,
        enr.std_dof[pin_b],
    ] {
        k.diag_add(dof, penalty);
        rhs[dof] = 0.0;
    }

    k.cholesky()?;
    let u = k.solve(&rhs);
    Ok(Solution {
        u,
        enrich: enr,
        mesh: mesh.clone(),
        crack: crack.clone(),
        material: problem.material,
        sigma_mpa: problem.sigma_mpa,
    })
}

impl Solution {
    /// Total displacement (including enrichment) at a parent point.
    pub fn displacement(&self, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        let frame = self.crack.tip_frame();
        let ch = channels(&self.mesh, &self.crack, &self.enrich, &frame, e, xi, eta);
        let mut out = [0.0; 2];
        for c in &ch {
            out[0] += c.phi * self.u[c.dof];
            out[1] += c.phi * self.u[c.dof + 1];
        }
        out
    }

    /// Displacement gradient [∂u_i/∂x_j] and stress (σxx, σyy, τxy) at a
    /// parent point.
    pub fn grad_and_stress(&self, e: usize, xi: f64, eta: f64) -> ([[f64; 2]; 2], [f64; 3]) {
        let frame = self.crack.tip_frame();
        let ch = channels(&self.mesh, &self.crack, &self.enrich, &frame, e, xi, eta);
        let mut g = [[0.0; 2]; 2];
        for c in &ch {
            g[0][0] += c.grad[0] * self.u[c.dof];
            g[0][1] += c.grad[1] * self.u[c.dof];
            g[1][0] += c.grad[0] * self.u[c.dof + 1];
            g[1][1] += c.grad[1] * self.u[c.dof + 1];
        }
        let eps = [g[0][0], g[1][1], g[0][1] + g[1][0]];
        let d = self.material.d_matrix();
        let mut s = [0.0; 3];
        for r in 0..3 {
            for c in 0..3 {
                s[r] += d[r][c] * eps[c];
            }
        }
        (g, s)
    }
}
