//! Element classification against the crack and enriched DOF numbering.
//!
//! Nodes whose support is fully crossed carry a jump (Heaviside) pair;
//! the nodes of the tip element carry the four branch-function pairs.
//! All DOFs are numbered node-major so the stiffness stays banded.

use super::crack::Crack;
use super::mesh::Mesh;
use super::XfemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementStatus {
    /// No enriched node.
    Standard,
    /// Fully crossed by the crack.
    Cut,
    /// Contains the crack tip.
    Tip,
    /// Touches enriched nodes without being cut.
    Blending,
}

#[derive(Debug, Clone)]
pub struct Enrichment {
    pub status: Vec<ElementStatus>,
    /// First of the node's two standard DOFs.
    pub std_dof: Vec<usize>,
    /// First of the node's two jump DOFs, if jump-enriched.
    pub h_dof: Vec<Option<usize>>,
    /// First of the node's eight branch DOFs, if tip-enriched.
    pub tip_dof: Vec<Option<usize>>,
    pub n_dofs: usize,
    pub tip_elem: usize,
}

/// Length of `a`..`b` clipped to the rectangle (Liang-Barsky).
fn clipped_length(a: [f64; 2], b: [f64; 2], rect: (f64, f64, f64, f64)) -> f64 {
    let (x0, y0, x1, y1) = rect;
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d[0], a[0] - x0),
        (d[0], x1 - a[0]),
        (-d[1], a[1] - y0),
        (d[1], y1 - a[1]),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 >= t1 {
        return 0.0;
    }
    (t1 - t0) * (d[0] * d[0] + d[1] * d[1]).sqrt()
}

pub fn classify(mesh: &Mesh, crack: &Crack) -> Result<Enrichment, XfemError> {
    let tip = crack.tip();
    let tangent = crack.tip_tangent();
    // nudge past any mesh line the tip sits on exactly
    let eps = 1e-6 * mesh.dx.min(mesh.dy);
    let tip_elem = mesh
        .elem_containing([tip[0] + eps * tangent[0], tip[1] + eps * tangent[1]])
        .or_else(|| mesh.elem_containing(tip))
        .ok_or_else(|| XfemError::CrackEscaped(format!("tip at {tip:?}")))?;
    if mesh.elem_containing(crack.points[0]).is_none() {
        return Err(XfemError::CrackEscaped(format!(
            "mouth at {:?}",
            crack.points[0]
        )));
    }

    let tol = 1e-9 * (mesh.dx + mesh.dy);
    let mut status = vec![ElementStatus::Standard; mesh.n_elems()];
    for e in 0..mesh.n_elems() {
        if e == tip_elem {
            status[e] = ElementStatus::Tip;
            continue;
        }
        let rect = mesh.elem_bounds(e);
        let crossed: f64 = crack
            .points
            .windows(2)
            .map(|w| clipped_length(w[0], w[1], rect))
            .sum();
        if crossed > tol {
            status[e] = ElementStatus::Cut;
        }
    }

    // tip nodes first; they pre-empt jump enrichment
    let mut tip_node = vec![false; mesh.n_nodes()];
    for n in mesh.elem_nodes(tip_elem) {
        tip_node[n] = true;
    }

    // candidate jump nodes: support touches a cut element
    let mut h_node = vec![false; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        if status[e] == ElementStatus::Cut {
            for n in mesh.elem_nodes(e) {
                if !tip_node[n] {
                    h_node[n] = true;
                }
            }
        }
    }
    // sliver guard: the support must actually see both sides of the crack
    for n in 0..mesh.n_nodes() {
        if h_node[n] && !support_sees_both_sides(mesh, crack, n) {
            h_node[n] = false;
        }
    }

    // blending status for quadrature selection
    for e in 0..mesh.n_elems() {
        if status[e] == ElementStatus::Standard
            && mesh
                .elem_nodes(e)
                .iter()
                .any(|&n| tip_node[n] || h_node[n])
        {
            status[e] = ElementStatus::Blending;
        }
    }

    let mut std_dof = vec![0usize; mesh.n_nodes()];
    let mut h_dof = vec![None; mesh.n_nodes()];
    let mut tip_dof = vec![None; mesh.n_nodes()];
    let mut next = 0;
    for n in 0..mesh.n_nodes() {
        std_dof[n] = next;
        next += 2;
        if h_node[n] {
            h_dof[n] = Some(next);
            next += 2;
        }
        if tip_node[n] {
            tip_dof[n] = Some(next);
            next += 8;
        }
    }
    Ok(Enrichment {
        status,
        std_dof,
        h_dof,
        tip_dof,
        n_dofs: next,
        tip_elem,
    })
}

fn support_sees_both_sides(mesh: &Mesh, crack: &Crack, node: usize) -> bool {
    let i = node % (mesh.nx + 1);
    let j = node / (mesh.nx + 1);
    let mut pos = 0usize;
    let mut neg = 0usize;
    for dj in 0..2usize {
        for di in 0..2usize {
            if i + di < 1 || j + dj < 1 || i + di > mesh.nx || j + dj > mesh.ny {
                continue;
            }
            let e = (j + dj - 1) * mesh.nx + (i + di - 1);
            let rect = mesh.elem_bounds(e);
            for sy in 0..3 {
                for sx in 0..3 {
                    let p = [
                        rect.0 + (sx as f64 + 0.5) / 3.0 * (rect.2 - rect.0),
                        rect.1 + (sy as f64 + 0.5) / 3.0 * (rect.3 - rect.1),
                    ];
                    if crack.heaviside(p) > 0.0 {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
        }
    }
    pos > 0 && neg > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_crack_classification() {
        let mesh = Mesh::rectangle(10.0, 11.0, 1.0).unwrap();
        // midline of row 5 is y = 5.5; crack to x = 4.5
        let crack = Crack::edge(4.5, 5.5);
        let enr = classify(&mesh, &crack).unwrap();
        // tip element is column 4 of row 5
        assert_eq!(enr.tip_elem, 5 * 10 + 4);
        assert_eq!(enr.status[5 * 10 + 4], ElementStatus::Tip);
        for col in 0..4 {
            assert_eq!(enr.status[5 * 10 + col], ElementStatus::Cut);
        }
        assert_eq!(enr.status[5 * 10 + 6], ElementStatus::Standard);
        assert_eq!(enr.status[0], ElementStatus::Standard);
        // a node well behind the tip on the crack row is jump-enriched
        let n = mesh.node_id(1, 5);
        assert!(enr.h_dof[n].is_some());
        // tip element corners carry branch DOFs, not jump DOFs
        for n in mesh.elem_nodes(enr.tip_elem) {
            assert!(enr.tip_dof[n].is_some());
            assert!(enr.h_dof[n].is_none());
        }
        // far-field node has only the standard pair
        assert!(enr.h_dof[mesh.node_id(9, 0)].is_none());
        assert!(enr.tip_dof[mesh.node_id(9, 0)].is_none());
    }

    #[test]
    fn dof_count_consistent() {
        let mesh = Mesh::rectangle(10.0, 11.0, 1.0).unwrap();
        let crack = Crack::edge(4.5, 5.5);
        let enr = classify(&mesh, &crack).unwrap();
        let n_h = enr.h_dof.iter().filter(|d| d.is_some()).count();
        let n_t = enr.tip_dof.iter().filter(|d| d.is_some()).count();
        assert_eq!(enr.n_dofs, 2 * mesh.n_nodes() + 2 * n_h + 8 * n_t);
        assert_eq!(n_t, 4);
        assert!(n_h >= 8);
    }

    #[test]
    fn tip_on_mesh_line_resolves_forward() {
        let mesh = Mesh::rectangle(10.0, 11.0, 1.0).unwrap();
        let crack = Crack::edge(4.0, 5.5);
        let enr = classify(&mesh, &crack).unwrap();
        // tip exactly on x = 4 goes to the element ahead
        assert_eq!(enr.tip_elem, 5 * 10 + 4);
        assert_eq!(enr.status[5 * 10 + 3], ElementStatus::Cut);
    }

    #[test]
    fn escaped_crack_rejected() {
        let mesh = Mesh::rectangle(10.0, 11.0, 1.0).unwrap();
        let crack = Crack::edge(15.0, 5.5);
        assert!(classify(&mesh, &crack).is_err());
    }

    #[test]
    fn clip_length_cases() {
        let rect = (0.0, 0.0, 1.0, 1.0);
        assert!((clipped_length([-1.0, 0.5], [2.0, 0.5], rect) - 1.0).abs() < 1e-12);
        assert_eq!(clipped_length([2.0, 2.0], [3.0, 3.0], rect), 0.0);
        assert!((clipped_length([0.25, 0.5], [0.75, 0.5], rect) - 0.5).abs() < 1e-12);
    }
}
