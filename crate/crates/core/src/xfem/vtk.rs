//! Legacy ASCII VTK output of a solved plate: displaced mesh, nodal
//! displacement vectors, element stress and enrichment status.

use std::io::Write;
use std::path::Path;

use super::assemble::Solution;
use super::enrich::ElementStatus;
use super::XfemError;

pub fn write_vtk(sol: &Solution, path: &Path) -> Result<(), XfemError> {
    let mesh = &sol.mesh;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "cracked plate solution")?;
    writeln!(f, "ASCII")?;
    writeln!(f, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(f, "POINTS {} double", mesh.n_nodes())?;
    for n in 0..mesh.n_nodes() {
        let p = mesh.node_coord(n);
        writeln!(f, "{:.9e} {:.9e} 0", p[0], p[1])?;
    }
    writeln!(f, "CELLS {} {}", mesh.n_elems(), 5 * mesh.n_elems())?;
    for e in 0..mesh.n_elems() {
        let n = mesh.elem_nodes(e);
        writeln!(f, "4 {} {} {} {}", n[0], n[1], n[2], n[3])?;
    }
    writeln!(f, "CELL_TYPES {}", mesh.n_elems())?;
    for _ in 0..mesh.n_elems() {
        writeln!(f, "9")?;
    }

    writeln!(f, "POINT_DATA {}", mesh.n_nodes())?;
    writeln!(f, "VECTORS displacement double")?;
    for n in 0..mesh.n_nodes() {
        let d = sol.enrich.std_dof[n];
        writeln!(f, "{:.9e} {:.9e} 0", sol.u[d], sol.u[d + 1])?;
    }

    writeln!(f, "CELL_DATA {}", mesh.n_elems())?;
    writeln!(f, "SCALARS von_mises double 1")?;
    writeln!(f, "LOOKUP_TABLE default")?;
    for e in 0..mesh.n_elems() {
        let (_, s) = sol.grad_and_stress(e, 0.0, 0.0);
        let vm =
            (s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]).max(0.0).sqrt();
        writeln!(f, "{vm:.9e}")?;
    }
    writeln!(f, "SCALARS enrichment int 1")?;
    writeln!(f, "LOOKUP_TABLE default")?;
    for e in 0..mesh.n_elems() {
        let code = match sol.enrich.status[e] {
            ElementStatus::Standard => 0,
            ElementStatus::Blending => 1,
            ElementStatus::Cut => 2,
            ElementStatus::Tip => 3,
        };
        writeln!(f, "{code}")?;
    }
    Ok(())
}
