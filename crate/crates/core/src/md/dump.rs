//! Snapshot IO: extended-XYZ output and a reader for LAMMPS-style text
//! dump files (columns id, type, x, y, z), so the extraction stages can
//! run on external MD output.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{AtomSystem, MdError};

/// Write an extended XYZ snapshot: species, position and one per-atom
/// scalar (the von Mises stress, by convention).
pub fn write_xyz_extended(
    path: &Path,
    system: &AtomSystem,
    per_atom: &[f64],
) -> Result<(), MdError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", system.len())?;
    let b = &system.sim_box;
    writeln!(
        f,
        "Lattice=\"{:.6} 0 0 0 {:.6} 0 0 0 {:.6}\" Properties=species:S:1:pos:R:3:vonmises:R:1",
        b.length(0),
        b.length(1),
        b.length(2)
    )?;
    for i in 0..system.len() {
        let p = &system.positions[i];
        writeln!(
            f,
            "{} {:.8} {:.8} {:.8} {:.8e}",
            system.species[i].symbol(),
            p[0],
            p[1],
            p[2],
            per_atom.get(i).copied().unwrap_or(0.0)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct DumpAtom {
    pub id: u64,
    pub atom_type: u32,
    pub position: [f64; 3],
}

/// Read the first frame of a LAMMPS text dump. Only `id type x y z`
/// (in any column order declared on the ITEM: ATOMS line) is consumed.
pub fn read_lammps_dump(path: &Path) -> Result<(Vec<DumpAtom>, [[f64; 2]; 3]), MdError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let mut natoms: Option<usize> = None;
    let mut bounds = [[0.0f64; 2]; 3];
    let mut atoms = Vec::new();
    while let Some(line) = lines.next() {
        let line = line?;
        if line.starts_with("ITEM: NUMBER OF ATOMS") {
            let count_line = lines
                .next()
                .ok_or_else(|| MdError::MalformedDump("missing atom count".into()))??;
            natoms = Some(
                count_line
                    .trim()
                    .parse()
                    .map_err(|_| MdError::MalformedDump("bad atom count".into()))?,
            );
        } else if line.starts_with("ITEM: BOX BOUNDS") {
            for b in bounds.iter_mut() {
                let bl = lines
                    .next()
                    .ok_or_else(|| MdError::MalformedDump("missing box bounds".into()))??;
                let vals: Vec<f64> = bl
                    .split_whitespace()
                    .take(2)
                    .map(|v| v.parse().unwrap_or(0.0))
                    .collect();
                if vals.len() < 2 {
                    return Err(MdError::MalformedDump("short bounds line".into()));
                }
                *b = [vals[0], vals[1]];
            }
        } else if line.starts_with("ITEM: ATOMS") {
            let cols: Vec<&str> = line["ITEM: ATOMS".len()..].split_whitespace().collect();
            let find = |name: &str| {
                cols.iter()
                    .position(|c| *c == name)
                    .ok_or_else(|| MdError::MalformedDump(format!("missing column {name}")))
            };
            let (ci, ct, cx, cy, cz) =
                (find("id")?, find("type")?, find("x")?, find("y")?, find("z")?);
            let n = natoms.ok_or_else(|| MdError::MalformedDump("atoms before count".into()))?;
            for _ in 0..n {
                let al = lines
                    .next()
                    .ok_or_else(|| MdError::MalformedDump("truncated atom block".into()))??;
                let fields: Vec<&str> = al.split_whitespace().collect();
                let get = |idx: usize| -> Result<f64, MdError> {
                    fields
                        .get(idx)
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| MdError::MalformedDump(format!("bad field {idx}")))
                };
                atoms.push(DumpAtom {
                    id: get(ci)? as u64,
                    atom_type: get(ct)? as u32,
                    position: [get(cx)?, get(cy)?, get(cz)?],
                });
            }
            break;
        }
    }
    if atoms.is_empty() {
        return Err(MdError::MalformedDump("no ATOMS section found".into()));
    }
    Ok((atoms, bounds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lammps_dump_round() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.dump");
        std::fs::write(
            &path,
            "ITEM: TIMESTEP\n0\nITEM: NUMBER OF ATOMS\n2\nITEM: BOX BOUNDS pp pp pp\n0 10\n0 20\n0 5\nITEM: ATOMS id type x y z\n1 1 1.5 2.5 0.5\n2 2 3.0 4.0 1.0\n",
        )
        .unwrap();
        let (atoms, bounds) = read_lammps_dump(&path).unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[1].atom_type, 2);
        assert_eq!(atoms[0].position, [1.5, 2.5, 0.5]);
        assert_eq!(bounds[1], [0.0, 20.0]);
    }

    #[test]
    fn dump_reader_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.dump");
        std::fs::write(&path, "not a dump\n").unwrap();
        assert!(read_lammps_dump(&path).is_err());
    }
}
