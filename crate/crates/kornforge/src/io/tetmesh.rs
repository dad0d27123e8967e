use std::io::{BufRead, Write};

use kornforge_core::mesh::Mesh;

use super::{build_mesh, Lines};
use crate::error::AppResult;

/// Native format: `tetmesh 1`, `<nv> <nt>`, then vertex coordinates and
/// 0-based vertex indices, one per line.
pub fn read_tetmesh(reader: impl BufRead, name: &str) -> AppResult<Mesh> {
    let mut lines = Lines::new(reader, name);
    let header = lines.expect_line("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["tetmesh", "1"] {
        return Err(lines.error(format!("expected header 'tetmesh 1', found '{header}'")));
    }
    let [nv, nt] = lines.fields::<usize, 2>("vertex and tet counts")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let p = lines.fields::<f64, 3>("vertex coordinates")?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(lines.error("non-finite vertex coordinate"));
        }
        vertices.push(p);
    }
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t = lines.fields::<usize, 4>("tet vertices")?;
        if let Some(&bad) = t.iter().find(|&&v| v >= nv) {
            return Err(lines.error(format!("vertex index {bad} out of range (mesh has {nv} vertices)")));
        }
        tets.push(t);
    }
    lines.finish()?;
    build_mesh(vertices, tets).map_err(|e| lines.error(e.to_string()))
}

pub fn write_tetmesh(mesh: &Mesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "tetmesh 1")?;
    writeln!(w, "{} {}", mesh.num_vertices(), mesh.num_tets())?;
    for v in mesh.vertices() {
        writeln!(w, "{:?} {:?} {:?}", v[0], v[1], v[2])?;
    }
    for t in mesh.tets() {
        writeln!(w, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    Ok(())
}
