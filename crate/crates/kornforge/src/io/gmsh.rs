use std::collections::HashMap;
use std::io::{BufRead, Write};

use kornforge_core::mesh::Mesh;

use super::{build_mesh, Lines};
use crate::error::AppResult;

const GMSH_TET4: u32 = 4;

/// ASCII Gmsh 2.2 with `$Nodes` and `$Elements` sections. Only 4-node tets
/// (element type 4) are accepted; other sections are skipped.
pub fn read_gmsh(reader: impl BufRead, name: &str) -> AppResult<Mesh> {
    let mut lines = Lines::new(reader, name);
    let mut version_seen = false;
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut tets: Vec<[usize; 4]> = Vec::new();
    let mut have_nodes = false;
    let mut have_elements = false;
    while let Some(line) = lines.next_line()? {
        match line.as_str() {
            "$MeshFormat" => {
                let f = lines.expect_line("format line")?;
                let toks: Vec<&str> = f.split_whitespace().collect();
                if toks.len() != 3 || !toks[0].starts_with("2.2") {
                    return Err(lines.error(format!("unsupported format '{f}', expected '2.2 0 8'")));
                }
                if toks[1] != "0" {
                    return Err(lines.error("binary Gmsh files are not supported"));
                }
                end(&mut lines, "$EndMeshFormat")?;
                version_seen = true;
            }
            "$Nodes" => {
                if !version_seen {
                    return Err(lines.error("$Nodes before $MeshFormat"));
                }
                let [n] = lines.fields::<usize, 1>("node count")?;
                for _ in 0..n {
                    let l = lines.expect_line("node")?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    if toks.len() != 4 {
                        return Err(lines.error(format!("expected node id and 3 coordinates, found '{l}'")));
                    }
                    let id: u64 = toks[0].parse().map_err(|_| lines.error(format!("invalid node id '{}'", toks[0])))?;
                    let [x, y, z] = lines.parse_fields::<f64, 3>(&toks[1..].join(" "), "node coordinates")?;
                    if ids.insert(id, vertices.len()).is_some() {
                        return Err(lines.error(format!("duplicate node id {id}")));
                    }
                    vertices.push([x, y, z]);
                }
                end(&mut lines, "$EndNodes")?;
                have_nodes = true;
            }
            "$Elements" => {
                let [n] = lines.fields::<usize, 1>("element count")?;
                for _ in 0..n {
                    let l = lines.expect_line("element")?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    let num = |i: usize| -> AppResult<u64> {
                        toks.get(i)
                            .and_then(|t| t.parse::<u64>().ok())
                            .ok_or_else(|| lines.error(format!("malformed element line '{l}'")))
                    };
                    let ty = num(1)?;
                    if ty != GMSH_TET4 as u64 {
                        return Err(lines.error(format!("element type {ty} is not supported (only 4-node tets, type 4)")));
                    }
                    let ntags = num(2)? as usize;
                    if toks.len() != 3 + ntags + 4 {
                        return Err(lines.error(format!("tet element needs 4 nodes after {ntags} tags")));
                    }
                    let mut t = [0usize; 4];
                    for (k, slot) in t.iter_mut().enumerate() {
                        let id = num(3 + ntags + k)?;
                        *slot = *ids.get(&id).ok_or_else(|| lines.error(format!("unknown node id {id}")))?;
                    }
                    tets.push(t);
                }
                end(&mut lines, "$EndElements")?;
                have_elements = true;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                let close = format!("$End{}", &other[1..]);
                while lines.expect_line(&close)? != close {}
            }
            other => return Err(lines.error(format!("unexpected line '{other}'"))),
        }
    }
    if !have_nodes || !have_elements {
        return Err(lines.error("missing $Nodes or $Elements section"));
    }
    build_mesh(vertices, tets).map_err(|e| lines.error(e.to_string()))
}

fn end<R: BufRead>(lines: &mut Lines<R>, tag: &str) -> AppResult<()> {
    let l = lines.expect_line(tag)?;
    if l != tag {
        return Err(lines.error(format!("expected {tag}, found '{l}'")));
    }
    Ok(())
}

pub fn write_gmsh(mesh: &Mesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.num_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{} {:?} {:?} {:?}", i + 1, v[0], v[1], v[2])?;
    }
    writeln!(w, "$EndNodes\n$Elements\n{}", mesh.num_tets())?;
    for (i, t) in mesh.tets().iter().enumerate() {
        writeln!(w, "{} {GMSH_TET4} 2 0 0 {} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1)?;
    }
    writeln!(w, "$EndElements")
}
