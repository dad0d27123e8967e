//! Text formats: meshes (`tetmesh 1` and ASCII Gmsh 2.2), fields, CK
//! parameter sets and exported symmetric matrices.
//!
//! Floats are written with the shortest representation that reads back to
//! the same value, so every writer/reader pair round-trips exactly.

mod field;
mod gmsh;
mod tetmesh;

pub use field::{read_ck, read_field, write_ck, write_field, write_symmat, read_symmat, SymMat};
pub use gmsh::{read_gmsh, write_gmsh};
pub use tetmesh::{read_tetmesh, write_tetmesh};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use kornforge_core::mesh::Mesh;

use crate::error::{AppError, AppResult};

/// Non-blank lines with their 1-based line numbers.
pub(crate) struct Lines<R> {
    name: String,
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    pub(crate) fn new(reader: R, name: &str) -> Self {
        Self { name: name.to_string(), inner: reader.lines(), line: 0 }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> AppError {
        AppError::parse(&self.name, self.line, message)
    }

    /// The next non-blank line, trimmed.
    pub(crate) fn next_line(&mut self) -> AppResult<Option<String>> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Ok(None),
                Some(Err(e)) => return Err(self.error(format!("read failed: {e}"))),
                Some(Ok(l)) if l.trim().is_empty() => continue,
                Some(Ok(l)) => return Ok(Some(l.trim().to_string())),
            }
        }
    }

    pub(crate) fn expect_line(&mut self, what: &str) -> AppResult<String> {
        self.next_line()?.ok_or_else(|| self.error(format!("unexpected end of input, expected {what}")))
    }

    /// Parses exactly `N` whitespace-separated fields.
    pub(crate) fn fields<T: std::str::FromStr, const N: usize>(&mut self, what: &str) -> AppResult<[T; N]> {
        let line = self.expect_line(what)?;
        self.parse_fields(&line, what)
    }

    pub(crate) fn parse_fields<T: std::str::FromStr, const N: usize>(&self, line: &str, what: &str) -> AppResult<[T; N]> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != N {
            return Err(self.error(format!("expected {N} values for {what}, found {}", toks.len())));
        }
        let mut out = Vec::with_capacity(N);
        for t in toks {
            out.push(t.parse::<T>().map_err(|_| self.error(format!("invalid number '{t}' in {what}")))?);
        }
        Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
    }

    /// Errors if anything but blank lines remains.
    pub(crate) fn finish(&mut self) -> AppResult<()> {
        match self.next_line()? {
            None => Ok(()),
            Some(l) => Err(self.error(format!("trailing content '{l}'"))),
        }
    }
}

pub(crate) fn open(path: &Path) -> AppResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| AppError::io(path, e))
}

/// Writes through a buffered file, attaching the path to any failure.
pub fn create(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

/// Mesh formats understood by [`read_mesh`] and [`write_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Tetmesh,
    Gmsh,
}

impl MeshFormat {
    /// By extension: `.msh` is Gmsh, anything else the native format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => MeshFormat::Gmsh,
            _ => MeshFormat::Tetmesh,
        }
    }
}

/// Reads a mesh, detecting the format from the first line.
pub fn read_mesh(path: &Path) -> AppResult<Mesh> {
    let name = path.display().to_string();
    let mut first = String::new();
    open(path)?.read_line(&mut first).map_err(|e| AppError::io(path, e))?;
    if first.trim_start().starts_with("$MeshFormat") {
        read_gmsh(open(path)?, &name)
    } else {
        read_tetmesh(open(path)?, &name)
    }
}

pub fn write_mesh(mesh: &Mesh, path: &Path, format: MeshFormat) -> AppResult<()> {
    create(path, |w| match format {
        MeshFormat::Tetmesh => write_tetmesh(mesh, w),
        MeshFormat::Gmsh => write_gmsh(mesh, w),
    })
}

/// Builds a mesh from file data, flipping negatively oriented tets.
pub(crate) fn build_mesh(vertices: Vec<[f64; 3]>, mut tets: Vec<[usize; 4]>) -> Result<Mesh, kornforge_core::Error> {
    use kornforge_core::geometry::{signed_volume, Vec3};
    for t in &mut tets {
        if t.iter().all(|&v| v < vertices.len()) && signed_volume(&t.map(|v| Vec3::from(vertices[v]))) < 0.0 {
            t.swap(2, 3);
        }
    }
    Mesh::new(vertices, tets)
}
