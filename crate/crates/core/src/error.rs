use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

/// Errors raised by mesh construction, assembly and the eigen-solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mesh has no tetrahedra")]
    EmptyMesh,
    #[error("tet {tet}: vertex index {index} out of range ({nv} vertices)")]
    VertexOutOfRange { tet: usize, index: usize, nv: usize },
    #[error("tet {tet}: vertex {index} repeated")]
    RepeatedVertex { tet: usize, index: usize },
    #[error("tet {tet}: degenerate element (signed volume {volume:e})")]
    DegenerateTet { tet: usize, volume: f64 },
    #[error("tet {tet}: inverted orientation (signed volume {volume:e})")]
    InvertedTet { tet: usize, volume: f64 },
    #[error("non-conforming mesh: face {vertices:?} shared by {} tets {tets:?}", tets.len())]
    NonConformingFace { vertices: [usize; 3], tets: Vec<usize> },
    #[error("unsupported quadrature degree {degree} on {domain}")]
    UnsupportedQuadrature { domain: &'static str, degree: usize },
    #[error("field has {got} coefficients but the dof map expects {expected}")]
    DofMismatch { expected: usize, got: usize },
    #[error("field kind does not match the space ({0})")]
    KindMismatch(&'static str),
    #[error("face {0} is a boundary face; jumps exist only on interior faces")]
    BoundaryFace(usize),
    #[error("singular face mass matrix (degenerate face)")]
    SingularFaceMass,
    #[error("conformal Killing boundary Gram matrix is singular")]
    SingularCkGram,
    #[error("right-hand form is not positive definite after deflation (pivot {pivot:e} at {index})")]
    IndefiniteRhs { index: usize, pivot: f64 },
    #[error("power iteration did not converge after {iterations} iterations (last relative change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("dense eigen-solver is limited to {max} dofs, problem has {ndof}")]
    DenseTooLarge { ndof: usize, max: usize },
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
