use super::{constant_deflation, korn_constant, KornProblem, Solver};
use crate::error::Result;
use crate::fespace::{FieldVector, P2Space};
use crate::fmath::sqrt;
use crate::forms::{assemble_h1, assemble_psi_surrogate, assemble_tf, PsiScale, QuadraticForm};
use crate::geometry::TetGeom;
use crate::mesh::Mesh;

/// k(T): the smallest k with |v|_{H¹(T)} ≤ k (‖tf ε(v)‖² + Q_Ψ(v))^{1/2} for
/// all P2 fields on T that are L₂-orthogonal to the constants.
#[derive(Debug, Clone)]
pub struct LocalKorn {
    pub k: f64,
    pub lambda_max: f64,
    pub scale: PsiScale,
    pub worst: FieldVector,
}

/// The 30-dof element problem on a one-tet mesh.
pub fn local_korn_problem(mesh: &Mesh, scale: PsiScale) -> Result<KornProblem<'_>> {
    let space = P2Space::discontinuous(mesh);
    let lhs = assemble_h1(&space);
    let rhs = QuadraticForm::sum("rhs", &[&assemble_tf(&space), &assemble_psi_surrogate(&space, scale)?])?;
    let deflation = constant_deflation(&space);
    KornProblem::with_deflation(space, lhs, rhs, deflation, None)
}

/// k(T) with ℓ = diam T and the default exponents unless `scale` is given.
pub fn local_korn_constant(geom: &TetGeom, scale: Option<PsiScale>) -> Result<LocalKorn> {
    let pts = geom.vertices.map(|v| [v[0], v[1], v[2]]);
    let mesh = Mesh::new(pts.to_vec(), alloc::vec![[0, 1, 2, 3]])?;
    let scale = scale.unwrap_or_else(|| PsiScale::new(geom.diameter()));
    let problem = local_korn_problem(&mesh, scale)?;
    let est = korn_constant(&problem, Solver::Dense)?;
    Ok(LocalKorn { k: sqrt(est.lambda_max), lambda_max: est.lambda_max, scale, worst: est.worst })
}
