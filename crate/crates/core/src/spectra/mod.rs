//! Sharp Korn constants as extremal generalized eigenvalues.

mod local;
mod solve;
mod study;

pub use local::{local_korn_constant, local_korn_problem, LocalKorn};
pub use solve::{korn_constant, korn_constant_with, KornEstimate, PowerOptions, Solver, SolverKind, DENSE_MAX_DOFS};
pub use study::{
    angle_family, angle_study, refinement_study, Clock, LevelRecord, StudyReport, H_INDEPENDENCE_RATIO, SOLVER_AGREEMENT,
};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::fespace::{DofKind, P2Space};
use crate::forms::{
    assemble_boundary_l2, assemble_h1, assemble_jump, assemble_jump_projected, assemble_l2, assemble_phi1,
    assemble_phi2, assemble_tf, constant_mass_functionals, QuadraticForm, RankOne,
};
use crate::mesh::Mesh;

/// Which right-hand side the broken H¹ seminorm is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// trace-free + Φ₁ + jump, discontinuous fields.
    UsefulOne,
    /// trace-free + ‖·‖²_{L₂(∂Ω)} + jump, discontinuous fields.
    UsefulTwo,
    /// trace-free + Φ₂ + jump, discontinuous fields.
    Disc,
    /// trace-free + Φ₂ + face-projected jump, discontinuous fields.
    DiscProj,
    /// trace-free + Φ₁, continuous fields (jumps vanish).
    CgPhi1,
    /// trace-free + ‖·‖²_{L₂(∂Ω)}, continuous fields.
    CgPhi2,
}

impl Variant {
    pub const ALL: [Variant; 6] =
        [Variant::UsefulOne, Variant::UsefulTwo, Variant::Disc, Variant::DiscProj, Variant::CgPhi1, Variant::CgPhi2];

    pub fn name(self) -> &'static str {
        match self {
            Variant::UsefulOne => "useful_one",
            Variant::UsefulTwo => "useful_two",
            Variant::Disc => "disc",
            Variant::DiscProj => "disc_proj",
            Variant::CgPhi1 => "cg_phi1",
            Variant::CgPhi2 => "cg_phi2",
        }
    }

    /// Human-readable right-hand side.
    pub fn describe(self) -> &'static str {
        match self {
            Variant::UsefulOne => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + Φ₁(v)² + Σ_σ diam(σ)⁻¹‖[[v]]‖²), v discontinuous P2",
            Variant::UsefulTwo => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + ‖v‖²_L₂(∂Ω) + Σ_σ diam(σ)⁻¹‖[[v]]‖²), v discontinuous P2",
            Variant::Disc => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + Φ₂(v)² + Σ_σ diam(σ)⁻¹‖[[v]]‖²), v discontinuous P2",
            Variant::DiscProj => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + Φ₂(v)² + Σ_σ diam(σ)⁻¹‖π_σ[[v]]‖²), v discontinuous P2",
            Variant::CgPhi1 => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + Φ₁(v)²), v continuous P2",
            Variant::CgPhi2 => "|v|²_H¹ ≤ C (‖tf ε(v)‖² + ‖v‖²_L₂(∂Ω)), v continuous P2",
        }
    }

    pub fn dof_kind(self) -> DofKind {
        match self {
            Variant::CgPhi1 | Variant::CgPhi2 => DofKind::Continuous,
            _ => DofKind::Discontinuous,
        }
    }

    /// True when the right-hand form vanishes on constant fields, so that the
    /// constants must be deflated.
    pub fn annihilates_constants(self) -> bool {
        !matches!(self, Variant::UsefulTwo | Variant::CgPhi2)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown variant '{s}'")))
    }
}

/// Generalized eigenproblem A x = λ R x restricted to the complement of a
/// deflation space.
///
/// The deflation space is span(C) with Cᵀ M C = I; it is described by the
/// vectors of M C, stored as rank-one terms w·d dᵀ = (M c)(M c)ᵀ. The iterative
/// solver works with R' = R + (MC)(MC)ᵀ, which equals R on the M-orthogonal
/// complement and is definite on the whole space.
#[derive(Debug, Clone)]
pub struct KornProblem<'m> {
    pub variant: Option<Variant>,
    pub space: P2Space<'m>,
    pub lhs: QuadraticForm,
    pub rhs: QuadraticForm,
    pub rhs_completed: QuadraticForm,
    pub deflation: Vec<RankOne>,
    /// The block part of `rhs_completed` is singular; precondition with it plus the mass.
    pub preconditioner_mass: Option<QuadraticForm>,
}

impl<'m> KornProblem<'m> {
    pub fn new(mesh: &'m Mesh, variant: Variant) -> Result<Self> {
        let space = P2Space::new(mesh, variant.dof_kind());
        let lhs = assemble_h1(&space);
        let tf = assemble_tf(&space);
        let rhs = match variant {
            Variant::UsefulOne => QuadraticForm::sum("rhs", &[&tf, &assemble_phi1(&space), &assemble_jump(&space)?])?,
            Variant::UsefulTwo => {
                QuadraticForm::sum("rhs", &[&tf, &assemble_boundary_l2(&space), &assemble_jump(&space)?])?
            }
            Variant::Disc => QuadraticForm::sum("rhs", &[&tf, &assemble_phi2(&space)?, &assemble_jump(&space)?])?,
            Variant::DiscProj => {
                QuadraticForm::sum("rhs", &[&tf, &assemble_phi2(&space)?, &assemble_jump_projected(&space)?])?
            }
            Variant::CgPhi1 => QuadraticForm::sum("rhs", &[&tf, &assemble_phi1(&space)])?,
            Variant::CgPhi2 => QuadraticForm::sum("rhs", &[&tf, &assemble_boundary_l2(&space)])?,
        };
        let deflation = if variant.annihilates_constants() { constant_deflation(&space) } else { Vec::new() };
        let needs_mass = matches!(variant, Variant::Disc | Variant::DiscProj);
        let mass = if needs_mass { Some(assemble_l2(&space)) } else { None };
        let mut p = Self::with_deflation(space, lhs, rhs, deflation, mass)?;
        p.variant = Some(variant);
        Ok(p)
    }

    /// A problem from arbitrary forms. `mass` must be given when the block
    /// part of the completed right-hand side is singular.
    pub fn with_deflation(
        space: P2Space<'m>,
        lhs: QuadraticForm,
        rhs: QuadraticForm,
        deflation: Vec<RankOne>,
        preconditioner_mass: Option<QuadraticForm>,
    ) -> Result<Self> {
        for f in [&lhs, &rhs] {
            if f.ndof != space.ndof() {
                return Err(Error::DofMismatch { expected: space.ndof(), got: f.ndof });
            }
        }
        let rhs_completed = complete(&rhs, &deflation);
        Ok(Self { variant: None, space, lhs, rhs, rhs_completed, deflation, preconditioner_mass })
    }

    pub fn ndof(&self) -> usize {
        self.space.ndof()
    }

    /// The columns of M C.
    pub fn deflation_vectors(&self) -> Vec<Vec<f64>> {
        self.deflation
            .iter()
            .map(|t| {
                let s = crate::fmath::sqrt(t.weight);
                t.vector.iter().map(|x| x * s).collect()
            })
            .collect()
    }
}

/// R + Σ w d dᵀ, cancelling any rank-one term of R that is the exact negative
/// of a completion term (Φ₁ minus its mean part plus the completion is the mass).
fn complete(rhs: &QuadraticForm, deflation: &[RankOne]) -> QuadraticForm {
    let mut out = rhs.clone().with_label("rhs_completed");
    for d in deflation {
        if let Some(pos) = out.rank_one.iter().position(|t| t.weight == -d.weight && t.vector == d.vector) {
            out.rank_one.remove(pos);
        } else {
            out.rank_one.push(d.clone());
        }
    }
    out
}

/// M-orthonormal constants c_k = 1_k / √|Ω|: M c_k = m_k / √|Ω|.
pub fn constant_deflation(space: &P2Space) -> Vec<RankOne> {
    let vol = space.mesh.volume();
    constant_mass_functionals(space).into_iter().map(|v| RankOne { weight: 1.0 / vol, vector: v }).collect()
}

/// Per-element constants, M-orthonormal on each tet (discontinuous spaces).
pub fn elementwise_constant_deflation(space: &P2Space) -> Result<Vec<RankOne>> {
    if space.kind() != DofKind::Discontinuous {
        return Err(Error::KindMismatch(DofKind::Discontinuous.as_str()));
    }
    let mut out = Vec::with_capacity(3 * space.mesh.num_tets());
    for t in 0..space.mesh.num_tets() {
        let vol = space.mesh.geom(t).volume();
        for c in 0..3 {
            let mut v = alloc::vec![0.0; space.ndof()];
            for n in 0..10 {
                v[space.dofmap.tet_dofs[t][3 * n + c]] = if n < 4 { -vol / 20.0 } else { vol / 5.0 };
            }
            out.push(RankOne { weight: 1.0 / vol, vector: v });
        }
    }
    Ok(out)
}
