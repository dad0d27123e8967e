use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{QuadraticForm, RankOne};
use crate::diffops::{field_moments, CKField};
use crate::error::{Error, Result};
use crate::fespace::{
    make_quadrature, p2_shape_all, p2_shape_bary_hess, physical_hessian, shape_gradient, Domain, FieldVector, P2Space,
};
use crate::fmath::{powf, sqrt};
use crate::geometry::Vec3;
use crate::linalg::Householder;

use super::assemble::assemble_l2;

/// Length scale and exponents of the div–curl seminorm Ψ_ℓ.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsiScale {
    pub ell: f64,
    pub a: f64,
    pub b: f64,
}

impl PsiScale {
    pub const DEFAULT_A: f64 = -1.5;
    pub const DEFAULT_B: f64 = -0.5;

    pub fn new(ell: f64) -> Self {
        Self { ell, a: Self::DEFAULT_A, b: Self::DEFAULT_B }
    }
}

/// The functionals x ↦ ∫_Ω v_k for k = 1, 2, 3, i.e. M 1_k.
pub fn constant_mass_functionals(space: &P2Space) -> [Vec<f64>; 3] {
    let mut m = [vec![0.0; space.ndof()], vec![0.0; space.ndof()], vec![0.0; space.ndof()]];
    for t in 0..space.mesh.num_tets() {
        let vol = space.mesh.geom(t).volume();
        let dofs = &space.dofmap.tet_dofs[t];
        for n in 0..10 {
            let w = if n < 4 { -vol / 20.0 } else { vol / 5.0 };
            for (c, mk) in m.iter_mut().enumerate() {
                mk[dofs[3 * n + c]] += w;
            }
        }
    }
    m
}

/// Φ₁(v)² = ‖v − mean(v)‖²_{L₂(Ω)} = ‖v‖² − Σ_k (∫v_k)² / |Ω|.
pub fn assemble_phi1(space: &P2Space) -> QuadraticForm {
    let mut form = assemble_l2(space).with_label("phi1");
    let vol = space.mesh.volume();
    for v in constant_mass_functionals(space) {
        form.rank_one.push(RankOne { weight: -1.0 / vol, vector: v });
    }
    form
}

/// Φ₂(v)²: squared L₂(∂Ω) norm of the projection of the boundary trace onto
/// {m ∈ CK(Ω) : ∫_{∂Ω} m = 0}, as seven rank-one terms.
pub fn assemble_phi2(space: &P2Space) -> Result<QuadraticForm> {
    let rule = make_quadrature(Domain::Triangle, 4)?;
    let basis: [CKField; 10] = core::array::from_fn(CKField::basis);
    let mut ell = vec![vec![0.0; space.ndof()]; 10];
    let mut gram = DMatrix::<f64>::zeros(10, 10);
    let mut constraint = DMatrix::<f64>::zeros(10, 3);
    let mesh = space.mesh;
    for face in mesh.boundary_faces() {
        let t = face.minus;
        let dofs = &space.dofmap.tet_dofs[t];
        for (fb, w) in rule.tri_points().zip(rule.weights.iter()) {
            let bary = crate::diffops::face_tet_bary(mesh, &face.vertices, t, &fb);
            let x = mesh.geom(t).map(&bary);
            let phi = p2_shape_all(&bary);
            let ww = w * 2.0 * face.area;
            let mv: [Vec3; 10] = core::array::from_fn(|j| basis[j].eval(&x));
            for j in 0..10 {
                for k in 0..10 {
                    gram[(j, k)] += ww * mv[j].dot(&mv[k]);
                }
                for c in 0..3 {
                    constraint[(j, c)] += ww * mv[j][c];
                    for n in 0..10 {
                        ell[j][dofs[3 * n + c]] += ww * phi[n] * mv[j][c];
                    }
                }
            }
        }
    }
    // Null space of the mean constraints: trailing columns of the Householder
    // reflectors of Cᵀ (10 × 3).
    let h = Householder::new(&constraint).map_err(|_| Error::SingularCkGram)?;
    let dim = 10 - h.rank();
    let mut null = DMatrix::<f64>::zeros(10, dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        null.set_column(i, &h.expand(&e));
    }
    let g_null = null.tr_mul(&gram) * &null;
    let l = g_null.cholesky().ok_or(Error::SingularCkGram)?.unpack();
    // B = N L⁻ᵀ has G-orthonormal columns.
    let mut bt = null.transpose();
    l.solve_lower_triangular_mut(&mut bt);
    let mut form = QuadraticForm::empty("phi2", space.kind(), space.ndof(), 4);
    for i in 0..dim {
        let mut u = vec![0.0; space.ndof()];
        for j in 0..10 {
            crate::linalg::axpy(bt[(i, j)], &ell[j], &mut u);
        }
        form.rank_one.push(RankOne { weight: 1.0, vector: u });
    }
    Ok(form)
}

/// The seven linear functionals ∫div, ∫curl_i, ∫(curl curl)_i over Ω (as dof vectors).
fn psi_functionals(space: &P2Space) -> [Vec<f64>; 7] {
    let mut f: [Vec<f64>; 7] = core::array::from_fn(|_| vec![0.0; space.ndof()]);
    let centroid = [0.25; 4];
    for t in 0..space.mesh.num_tets() {
        let geom = space.mesh.geom(t);
        let vol = geom.volume();
        let bg = geom.bary_gradients();
        let dofs = &space.dofmap.tet_dofs[t];
        for n in 0..10 {
            let g = shape_gradient(n, &centroid, &bg);
            let h = physical_hessian(&p2_shape_bary_hess(n), &bg);
            for c in 0..3 {
                let d = dofs[3 * n + c];
                let mut e = Vec3::zeros();
                e[c] = 1.0;
                f[0][d] += vol * g[c];
                let curl = g.cross(&e);
                let cc = h.column(c) - e * h.trace();
                for i in 0..3 {
                    f[1 + i][d] += vol * curl[i];
                    f[4 + i][d] += vol * cc[i];
                }
            }
        }
    }
    f
}

/// Q_Ψ(v) = ℓ^{2a}[(∫div v)² + |∫curl v|²] + ℓ^{2b} |∫curl curl v|², integrals over Ω.
/// Satisfies Q_Ψ ≤ Ψ_ℓ² ≤ 7 Q_Ψ.
pub fn assemble_psi_surrogate(space: &P2Space, scale: PsiScale) -> Result<QuadraticForm> {
    if scale.ell.is_nan() || scale.ell <= 0.0 {
        return Err(Error::InvalidArgument("length scale must be positive".into()));
    }
    let wa = powf(scale.ell, 2.0 * scale.a);
    let wb = powf(scale.ell, 2.0 * scale.b);
    let mut form = QuadraticForm::empty("psi_surrogate", space.kind(), space.ndof(), 0);
    for (i, v) in psi_functionals(space).into_iter().enumerate() {
        form.rank_one.push(RankOne { weight: if i < 4 { wa } else { wb }, vector: v });
    }
    Ok(form)
}

/// Ψ_ℓ(v) = ℓ^a (|∫div v| + |∫curl v|) + ℓ^b |∫curl curl v| evaluated directly.
pub fn psi_direct(space: &P2Space, field: &FieldVector, scale: PsiScale) -> Result<f64> {
    space.check(field)?;
    let mut div = 0.0;
    let mut curl = Vec3::zeros();
    let mut cc = Vec3::zeros();
    for t in 0..space.mesh.num_tets() {
        let m = field_moments(&space.local(field, t), space.mesh.geom(t).volume());
        div += m.div;
        curl += m.curl;
        cc += m.curlcurl;
    }
    Ok(powf(scale.ell, scale.a) * (div.abs() + sqrt(curl.norm_squared())) + powf(scale.ell, scale.b) * sqrt(cc.norm_squared()))
}
