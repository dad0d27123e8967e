use alloc::vec::Vec;

use nalgebra::{DMatrix, SMatrix};

use super::{FactorBlock, QuadraticForm};
use crate::diffops::{face_tet_bary, tri_p2_shape_all};
use crate::error::{Error, Result};
use crate::fespace::{
    make_quadrature, p2_shape_all, p2_shape_bary_hess, physical_hessian, shape_gradient, Domain, DofKind, P2Space,
};
use crate::fmath::sqrt;
use crate::geometry::{Mat3, Vec3};
use crate::mesh::FaceRecord;

/// Gradient products are quadratic on a tet, so degree 2 is exact for them.
const GRAD_DEGREE: usize = 2;
/// Products of P2 values (mass and face terms) are quartic.
const VALUE_DEGREE: usize = 4;
/// Face projection uses a richer rule, still exact for P2 × P2.
const PROJ_DEGREE: usize = 6;

const SQRT2: f64 = core::f64::consts::SQRT_2;

fn dof(n: usize, c: usize) -> usize {
    3 * n + c
}

/// Element blocks whose rows per quadrature point come from `rows`, given the
/// physical gradients of the 10 shape functions and the shape values.
fn element_form(
    space: &P2Space,
    label: &str,
    degree: usize,
    rows_per_point: usize,
    rows: impl Fn(&[Vec3; 10], &[f64; 10], &mut [&mut [f64]]),
) -> QuadraticForm {
    let mesh = space.mesh;
    let rule = make_quadrature(Domain::Tet, degree).expect("supported degree");
    let mut form = QuadraticForm::empty(label, space.kind(), space.ndof(), degree);
    for t in 0..mesh.num_tets() {
        let geom = mesh.geom(t);
        let bg = geom.bary_gradients();
        let scale = 6.0 * geom.volume();
        let mut block = FactorBlock::new(space.dofmap.tet_dofs[t].to_vec(), rows_per_point * rule.len());
        for (q, (p, w)) in rule.iter().enumerate() {
            let grads: [Vec3; 10] = core::array::from_fn(|n| shape_gradient(n, p, &bg));
            let vals = p2_shape_all(p);
            let sw = sqrt(w * scale);
            let m = block.dofs.len();
            let chunk = &mut block.factor[q * rows_per_point * m..(q + 1) * rows_per_point * m];
            let mut row_refs: Vec<&mut [f64]> = chunk.chunks_exact_mut(m).collect();
            rows(&grads, &vals, &mut row_refs);
            for r in row_refs {
                r.iter_mut().for_each(|x| *x *= sw);
            }
        }
        form.blocks.push(block);
    }
    form
}

/// ‖v‖²_{L₂(Ω)}.
pub fn assemble_l2(space: &P2Space) -> QuadraticForm {
    element_form(space, "l2", VALUE_DEGREE, 3, |_, vals, rows| {
        for c in 0..3 {
            for n in 0..10 {
                rows[c][dof(n, c)] = vals[n];
            }
        }
    })
}

/// Broken |v|²_{H¹(Ω,𝒯)} = Σ_T ∫_T |∇v|².
pub fn assemble_h1(space: &P2Space) -> QuadraticForm {
    element_form(space, "h1", GRAD_DEGREE, 9, |grads, _, rows| {
        for c in 0..3 {
            for j in 0..3 {
                for n in 0..10 {
                    rows[3 * c + j][dof(n, c)] = grads[n][j];
                }
            }
        }
    })
}

/// ‖ε_𝒯(v) − ⅓ div_𝒯(v) 𝕀‖², Frobenius norm with off-diagonals counted twice.
pub fn assemble_tf(space: &P2Space) -> QuadraticForm {
    element_form(space, "tf", GRAD_DEGREE, 6, |grads, _, rows| {
        for i in 0..3 {
            for n in 0..10 {
                for c in 0..3 {
                    let own = if c == i { grads[n][i] } else { 0.0 };
                    rows[i][dof(n, c)] = own - grads[n][c] / 3.0;
                }
            }
        }
        for (r, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            for n in 0..10 {
                // √2 · ½ (∂_j v_i + ∂_i v_j)
                rows[3 + r][dof(n, i)] = grads[n][j] * (SQRT2 / 2.0);
                rows[3 + r][dof(n, j)] = grads[n][i] * (SQRT2 / 2.0);
            }
        }
    })
}

fn hessian_form(space: &P2Space, label: &str, off_diag_weight: f64) -> QuadraticForm {
    let mesh = space.mesh;
    let mut form = QuadraticForm::empty(label, space.kind(), space.ndof(), 0);
    let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    for t in 0..mesh.num_tets() {
        let geom = mesh.geom(t);
        let bg = geom.bary_gradients();
        let hs: [Mat3; 10] = core::array::from_fn(|n| physical_hessian(&p2_shape_bary_hess(n), &bg));
        let sv = sqrt(geom.volume());
        let mut block = FactorBlock::new(space.dofmap.tet_dofs[t].to_vec(), 18);
        for c in 0..3 {
            for (r, &(j, k)) in pairs.iter().enumerate() {
                let w = if j == k { sv } else { sv * off_diag_weight };
                let row = block.row_mut(6 * c + r);
                for n in 0..10 {
                    row[dof(n, c)] = hs[n][(j, k)] * w;
                }
            }
        }
        form.blocks.push(block);
    }
    form
}

/// Broken |v|²_{H²(Ω,𝒯)}: every second partial derivative ∂^α, |α| = 2, once.
pub fn assemble_h2_broken(space: &P2Space) -> QuadraticForm {
    hessian_form(space, "h2_broken", 1.0)
}

/// Σ_T ∫_T |Hess v|² (Frobenius norm of each component's Hessian).
pub fn assemble_hess(space: &P2Space) -> QuadraticForm {
    hessian_form(space, "hess", SQRT2)
}

fn face_values(space: &P2Space, face: &FaceRecord, t: usize, fb: &[f64; 3]) -> [f64; 10] {
    p2_shape_all(&face_tet_bary(space.mesh, &face.vertices, t, fb))
}

fn require_discontinuous(space: &P2Space) -> Result<()> {
    if space.kind() != DofKind::Discontinuous {
        return Err(Error::KindMismatch(DofKind::Discontinuous.as_str()));
    }
    Ok(())
}

/// Σ_σ (diam σ)⁻¹ ‖[[v]]_σ‖²_{L₂(σ)} over interior faces.
pub fn assemble_jump(space: &P2Space) -> Result<QuadraticForm> {
    require_discontinuous(space)?;
    let rule = make_quadrature(Domain::Triangle, VALUE_DEGREE)?;
    let mut form = QuadraticForm::empty("jump", space.kind(), space.ndof(), VALUE_DEGREE);
    for face in space.mesh.interior_faces() {
        let (m, p) = (face.minus, face.plus.expect("interior"));
        let mut dofs = space.dofmap.tet_dofs[m].to_vec();
        dofs.extend_from_slice(&space.dofmap.tet_dofs[p]);
        let mut block = FactorBlock::new(dofs, 3 * rule.len());
        for (q, (fb, w)) in rule.tri_points().zip(rule.weights.iter()).enumerate() {
            let vm = face_values(space, face, m, &fb);
            let vp = face_values(space, face, p, &fb);
            let s = sqrt(w * 2.0 * face.area / face.diameter);
            for c in 0..3 {
                let row = block.row_mut(3 * q + c);
                for n in 0..10 {
                    row[dof(n, c)] = -vm[n] * s;
                    row[30 + dof(n, c)] = vp[n] * s;
                }
            }
        }
        form.blocks.push(block);
    }
    Ok(form)
}

/// Σ_σ (diam σ)⁻¹ ‖π_σ [[v]]_σ‖²_{L₂(σ)}, with π_σ the L₂(σ) projection onto
/// componentwise quadratics. Rows are L⁻¹ Φᵀ W J for the face mass M = L Lᵀ.
pub fn assemble_jump_projected(space: &P2Space) -> Result<QuadraticForm> {
    require_discontinuous(space)?;
    let rule = make_quadrature(Domain::Triangle, PROJ_DEGREE)?;
    let np = rule.len();
    let mut form = QuadraticForm::empty("jump_projected", space.kind(), space.ndof(), PROJ_DEGREE);
    for face in space.mesh.interior_faces() {
        let (m, p) = (face.minus, face.plus.expect("interior"));
        let mut phi = DMatrix::<f64>::zeros(np, 6);
        // Scalar jump rows: the same for every component.
        let mut jmat = DMatrix::<f64>::zeros(np, 20);
        let mut mass = SMatrix::<f64, 6, 6>::zeros();
        for (q, (fb, w)) in rule.tri_points().zip(rule.weights.iter()).enumerate() {
            let ww = w * 2.0 * face.area;
            let basis = tri_p2_shape_all(&fb);
            for k in 0..6 {
                phi[(q, k)] = basis[k] * ww;
            }
            let sb = nalgebra::SVector::<f64, 6>::from(basis);
            mass += sb * sb.transpose() * ww;
            let vm = face_values(space, face, m, &fb);
            let vp = face_values(space, face, p, &fb);
            for n in 0..10 {
                jmat[(q, n)] = -vm[n];
                jmat[(q, 10 + n)] = vp[n];
            }
        }
        let l = mass.cholesky().ok_or(Error::SingularFaceMass)?.unpack();
        let mut rows = phi.tr_mul(&jmat);
        l.solve_lower_triangular_mut(&mut rows);
        rows /= sqrt(face.diameter);
        let mut dofs = space.dofmap.tet_dofs[m].to_vec();
        dofs.extend_from_slice(&space.dofmap.tet_dofs[p]);
        let mut block = FactorBlock::new(dofs, 18);
        for c in 0..3 {
            for k in 0..6 {
                let row = block.row_mut(6 * c + k);
                for n in 0..10 {
                    row[dof(n, c)] = rows[(k, n)];
                    row[30 + dof(n, c)] = rows[(k, 10 + n)];
                }
            }
        }
        form.blocks.push(block);
    }
    Ok(form)
}

/// ‖v‖²_{L₂(∂Ω)}.
pub fn assemble_boundary_l2(space: &P2Space) -> QuadraticForm {
    let rule = make_quadrature(Domain::Triangle, VALUE_DEGREE).expect("supported degree");
    let mut form = QuadraticForm::empty("boundary_l2", space.kind(), space.ndof(), VALUE_DEGREE);
    for face in space.mesh.boundary_faces() {
        let t = face.minus;
        let mut block = FactorBlock::new(space.dofmap.tet_dofs[t].to_vec(), 3 * rule.len());
        for (q, (fb, w)) in rule.tri_points().zip(rule.weights.iter()).enumerate() {
            let v = face_values(space, face, t, &fb);
            let s = sqrt(w * 2.0 * face.area);
            for c in 0..3 {
                let row = block.row_mut(3 * q + c);
                for n in 0..10 {
                    row[dof(n, c)] = v[n] * s;
                }
            }
        }
        form.blocks.push(block);
    }
    form
}
