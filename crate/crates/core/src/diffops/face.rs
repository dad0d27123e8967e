use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::fespace::{make_quadrature, Domain, QuadRule};
use crate::geometry::Vec3;
use crate::mesh::{FaceRef, Mesh};

/// Quadrature degree used on faces for projection: exact for P2 × P2 and
/// leaves headroom for smooth non-polynomial data.
const FACE_DEGREE: usize = 6;

/// Quadratic Lagrange basis on a triangle: 3 vertices, then the edges
/// (0,1), (0,2), (1,2).
pub fn tri_p2_shape_all(fb: &[f64; 3]) -> [f64; 6] {
    let [l0, l1, l2] = *fb;
    [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l0 * l2,
        4.0 * l1 * l2,
    ]
}

/// A componentwise-quadratic vector polynomial on one face.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePoly {
    pub vertices: [Vec3; 3],
    pub area: f64,
    pub coeffs: [Vec3; 6],
}

impl FacePoly {
    pub fn eval(&self, fb: &[f64; 3]) -> Vec3 {
        let phi = tri_p2_shape_all(fb);
        (0..6).map(|k| self.coeffs[k] * phi[k]).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let rule = face_rule();
        quad_sum(&rule, self.area, |fb| self.eval(fb).norm_squared())
    }
}

fn face_rule() -> QuadRule {
    make_quadrature(Domain::Triangle, FACE_DEGREE).expect("supported triangle degree")
}

fn quad_sum(rule: &QuadRule, area: f64, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    rule.tri_points().zip(rule.weights.iter()).map(|(fb, w)| w * f(&fb)).sum::<f64>() * 2.0 * area
}

fn face_vertices(mesh: &Mesh, face: FaceRef) -> ([Vec3; 3], f64) {
    let rec = mesh.face(face);
    (core::array::from_fn(|k| mesh.vertex(rec.vertices[k])), rec.area)
}

fn point(v: &[Vec3; 3], fb: &[f64; 3]) -> Vec3 {
    v[0] * fb[0] + v[1] * fb[1] + v[2] * fb[2]
}

/// ‖g‖²_{L₂(σ)} by the face quadrature used for projection.
pub fn face_l2_norm_sq(mesh: &Mesh, face: FaceRef, g: impl Fn(&Vec3) -> Vec3) -> f64 {
    let (v, area) = face_vertices(mesh, face);
    quad_sum(&face_rule(), area, |fb| g(&point(&v, fb)).norm_squared())
}

/// L₂(σ)-orthogonal projection of `g` onto componentwise quadratics on the face.
pub fn face_project(mesh: &Mesh, face: FaceRef, g: impl Fn(&Vec3) -> Vec3) -> Result<FacePoly> {
    let (v, area) = face_vertices(mesh, face);
    let rule = face_rule();
    let mut mass = SMatrix::<f64, 6, 6>::zeros();
    let mut rhs = SMatrix::<f64, 6, 3>::zeros();
    for (fb, w) in rule.tri_points().zip(rule.weights.iter()) {
        let phi = SVector::<f64, 6>::from(tri_p2_shape_all(&fb));
        let gx = g(&point(&v, &fb));
        let ww = w * 2.0 * area;
        mass += phi * phi.transpose() * ww;
        rhs += phi * gx.transpose() * ww;
    }
    let chol = mass.cholesky().ok_or(Error::SingularFaceMass)?;
    let c = chol.solve(&rhs);
    Ok(FacePoly { vertices: v, area, coeffs: core::array::from_fn(|k| c.row(k).transpose()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_cube_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reproduces_quadratics() {
        let m = gen_cube_mesh(1);
        let g = |x: &Vec3| Vec3::new(x[0] * x[1] - 1.0, x[2] * x[2], 3.0 * x[0] - x[1]);
        for i in 0..m.interior_faces().len() {
            let p = face_project(&m, FaceRef::Interior(i), g).unwrap();
            for fb in [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.6, 0.1, 0.3]] {
                assert!((p.eval(&fb) - g(&point(&p.vertices, &fb))).norm() < 1e-12);
            }
            let again = face_project(&m, FaceRef::Interior(i), |x| {
                let fb = bary_on(&p.vertices, x);
                p.eval(&fb)
            })
            .unwrap();
            for k in 0..6 {
                assert!((again.coeffs[k] - p.coeffs[k]).norm() < 1e-12);
            }
        }
    }

    fn bary_on(v: &[Vec3; 3], x: &Vec3) -> [f64; 3] {
        let e1 = v[1] - v[0];
        let e2 = v[2] - v[0];
        let r = x - v[0];
        let (a, b, c) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
        let (d, e) = (r.dot(&e1), r.dot(&e2));
        let det = a * c - b * b;
        let l1 = (c * d - b * e) / det;
        let l2 = (a * e - b * d) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    #[test]
    fn contraction_for_oscillatory_data() {
        let m = gen_cube_mesh(1);
        let g = |x: &Vec3| Vec3::new(libm::sin(10.0 * x[0]), 0.0, 0.0);
        for i in 0..m.boundary_faces().len() {
            let f = FaceRef::Boundary(i);
            let p = face_project(&m, f, g).unwrap();
            assert!(p.l2_norm_sq() <= face_l2_norm_sq(&m, f, g) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn recovers_quadratic_part_of_orthogonalized_data() {
        // g = p + r with r orthogonal to every face quadratic by Gram–Schmidt.
        let m = gen_cube_mesh(1);
        let face = FaceRef::Interior(0);
        let (v, area) = face_vertices(&m, face);
        let rule = face_rule();
        let ip = |f: &dyn Fn(&[f64; 3]) -> f64, h: &dyn Fn(&[f64; 3]) -> f64| {
            quad_sum(&rule, area, |fb| f(fb) * h(fb))
        };
        // Orthonormal basis of P2 on the face from the Lagrange basis.
        let mut basis: alloc::vec::Vec<[f64; 6]> = alloc::vec::Vec::new();
        for k in 0..6 {
            let mut c = [0.0; 6];
            c[k] = 1.0;
            let eval = |c: &[f64; 6], fb: &[f64; 3]| {
                let phi = tri_p2_shape_all(fb);
                (0..6).map(|j| c[j] * phi[j]).sum::<f64>()
            };
            for b in &basis {
                let proj = ip(&|fb| eval(&c, fb), &|fb| eval(b, fb));
                for j in 0..6 {
                    c[j] -= proj * b[j];
                }
            }
            let n = libm::sqrt(ip(&|fb| eval(&c, fb), &|fb| eval(&c, fb)));
            c.iter_mut().for_each(|x| *x /= n);
            basis.push(c);
        }
        let eval = |c: &[f64; 6], fb: &[f64; 3]| {
            let phi = tri_p2_shape_all(fb);
            (0..6).map(|j| c[j] * phi[j]).sum::<f64>()
        };
        let high = |fb: &[f64; 3]| fb[0] * fb[0] * fb[1] * 5.0 - fb[2] * fb[2] * fb[2];
        let coefs: alloc::vec::Vec<f64> = basis.iter().map(|b| ip(&high, &|fb| eval(b, fb))).collect();
        let resid = |fb: &[f64; 3]| high(fb) - basis.iter().zip(&coefs).map(|(b, a)| a * eval(b, fb)).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pc: [f64; 6] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let p = face_project(&m, face, |x| {
            let fb = bary_on(&v, x);
            Vec3::new(eval(&pc, &fb) + resid(&fb), 0.0, 0.0)
        })
        .unwrap();
        for (c, expect) in p.coeffs.iter().zip(pc) {
            assert!((c[0] - expect).abs() < 1e-10);
        }
    }
}
