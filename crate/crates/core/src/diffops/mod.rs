//! Differential operators on P2 fields, conformal Killing fields, jumps,
//! face projection, enrichment and the element-wise CK projection.

mod ck;
mod enrich;
mod face;
mod jump;
mod projection;

pub use ck::{AnalyticField, CKField, FnField, ParseCkError};
pub use enrich::{enrich, enrich_with, EnrichRule};
pub use face::{face_l2_norm_sq, face_project, tri_p2_shape_all, FacePoly};
pub use jump::{face_tet_bary, jump};
pub use projection::{
    analytic_moments, ck_project_element, ck_project_global, ck_residual, field_moments, project_from_moments,
    ElementMoments, FieldMoments,
};

use crate::error::Result;
use crate::fespace::{FieldVector, LocalField, P2Space};
use crate::geometry::{Mat3, Vec3};

/// Curl of a vector field from its Jacobian `j[(i, k)] = ∂v_i/∂x_k`.
pub fn curl_of_jacobian(j: &Mat3) -> Vec3 {
    Vec3::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)])
}

pub fn sym(j: &Mat3) -> Mat3 {
    (j + j.transpose()) * 0.5
}

/// ε(v) − ⅓ div(v) 𝕀 from a Jacobian.
pub fn trace_free_sym(j: &Mat3) -> Mat3 {
    let mut e = sym(j);
    let third = j.trace() / 3.0;
    for i in 0..3 {
        e[(i, i)] -= third;
    }
    e
}

impl LocalField {
    pub fn symgrad(&self, bary: &[f64; 4]) -> Mat3 {
        sym(&self.grad(bary))
    }

    pub fn div(&self, bary: &[f64; 4]) -> f64 {
        self.grad(bary).trace()
    }

    pub fn curl(&self, bary: &[f64; 4]) -> Vec3 {
        curl_of_jacobian(&self.grad(bary))
    }

    pub fn tf_symgrad(&self, bary: &[f64; 4]) -> Mat3 {
        trace_free_sym(&self.grad(bary))
    }

    /// curl curl v = ∇(div v) − Δv, constant on the tet.
    pub fn curlcurl(&self) -> Vec3 {
        let h = self.hessians();
        let grad_div = Vec3::new(
            h[0][(0, 0)] + h[1][(1, 0)] + h[2][(2, 0)],
            h[0][(0, 1)] + h[1][(1, 1)] + h[2][(2, 1)],
            h[0][(0, 2)] + h[1][(1, 2)] + h[2][(2, 2)],
        );
        let lap = Vec3::new(h[0].trace(), h[1].trace(), h[2].trace());
        grad_div - lap
    }
}

pub fn symgrad(space: &P2Space, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<Mat3> {
    Ok(sym(&space.eval_grad(field, t, bary)?))
}

pub fn div(space: &P2Space, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<f64> {
    Ok(space.eval_grad(field, t, bary)?.trace())
}

pub fn curl(space: &P2Space, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<Vec3> {
    Ok(curl_of_jacobian(&space.eval_grad(field, t, bary)?))
}

pub fn tf_symgrad(space: &P2Space, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<Mat3> {
    Ok(trace_free_sym(&space.eval_grad(field, t, bary)?))
}

pub fn curlcurl(space: &P2Space, field: &FieldVector, t: usize) -> Result<Vec3> {
    space.check(field)?;
    Ok(space.local(field, t).curlcurl())
}

/// Per-component Hessians, constant on the tet.
pub fn hess(space: &P2Space, field: &FieldVector, t: usize) -> Result<[Mat3; 3]> {
    space.check(field)?;
    Ok(space.local(field, t).hessians())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_cube_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bary<R: Rng>(rng: &mut R) -> [f64; 4] {
        let mut b: [f64; 4] = core::array::from_fn(|_| rng.random::<f64>() + 1e-3);
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|x| *x /= s);
        b
    }

    #[test]
    fn ck_operators_match_closed_forms() {
        let m = gen_cube_mesh(1);
        let s = P2Space::discontinuous(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = CKField::random(&mut rng);
            let f = s.interpolate(|x| w.eval(x));
            let t = rng.random_range(0..m.num_tets());
            let b = random_bary(&mut rng);
            let x = m.geom(t).map(&b);
            let a = Vec3::from(w.a);
            assert!((curlcurl(&s, &f, t).unwrap() - a * 8.0).norm() < 1e-11);
            let d = div(&s, &f, t, &b).unwrap();
            assert!((d - (6.0 * a.dot(&x) + 3.0 * w.rho)).abs() < 1e-11);
            assert!(tf_symgrad(&s, &f, t, &b).unwrap().norm() < 1e-12);
            assert!((curl(&s, &f, t, &b).unwrap() - w.curl(&x)).norm() < 1e-11);
        }
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let m = gen_cube_mesh(1);
        let s = P2Space::discontinuous(&m);
        let f = s.constant([1.5, -2.0, 0.25]);
        let b = [0.1, 0.2, 0.3, 0.4];
        assert!(symgrad(&s, &f, 0, &b).unwrap().norm() < 1e-13);
        assert!(div(&s, &f, 0, &b).unwrap().abs() < 1e-13);
        assert!(curl(&s, &f, 0, &b).unwrap().norm() < 1e-13);
        assert!(curlcurl(&s, &f, 0).unwrap().norm() < 1e-12);
        assert!(hess(&s, &f, 0).unwrap().iter().all(|h| h.norm() < 1e-12));
    }

    #[test]
    fn tf_symgrad_examples() {
        let m = gen_cube_mesh(1);
        let s = P2Space::discontinuous(&m);
        let f = s.interpolate(|x| Vec3::new(x[0], 0.0, 0.0));
        let tf = tf_symgrad(&s, &f, 1, &[0.25; 4]).unwrap();
        let expect = Mat3::from_diagonal(&Vec3::new(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0));
        assert!((tf - expect).norm() < 1e-13);
        assert!(tf.trace().abs() <= 1e-13 * tf.norm());
        let dil = s.interpolate(|x| x * 2.5);
        assert!(tf_symgrad(&s, &dil, 3, &[0.1, 0.2, 0.3, 0.4]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn jacobian_of_special_conformal_part() {
        // v = 2 x1 x − |x|² e1 has Jacobian 2 x1 I + 2 x e1ᵀ − 2 e1 xᵀ.
        let m = gen_cube_mesh(1);
        let s = P2Space::discontinuous(&m);
        let w = CKField { a: [1.0, 0.0, 0.0], ..CKField::zero() };
        let f = s.interpolate(|x| w.eval(x));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..m.num_tets() {
            let b = random_bary(&mut rng);
            let x = m.geom(t).map(&b);
            let e1 = Vec3::x();
            let expect = Mat3::identity() * (2.0 * x[0]) + x * e1.transpose() * 2.0 - e1 * x.transpose() * 2.0;
            assert!((s.eval_grad(&f, t, &b).unwrap() - expect).norm() < 1e-12);
        }
    }
}
