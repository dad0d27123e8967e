use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::diffops::{trace_free_sym, CKField};
use crate::fespace::{make_quadrature, Domain, P2Space};
use crate::geometry::Vec3;
use crate::mesh::{gen_cube_mesh, single_tet, Mesh};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Direct degree-6 quadrature of ∫ f(local field, bary) over all tets.
fn integrate(space: &P2Space, field: &FieldVector, f: impl Fn(&crate::fespace::LocalField, &[f64; 4]) -> f64) -> f64 {
    let rule = make_quadrature(Domain::Tet, 6).unwrap();
    let mut s = 0.0;
    for t in 0..space.mesh.num_tets() {
        let l = space.local(field, t);
        let vol = space.mesh.geom(t).volume();
        for (p, w) in rule.iter() {
            s += w * 6.0 * vol * f(&l, p);
        }
    }
    s
}

#[test]
fn h1_and_tf_closed_forms() {
    let m = gen_cube_mesh(2);
    for s in [P2Space::discontinuous(&m), P2Space::continuous(&m)] {
        let v = s.interpolate(|x| Vec3::new(x[0], 0.0, 0.0));
        assert!(rel(assemble_h1(&s).eval(&v).unwrap(), 1.0) < 1e-13);
        assert!(rel(assemble_tf(&s).eval(&v).unwrap(), 2.0 / 3.0) < 1e-13);
        let c = s.constant([1.0, -2.0, 0.5]);
        assert!(assemble_h1(&s).eval(&c).unwrap().abs() < 1e-24);
        assert!(rel(assemble_l2(&s).eval(&c).unwrap(), 5.25) < 1e-13);
    }
}

#[test]
fn forms_agree_with_direct_quadrature() {
    let m = gen_cube_mesh(1).mapped(|x| [x[0] * 1.3, x[1] + 0.2 * x[2], x[2] * 0.7]).unwrap();
    let s = P2Space::discontinuous(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (h1, tf, l2, hess, h2) =
        (assemble_h1(&s), assemble_tf(&s), assemble_l2(&s), assemble_hess(&s), assemble_h2_broken(&s));
    for _ in 0..20 {
        let v = s.random_field(&mut rng);
        let d_h1 = integrate(&s, &v, |l, p| l.grad(p).norm_squared());
        let d_tf = integrate(&s, &v, |l, p| trace_free_sym(&l.grad(p)).norm_squared());
        let d_l2 = integrate(&s, &v, |l, p| l.value(p).norm_squared());
        let d_hess = integrate(&s, &v, |l, _| l.hessians().iter().map(|h| h.norm_squared()).sum());
        let d_h2 = integrate(&s, &v, |l, _| {
            l.hessians()
                .iter()
                .map(|h| h[(0, 0)].powi(2) + h[(1, 1)].powi(2) + h[(2, 2)].powi(2) + h[(0, 1)].powi(2) + h[(0, 2)].powi(2) + h[(1, 2)].powi(2))
                .sum()
        });
        assert!(rel(h1.eval(&v).unwrap(), d_h1) < 1e-11);
        assert!(rel(tf.eval(&v).unwrap(), d_tf) < 1e-11);
        assert!(rel(l2.eval(&v).unwrap(), d_l2) < 1e-11);
        assert!(rel(hess.eval(&v).unwrap(), d_hess) < 1e-11);
        assert!(rel(h2.eval(&v).unwrap(), d_h2) < 1e-11);
    }
}

#[test]
fn forms_are_symmetric_psd_and_apply_matches_value() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let forms = vec![
        assemble_h1(&s),
        assemble_tf(&s),
        assemble_jump(&s).unwrap(),
        assemble_jump_projected(&s).unwrap(),
        assemble_phi1(&s),
        assemble_phi2(&s).unwrap(),
        assemble_boundary_l2(&s),
        assemble_psi_surrogate(&s, PsiScale::new(1.0)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for f in &forms {
        let d = f.to_dense();
        let norm = d.norm();
        assert!((&d - d.transpose()).norm() <= 1e-13 * norm, "{}", f.label);
        for _ in 0..10 {
            let x: Vec<f64> = (0..f.ndof).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xn: f64 = x.iter().map(|v| v * v).sum();
            let val = f.value(&x).unwrap();
            assert!(val >= -1e-12 * norm * xn, "{}", f.label);
            let mut y = vec![0.0; f.ndof];
            f.apply(&x, &mut y).unwrap();
            let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((xy - val).abs() <= 1e-11 * (1.0 + val.abs()), "{}", f.label);
            let dx = nalgebra::DVector::from_column_slice(&x);
            assert!(((dx.transpose() * &d * &dx)[0] - val).abs() <= 1e-11 * (1.0 + val.abs()));
        }
    }
}

#[test]
fn ck_fields_are_in_the_tf_kernel() {
    let m = gen_cube_mesh(2);
    let s = P2Space::continuous(&m);
    let (tf, h1) = (assemble_tf(&s), assemble_h1(&s));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let w = CKField::random(&mut rng);
        let v = s.interpolate(|x| w.eval(x));
        assert!(tf.eval(&v).unwrap() <= 1e-20 * (1.0 + h1.eval(&v).unwrap()));
    }
}

#[test]
fn tf_is_dominated_by_h1() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let (tf, h1) = (assemble_tf(&s), assemble_h1(&s));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let v = s.random_field(&mut rng);
        assert!(tf.eval(&v).unwrap() <= h1.eval(&v).unwrap());
    }
}

#[test]
fn jump_of_indicator_field() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let c = Vec3::new(0.5, -1.0, 2.0);
    let t0 = 3;
    let v = s.interpolate_piecewise(|t, _| if t == t0 { c } else { Vec3::zeros() });
    let expect: f64 = m
        .interior_faces()
        .iter()
        .filter(|f| f.minus == t0 || f.plus == Some(t0))
        .map(|f| c.norm_squared() * f.area / f.diameter)
        .sum();
    assert!(rel(assemble_jump(&s).unwrap().eval(&v).unwrap(), expect) < 1e-13);
    assert!(rel(assemble_jump_projected(&s).unwrap().eval(&v).unwrap(), expect) < 1e-12);
    let cg = P2Space::continuous(&m);
    let w = s.to_discontinuous(&s.zero_field()).unwrap();
    assert_eq!(assemble_jump(&s).unwrap().eval(&w).unwrap(), 0.0);
    assert!(assemble_jump(&cg).is_err());
}

#[test]
fn projected_jump_equals_plain_jump_on_p2() {
    let m = gen_cube_mesh(2);
    let s = P2Space::discontinuous(&m);
    let (j, jp) = (assemble_jump(&s).unwrap(), assemble_jump_projected(&s).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let v = s.random_field(&mut rng);
        assert!(rel(jp.eval(&v).unwrap(), j.eval(&v).unwrap()) < 1e-12);
    }
    let c = P2Space::continuous(&m);
    let v = c.to_discontinuous(&c.random_field(&mut rng)).unwrap();
    assert!(j.eval(&v).unwrap() < 1e-26);
}

#[test]
fn phi1_properties() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let (phi1, l2) = (assemble_phi1(&s), assemble_l2(&s));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    assert!(phi1.eval(&s.constant([1.0, 2.0, 3.0])).unwrap().abs() < 1e-14);
    for _ in 0..200 {
        let v = s.random_field(&mut rng);
        let p = phi1.eval(&v).unwrap();
        assert!(p <= l2.eval(&v).unwrap());
        let c: [f64; 3] = core::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let mut vc = v.clone();
        for (a, b) in vc.coeffs.iter_mut().zip(&s.constant(c).coeffs) {
            *a += b;
        }
        assert!(rel(phi1.eval(&vc).unwrap(), p) < 1e-10);
    }
}

fn boundary_mean_free(m: &Mesh, w: CKField) -> CKField {
    let rule = make_quadrature(Domain::Triangle, 4).unwrap();
    let mut int = Vec3::zeros();
    let mut area = 0.0;
    for f in m.boundary_faces() {
        let v: [Vec3; 3] = core::array::from_fn(|k| m.vertex(f.vertices[k]));
        for (fb, wt) in rule.tri_points().zip(rule.weights.iter()) {
            int += w.eval(&(v[0] * fb[0] + v[1] * fb[1] + v[2] * fb[2])) * (wt * 2.0 * f.area);
        }
        area += f.area;
    }
    let b = Vec3::from(w.b) - int / area;
    CKField { b: b.into(), ..w }
}

#[test]
fn phi2_properties() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let (phi2, bl2) = (assemble_phi2(&s).unwrap(), assemble_boundary_l2(&s));
    assert_eq!(phi2.rank_one.len(), 7);
    assert!(phi2.eval(&s.constant([1.0, -1.0, 2.0])).unwrap() < 1e-24);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v = s.random_field(&mut rng);
        assert!(phi2.eval(&v).unwrap() <= bl2.eval(&v).unwrap() * (1.0 + 1e-12));
    }
    for _ in 0..10 {
        let w = boundary_mean_free(&m, CKField::random(&mut rng));
        let v = s.interpolate(|x| w.eval(x));
        assert!(rel(phi2.eval(&v).unwrap(), bl2.eval(&v).unwrap()) < 1e-11);
    }
}

#[test]
fn psi_surrogate_properties() {
    let m = gen_cube_mesh(1);
    let s = P2Space::discontinuous(&m);
    let scale = PsiScale::new(m.domain_diameter());
    let q = assemble_psi_surrogate(&s, scale).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    assert!(q.eval(&s.constant([3.0, 1.0, 2.0])).unwrap() < 1e-24);
    for _ in 0..100 {
        let v = s.random_field(&mut rng);
        let qv = q.eval(&v).unwrap();
        let psi = psi_direct(&s, &v, scale).unwrap();
        assert!(qv <= psi * psi * (1.0 + 1e-12));
        assert!(psi * psi <= 7.0 * qv * (1.0 + 1e-12));
    }
    // Special conformal field on a tet centred at the origin: only curl curl survives.
    let t = single_tet([[-0.25, -0.25, -0.25], [0.75, -0.25, -0.25], [-0.25, 0.75, -0.25], [-0.25, -0.25, 0.75]]).unwrap();
    let st = P2Space::discontinuous(&t);
    let w = CKField { a: [1.0, 0.0, 0.0], ..CKField::zero() };
    let v = st.interpolate(|x| w.eval(x));
    let sc = PsiScale::new(0.8);
    let vol = t.volume();
    let expect = libm::pow(0.8, 2.0 * sc.b) * (8.0 * vol).powi(2);
    assert!(rel(assemble_psi_surrogate(&st, sc).unwrap().eval(&v).unwrap(), expect) < 1e-12);
}
