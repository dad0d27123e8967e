use crate::error::{Error, Result};
use crate::fespace::{FieldVector, P2Space};
use crate::geometry::Vec3;
use crate::mesh::{FaceRef, Mesh};

/// Barycentric coordinates in tet `t` of the point with barycentric
/// coordinates `fb` on the triangle `face_vertices` (global ids, any order).
pub fn face_tet_bary(mesh: &Mesh, face_vertices: &[usize; 3], t: usize, fb: &[f64; 3]) -> [f64; 4] {
    let tet = mesh.tet(t);
    let mut bary = [0.0; 4];
    for (k, v) in face_vertices.iter().enumerate() {
        let local = tet.iter().position(|x| x == v).expect("face vertex not in tet");
        bary[local] = fb[k];
    }
    bary
}

/// [[v]]_σ = v₊ − v₋ at the face point with barycentric coordinates `fb`
/// relative to the face's ascending vertex ids.
pub fn jump(space: &P2Space, field: &FieldVector, face: FaceRef, fb: &[f64; 3]) -> Result<Vec3> {
    let f = match face {
        FaceRef::Interior(i) => &space.mesh.interior_faces()[i],
        FaceRef::Boundary(i) => return Err(Error::BoundaryFace(i)),
    };
    let plus = f.plus.expect("interior face has two sides");
    let vp = space.eval_field(field, plus, &face_tet_bary(space.mesh, &f.vertices, plus, fb))?;
    let vm = space.eval_field(field, f.minus, &face_tet_bary(space.mesh, &f.vertices, f.minus, fb))?;
    Ok(vp - vm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::tri_p2_shape_all;
    use crate::mesh::gen_cube_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn continuous_field_has_no_jump() {
        let m = gen_cube_mesh(2);
        let c = P2Space::continuous(&m);
        let d = P2Space::discontinuous(&m);
        let f = c.random_field(&mut ChaCha8Rng::seed_from_u64(4));
        let g = c.to_discontinuous(&f).unwrap();
        let scale = f.max_abs();
        for i in 0..m.interior_faces().len() {
            for fb in [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.2, 0.3, 0.5]] {
                assert!(jump(&d, &g, FaceRef::Interior(i), &fb).unwrap().amax() <= 1e-13 * scale);
                assert!(jump(&c, &f, FaceRef::Interior(i), &fb).unwrap().amax() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn indicator_field_sign_convention() {
        let m = gen_cube_mesh(1);
        let d = P2Space::discontinuous(&m);
        let cval = Vec3::new(1.0, -2.0, 3.0);
        let t0 = 2;
        let f = d.interpolate_piecewise(|t, _| if t == t0 { cval } else { Vec3::zeros() });
        for (i, face) in m.interior_faces().iter().enumerate() {
            let j = jump(&d, &f, FaceRef::Interior(i), &[0.3, 0.3, 0.4]).unwrap();
            let expect = if face.plus == Some(t0) {
                cval
            } else if face.minus == t0 {
                -cval
            } else {
                Vec3::zeros()
            };
            assert!((j - expect).norm() < 1e-13);
        }
        assert_eq!(jump(&d, &f, FaceRef::Boundary(0), &[1.0, 0.0, 0.0]), Err(Error::BoundaryFace(0)));
    }

    #[test]
    fn jump_is_quadratic_on_face() {
        let m = gen_cube_mesh(1);
        let d = P2Space::discontinuous(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = d.random_field(&mut rng);
        let nodes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];
        for i in 0..m.interior_faces().len() {
            let samples: [Vec3; 6] = core::array::from_fn(|k| jump(&d, &f, FaceRef::Interior(i), &nodes[k]).unwrap());
            let mut fb = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let s: f64 = fb.iter().sum();
            fb.iter_mut().for_each(|x| *x /= s);
            let phi = tri_p2_shape_all(&fb);
            let predicted: Vec3 = (0..6).map(|k| samples[k] * phi[k]).sum();
            let actual = jump(&d, &f, FaceRef::Interior(i), &fb).unwrap();
            assert!((predicted - actual).norm() < 1e-12);
        }
    }
}
