use alloc::vec::Vec;

use super::Mesh;
use crate::geometry::{self, Vec3};

/// Uniform red refinement: each tet is split into four corner tets and four
/// tets from its interior octahedron, cut along the shortest diagonal.
pub fn refine_red(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices: Vec<[f64; 3]> = mesh.vertices().iter().map(|v| [v.x, v.y, v.z]).collect();
    for e in 0..mesh.num_edges() {
        let m = mesh.midpoint(e);
        vertices.push([m.x, m.y, m.z]);
    }
    let mut tets = Vec::with_capacity(8 * mesh.num_tets());
    for t in 0..mesh.num_tets() {
        let v = mesh.tet(t);
        let mid = |a: usize, b: usize| nv + mesh.edge_id(v[a], v[b]).unwrap();
        let (m01, m02, m03, m12, m13, m23) = (mid(0, 1), mid(0, 2), mid(0, 3), mid(1, 2), mid(1, 3), mid(2, 3));
        let mut children = Vec::with_capacity(8);
        children.push([v[0], m01, m02, m03]);
        children.push([m01, v[1], m12, m13]);
        children.push([m02, m12, v[2], m23]);
        children.push([m03, m13, m23, v[3]]);
        // The octahedron has three diagonals joining opposite edge midpoints.
        // Take the shortest; among equally short ones, the one whose parent
        // edges are shortest. Both criteria are geometric, so the choice does
        // not depend on vertex labels, and on Kuhn meshes all children are
        // again Kuhn tets.
        let diagonals = [(m01, m23), (m02, m13), (m03, m12)];
        let parents = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
        let dist = |a: usize, b: usize| (Vec3::from(vertices[a]) - Vec3::from(vertices[b])).norm();
        let key = |d: usize| {
            let (a, b) = diagonals[d];
            let parent = parents[d].iter().map(|&(i, j)| dist(v[i], v[j])).fold(0.0, f64::max);
            (dist(a, b), parent)
        };
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.max(y);
        let mut best = 0;
        for d in 1..3 {
            let (len, parent) = key(d);
            let (blen, bparent) = key(best);
            if (!close(len, blen) && len < blen) || (close(len, blen) && !close(parent, bparent) && parent < bparent) {
                best = d;
            }
        }
        let (a, b) = diagonals[best];
        // the remaining four midpoints form a cycle around the diagonal
        let ring: [usize; 4] = match best {
            0 => [m02, m03, m13, m12],
            1 => [m01, m03, m23, m12],
            _ => [m01, m02, m23, m13],
        };
        for k in 0..4 {
            children.push([a, b, ring[k], ring[(k + 1) % 4]]);
        }
        for mut c in children {
            let p = c.map(|i| Vec3::from(vertices[i]));
            if geometry::signed_volume(&p) < 0.0 {
                c.swap(2, 3);
            }
            tets.push(c);
        }
    }
    Mesh::new(vertices, tets).expect("red refinement of a valid mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_cube_mesh, reference_tet};

    #[test]
    fn counts_and_volumes() {
        let m = refine_red(&gen_cube_mesh(1));
        assert_eq!(m.num_tets(), 48);
        assert!((m.volume() - 1.0).abs() < 1e-13);
        let r = refine_red(&reference_tet());
        assert_eq!(r.num_tets(), 8);
        for g in r.geoms() {
            assert!((g.volume() - 1.0 / 48.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conforming_and_halving() {
        let base = gen_cube_mesh(1);
        let mut m = base.clone();
        for _ in 0..2 {
            let r = refine_red(&m);
            assert!(r.stars_face_connected());
            assert!(r.h() <= 0.5 * m.h() + 1e-14);
            assert_eq!(r.boundary_faces().len(), 4 * m.boundary_faces().len());
            m = r;
        }
    }

    #[test]
    fn angle_ratio_across_levels() {
        let mut m = gen_cube_mesh(1);
        let a0 = m.min_angle();
        for _ in 0..3 {
            m = refine_red(&m);
            let ratio = m.min_angle() / a0;
            assert!(ratio > 0.5, "min-angle ratio {ratio}");
        }
    }

    #[test]
    fn kuhn_refines_to_kuhn() {
        // Same tets as the directly generated finer Kuhn mesh, as vertex sets.
        let canon = |m: &Mesh| {
            let mut ts: Vec<[[i64; 3]; 4]> = m
                .tets()
                .iter()
                .map(|t| {
                    let mut p = t.map(|v| {
                        let x = m.vertex(v);
                        [0, 1, 2].map(|c| (x[c] * 1024.0).round() as i64)
                    });
                    p.sort();
                    p
                })
                .collect();
            ts.sort();
            ts
        };
        let r = refine_red(&gen_cube_mesh(1));
        assert_eq!(canon(&r), canon(&gen_cube_mesh(2)));
        assert_eq!(canon(&refine_red(&r)), canon(&gen_cube_mesh(4)));
        assert!((r.min_angle() - core::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }
}
