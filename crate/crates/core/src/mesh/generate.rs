use alloc::vec;
use alloc::vec::Vec;

use super::Mesh;
use crate::error::Result;
use crate::fmath;
use crate::geometry::{self, Vec3};

/// Unit cube split into `n³` cells, each cut into six tets around the main
/// diagonal (Kuhn/Freudenthal subdivision).
///
/// # Panics
/// If `n == 0`.
pub fn gen_cube_mesh(n: usize) -> Mesh {
    scaled_cube_mesh(n, [1.0, 1.0, 1.0]).expect("Kuhn subdivision of a box is valid")
}

/// Kuhn mesh of the box `[0, sx] × [0, sy] × [0, sz]`.
pub fn scaled_cube_mesh(n: usize, scale: [f64; 3]) -> Result<Mesh> {
    assert!(n >= 1, "cube mesh needs at least one cell per direction");
    let np = n + 1;
    let id = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let mut vertices = Vec::with_capacity(np * np * np);
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                vertices.push([
                    scale[0] * i as f64 / n as f64,
                    scale[1] * j as f64 / n as f64,
                    scale[2] * k as f64 / n as f64,
                ]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = [id(c[0], c[1], c[2]); 4];
                    for (s, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    let p = tet.map(|v| Vec3::from(vertices[v]));
                    if geometry::signed_volume(&p) < 0.0 {
                        tet.swap(2, 3);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    Mesh::new(vertices, tets)
}

/// The unit reference tet with vertices 0, e₁, e₂, e₃.
pub fn reference_tet() -> Mesh {
    single_tet([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        .expect("reference tet is valid")
}

/// Regular tetrahedron with unit edge length.
pub fn regular_tet() -> Mesh {
    flattened_tet(fmath::sqrt(2.0 / 3.0))
}

/// Tet over a unit equilateral base in the plane z = 0 with its apex at
/// height `height` above the base centroid. Small heights give flat tets.
pub fn flattened_tet(height: f64) -> Mesh {
    let s3 = fmath::sqrt(3.0);
    single_tet([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.5, s3 / 2.0, 0.0],
        [0.5, s3 / 6.0, height],
    ])
    .expect("flattened tet needs a positive height")
}

/// One-element mesh; vertices are reordered to positive orientation.
pub fn single_tet(points: [[f64; 3]; 4]) -> Result<Mesh> {
    let p = points.map(Vec3::from);
    let tet = if geometry::signed_volume(&p) < 0.0 { [0, 1, 3, 2] } else { [0, 1, 2, 3] };
    Mesh::new(points.to_vec(), vec![tet])
}
