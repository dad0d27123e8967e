//! Affine tetrahedron and triangle geometry.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fmath;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Local vertex pairs of the six tet edges, lexicographic.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local vertices of the face opposite vertex `f`, ascending.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

pub fn signed_volume(p: &[Vec3; 4]) -> f64 {
    (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0]))) / 6.0
}

/// Affine map x = B x̂ + p0 of a tetrahedron, with x̂ in the unit reference tet
/// and barycentric coordinates λ0 = 1 - x̂1 - x̂2 - x̂3, λi = x̂i.
#[derive(Debug, Clone, PartialEq)]
pub struct TetGeom {
    pub vertices: [Vec3; 4],
    pub jacobian: Mat3,
    pub inverse: Mat3,
    pub det: f64,
}

impl TetGeom {
    pub fn new(vertices: [Vec3; 4]) -> Result<Self> {
        let jacobian = Mat3::from_columns(&[
            vertices[1] - vertices[0],
            vertices[2] - vertices[0],
            vertices[3] - vertices[0],
        ]);
        let det = jacobian.determinant();
        let scale = longest_edge(&vertices);
        if det.is_nan() || det.abs() <= 1e-13 * scale * scale * scale {
            return Err(Error::DegenerateTet { tet: 0, volume: det / 6.0 });
        }
        let inverse = jacobian
            .try_inverse()
            .ok_or(Error::DegenerateTet { tet: 0, volume: det / 6.0 })?;
        Ok(Self { vertices, jacobian, inverse, det })
    }

    pub fn from_points(points: [[f64; 3]; 4]) -> Result<Self> {
        Self::new(points.map(Vec3::from))
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() / 6.0
    }

    pub fn centroid(&self) -> Vec3 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2] + self.vertices[3]) / 4.0
    }

    pub fn diameter(&self) -> f64 {
        longest_edge(&self.vertices)
    }

    pub fn map(&self, bary: &[f64; 4]) -> Vec3 {
        self.vertices[0] * bary[0]
            + self.vertices[1] * bary[1]
            + self.vertices[2] * bary[2]
            + self.vertices[3] * bary[3]
    }

    pub fn barycentric(&self, x: &Vec3) -> [f64; 4] {
        let r = self.inverse * (x - self.vertices[0]);
        [1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]]
    }

    /// Physical gradients of the four barycentric coordinates.
    pub fn bary_gradients(&self) -> [Vec3; 4] {
        let it = self.inverse.transpose();
        let g1 = it.column(0).into_owned();
        let g2 = it.column(1).into_owned();
        let g3 = it.column(2).into_owned();
        [-(g1 + g2 + g3), g1, g2, g3]
    }

    /// Outward unit normal and area of local face `f` (opposite vertex `f`).
    pub fn face_normal(&self, f: usize) -> (Vec3, f64) {
        let [i, j, k] = TET_FACES[f];
        let (n, area) = triangle_normal(&self.vertices[i], &self.vertices[j], &self.vertices[k]);
        if n.dot(&(self.vertices[i] - self.vertices[f])) < 0.0 {
            (-n, area)
        } else {
            (n, area)
        }
    }

    /// The six dihedral angles, indexed like [`TET_EDGES`].
    pub fn dihedral_angles(&self) -> [f64; 6] {
        let normals: [Vec3; 4] = core::array::from_fn(|f| self.face_normal(f).0);
        core::array::from_fn(|e| {
            let [i, j] = TET_EDGES[e];
            // the two faces meeting at edge (i, j) are those opposite the other two vertices
            let mut others = (0..4).filter(|&v| v != i && v != j);
            let k = others.next().unwrap();
            let l = others.next().unwrap();
            let c = -normals[k].dot(&normals[l]);
            fmath::acos(c.clamp(-1.0, 1.0))
        })
    }

    pub fn min_dihedral(&self) -> f64 {
        self.dihedral_angles().into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub fn longest_edge(v: &[Vec3; 4]) -> f64 {
    TET_EDGES
        .iter()
        .map(|[i, j]| (v[*i] - v[*j]).norm())
        .fold(0.0, f64::max)
}

/// Unit normal (orientation by the right-hand rule on a, b, c) and area.
pub fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, f64) {
    let cr = (b - a).cross(&(c - a));
    let n = cr.norm();
    (cr / n, 0.5 * n)
}

pub fn triangle_diameter(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (a - b).norm().max((a - c).norm()).max((b - c).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_tet_dihedral() {
        let s = fmath::sqrt(2.0);
        let g = TetGeom::from_points([
            [1.0, 0.0, -1.0 / s],
            [-1.0, 0.0, -1.0 / s],
            [0.0, 1.0, 1.0 / s],
            [0.0, -1.0, 1.0 / s],
        ])
        .unwrap();
        let g = if g.det < 0.0 {
            TetGeom::from_points([
                [-1.0, 0.0, -1.0 / s],
                [1.0, 0.0, -1.0 / s],
                [0.0, 1.0, 1.0 / s],
                [0.0, -1.0, 1.0 / s],
            ])
            .unwrap()
        } else {
            g
        };
        for a in g.dihedral_angles() {
            assert!((a - fmath::acos(1.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn barycentric_roundtrip() {
        let g = TetGeom::from_points([[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.0, 1.0, 0.3], [0.2, 0.1, 1.0]])
            .unwrap();
        let b = [0.1, 0.2, 0.3, 0.4];
        let x = g.map(&b);
        let b2 = g.barycentric(&x);
        for k in 0..4 {
            assert!((b[k] - b2[k]).abs() < 1e-14);
        }
        let grads = g.bary_gradients();
        // ∇λ_k · (v_j - v_0) = δ_kj - δ_k0
        for (k, grad) in grads.iter().enumerate() {
            for j in 1..4 {
                let d = grad.dot(&(g.vertices[j] - g.vertices[0]));
                let expect = (k == j) as i32 as f64 - (k == 0) as i32 as f64;
                assert!((d - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        let r = TetGeom::from_points([[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]);
        assert!(matches!(r, Err(Error::DegenerateTet { .. })));
    }
}
