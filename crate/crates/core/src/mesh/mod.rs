//! Conforming tetrahedral meshes with an oriented face registry.
//!
//! Interior faces carry a "−" tet and a "+" tet with `minus < plus`; the face
//! normal points from the "−" side to the "+" side and jumps are `v₊ − v₋`.
//! Boundary faces carry only the "−" tet and an outward normal.

mod generate;
mod refine;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

pub use generate::{flattened_tet, gen_cube_mesh, reference_tet, regular_tet, scaled_cube_mesh, single_tet};
pub use refine::refine_red;

use crate::error::{Error, Result};
use crate::geometry::{self, TetGeom, Vec3, TET_EDGES, TET_FACES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FaceRef {
    Interior(usize),
    Boundary(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceRecord {
    /// Global vertex ids, ascending.
    pub vertices: [usize; 3],
    pub minus: usize,
    pub minus_local: usize,
    /// `None` on the boundary.
    pub plus: Option<usize>,
    pub plus_local: Option<usize>,
    /// Longest edge.
    pub diameter: f64,
    pub area: f64,
    /// Unit normal from the "−" tet towards the "+" tet (outward on the boundary).
    pub normal: Vec3,
}

impl FaceRecord {
    pub fn is_interior(&self) -> bool {
        self.plus.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    geoms: Vec<TetGeom>,
    interior_faces: Vec<FaceRecord>,
    boundary_faces: Vec<FaceRecord>,
    tet_faces: Vec<[FaceRef; 4]>,
    edges: Vec<[usize; 2]>,
    edge_index: BTreeMap<[usize; 2], usize>,
    tet_edges: Vec<[usize; 6]>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.tets == other.tets
    }
}

impl Mesh {
    /// Builds and validates a mesh. Tets must be positively oriented and the
    /// face incidence must be conforming (every face in one or two tets).
    pub fn new(vertices: Vec<[f64; 3]>, tets: Vec<[usize; 4]>) -> Result<Self> {
        if tets.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let vertices: Vec<Vec3> = vertices.into_iter().map(Vec3::from).collect();
        let nv = vertices.len();
        let mut geoms = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            for (a, &i) in tet.iter().enumerate() {
                if i >= nv {
                    return Err(Error::VertexOutOfRange { tet: t, index: i, nv });
                }
                if tet[..a].contains(&i) {
                    return Err(Error::RepeatedVertex { tet: t, index: i });
                }
            }
            let p = tet.map(|i| vertices[i]);
            let volume = geometry::signed_volume(&p);
            let scale = geometry::longest_edge(&p);
            if volume.abs() <= 1e-13 * scale * scale * scale {
                return Err(Error::DegenerateTet { tet: t, volume });
            }
            if volume < 0.0 {
                return Err(Error::InvertedTet { tet: t, volume });
            }
            let g = TetGeom::new(p).map_err(|_| Error::DegenerateTet { tet: t, volume })?;
            geoms.push(g);
        }

        let mut face_map: BTreeMap<[usize; 3], Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tet) in tets.iter().enumerate() {
            for (f, local) in TET_FACES.iter().enumerate() {
                let mut key = local.map(|l| tet[l]);
                key.sort_unstable();
                face_map.entry(key).or_default().push((t, f));
            }
        }

        let mut interior_faces = Vec::new();
        let mut boundary_faces = Vec::new();
        let mut tet_faces = vec![[FaceRef::Boundary(usize::MAX); 4]; tets.len()];
        for (key, owners) in face_map {
            let [a, b, c] = key.map(|i| vertices[i]);
            let diameter = geometry::triangle_diameter(&a, &b, &c);
            match owners.as_slice() {
                [(t, f)] => {
                    let (normal, area) = geoms[*t].face_normal(*f);
                    tet_faces[*t][*f] = FaceRef::Boundary(boundary_faces.len());
                    boundary_faces.push(FaceRecord {
                        vertices: key,
                        minus: *t,
                        minus_local: *f,
                        plus: None,
                        plus_local: None,
                        diameter,
                        area,
                        normal,
                    });
                }
                [(t0, f0), (t1, f1)] => {
                    let ((tm, fm), (tp, fp)) = if t0 < t1 { ((*t0, *f0), (*t1, *f1)) } else { ((*t1, *f1), (*t0, *f0)) };
                    let (normal, area) = geoms[tm].face_normal(fm);
                    let id = interior_faces.len();
                    tet_faces[tm][fm] = FaceRef::Interior(id);
                    tet_faces[tp][fp] = FaceRef::Interior(id);
                    interior_faces.push(FaceRecord {
                        vertices: key,
                        minus: tm,
                        minus_local: fm,
                        plus: Some(tp),
                        plus_local: Some(fp),
                        diameter,
                        area,
                        normal,
                    });
                }
                _ => {
                    return Err(Error::NonConformingFace {
                        vertices: key,
                        tets: owners.iter().map(|(t, _)| *t).collect(),
                    })
                }
            }
        }

        let mut edge_index = BTreeMap::new();
        for tet in &tets {
            for [i, j] in TET_EDGES {
                let (a, b) = (tet[i].min(tet[j]), tet[i].max(tet[j]));
                let next = edge_index.len();
                edge_index.entry([a, b]).or_insert(next);
            }
        }
        // renumber edges in sorted order so ids do not depend on tet order
        let edges: Vec<[usize; 2]> = edge_index.keys().copied().collect();
        for (id, e) in edges.iter().enumerate() {
            *edge_index.get_mut(e).unwrap() = id;
        }
        let tet_edges = tets
            .iter()
            .map(|tet| {
                TET_EDGES.map(|[i, j]| {
                    let key = [tet[i].min(tet[j]), tet[i].max(tet[j])];
                    edge_index[&key]
                })
            })
            .collect();

        Ok(Self {
            vertices,
            tets,
            geoms,
            interior_faces,
            boundary_faces,
            tet_faces,
            edges,
            edge_index,
            tet_edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn tet(&self, t: usize) -> [usize; 4] {
        self.tets[t]
    }

    pub fn geom(&self, t: usize) -> &TetGeom {
        &self.geoms[t]
    }

    pub fn geoms(&self) -> &[TetGeom] {
        &self.geoms
    }

    pub fn interior_faces(&self) -> &[FaceRecord] {
        &self.interior_faces
    }

    pub fn boundary_faces(&self) -> &[FaceRecord] {
        &self.boundary_faces
    }

    pub fn tet_faces(&self, t: usize) -> [FaceRef; 4] {
        self.tet_faces[t]
    }

    pub fn face(&self, r: FaceRef) -> &FaceRecord {
        match r {
            FaceRef::Interior(i) => &self.interior_faces[i],
            FaceRef::Boundary(i) => &self.boundary_faces[i],
        }
    }

    /// Edge list, each as an ascending vertex pair. Edge `e` has midpoint id `e`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&[a.min(b), a.max(b)]).copied()
    }

    /// Global edge ids of the six local edges of tet `t`.
    pub fn tet_edges(&self, t: usize) -> [usize; 6] {
        self.tet_edges[t]
    }

    pub fn midpoint(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        (self.vertices[a] + self.vertices[b]) * 0.5
    }

    pub fn volume(&self) -> f64 {
        self.geoms.iter().map(TetGeom::volume).sum()
    }

    /// Largest tet diameter.
    pub fn h(&self) -> f64 {
        self.geoms.iter().map(TetGeom::diameter).fold(0.0, f64::max)
    }

    /// Minimum dihedral angle over all tets, in radians.
    pub fn min_angle(&self) -> f64 {
        self.geoms.iter().map(TetGeom::min_dihedral).fold(f64::INFINITY, f64::min)
    }

    /// Longest distance between two vertices (domain diameter for convex domains).
    pub fn domain_diameter(&self) -> f64 {
        let bf = &self.boundary_faces;
        let mut pts: Vec<usize> = bf.iter().flat_map(|f| f.vertices).collect();
        pts.sort_unstable();
        pts.dedup();
        let mut d: f64 = 0.0;
        for (k, &i) in pts.iter().enumerate() {
            for &j in &pts[k + 1..] {
                d = d.max((self.vertices[i] - self.vertices[j]).norm());
            }
        }
        d
    }

    /// Tets containing vertex `p` (the star 𝒯_p), ascending.
    pub fn vertex_star(&self, p: usize) -> Vec<usize> {
        (0..self.tets.len()).filter(|&t| self.tets[t].contains(&p)).collect()
    }

    /// Tets containing edge `e` (the star 𝒯_m of its midpoint), ascending.
    pub fn edge_star(&self, e: usize) -> Vec<usize> {
        (0..self.tets.len()).filter(|&t| self.tet_edges[t].contains(&e)).collect()
    }

    /// Per-vertex stars for all vertices at once.
    pub fn vertex_stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.vertices.len()];
        for (t, tet) in self.tets.iter().enumerate() {
            for &v in tet {
                stars[v].push(t);
            }
        }
        stars
    }

    pub fn edge_stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.edges.len()];
        for (t, es) in self.tet_edges.iter().enumerate() {
            for &e in es {
                stars[e].push(t);
            }
        }
        stars
    }

    /// Interior faces having `p` as a vertex (Ξ_p).
    pub fn faces_at_vertex(&self, p: usize) -> Vec<usize> {
        (0..self.interior_faces.len())
            .filter(|&f| self.interior_faces[f].vertices.contains(&p))
            .collect()
    }

    /// Interior faces containing edge `e` (Ξ_m for its midpoint).
    pub fn faces_at_edge(&self, e: usize) -> Vec<usize> {
        let [a, b] = self.edges[e];
        (0..self.interior_faces.len())
            .filter(|&f| {
                let v = &self.interior_faces[f].vertices;
                v.contains(&a) && v.contains(&b)
            })
            .collect()
    }

    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (f, face) in self.interior_faces.iter().enumerate() {
            for &v in &face.vertices {
                out[v].push(f);
            }
        }
        out
    }

    pub fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (f, face) in self.interior_faces.iter().enumerate() {
            let v = face.vertices;
            for (a, b) in [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])] {
                out[self.edge_id(a, b).unwrap()].push(f);
            }
        }
        out
    }

    /// True when the tets of `star` are connected through the interior faces `faces`.
    pub fn star_connected(&self, star: &[usize], faces: &[usize]) -> bool {
        if star.is_empty() {
            return true;
        }
        let mut seen = vec![false; star.len()];
        let pos = |t: usize| star.iter().position(|&s| s == t);
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &f in faces {
                let face = &self.interior_faces[f];
                let (m, p) = (face.minus, face.plus.unwrap());
                let other = if m == star[k] {
                    p
                } else if p == star[k] {
                    m
                } else {
                    continue;
                };
                if let Some(j) = pos(other) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Checks face-connectedness of every vertex star and every edge star.
    pub fn stars_face_connected(&self) -> bool {
        let vs = self.vertex_stars();
        let vf = self.vertex_faces();
        let es = self.edge_stars();
        let ef = self.edge_faces();
        vs.iter().zip(&vf).all(|(s, f)| self.star_connected(s, f))
            && es.iter().zip(&ef).all(|(s, f)| self.star_connected(s, f))
    }

    /// Largest ratio diam T / diam σ over interior faces σ and the tets of
    /// the vertex stars of σ's vertices.
    pub fn diameter_ratio(&self) -> f64 {
        let stars = self.vertex_stars();
        let mut worst: f64 = 1.0;
        for face in &self.interior_faces {
            for &v in &face.vertices {
                for &t in &stars[v] {
                    worst = worst.max(self.geoms[t].diameter() / face.diameter);
                }
            }
        }
        worst
    }

    /// Returns a copy with every vertex mapped through `f`. Fails if the map
    /// inverts or collapses a tet.
    pub fn mapped(&self, f: impl Fn(Vec3) -> [f64; 3]) -> Result<Mesh> {
        Mesh::new(self.vertices.iter().map(|&v| f(v)).collect(), self.tets.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn kuhn_counts() {
        let m = gen_cube_mesh(1);
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_tets(), 6);
        assert_eq!(m.interior_faces().len(), 6);
        assert_eq!(m.boundary_faces().len(), 12);
        let m2 = gen_cube_mesh(2);
        assert_eq!(m2.num_tets(), 48);
        assert_eq!(m2.num_vertices(), 27);
    }

    #[test]
    fn face_convention_and_registry() {
        let m = gen_cube_mesh(2);
        for (i, f) in m.interior_faces().iter().enumerate() {
            let plus = f.plus.unwrap();
            assert!(f.minus < plus);
            assert!(f.diameter > 0.0 && f.area > 0.0);
            assert_eq!(m.tet_faces(f.minus)[f.minus_local], FaceRef::Interior(i));
            assert_eq!(m.tet_faces(plus)[f.plus_local.unwrap()], FaceRef::Interior(i));
            // normal points into the plus tet
            let c = m.geom(plus).centroid() - m.geom(f.minus).centroid();
            assert!(f.normal.dot(&c) > 0.0);
        }
        for t in 0..m.num_tets() {
            for (lf, r) in m.tet_faces(t).iter().enumerate() {
                let face = m.face(*r);
                let named = face.minus == t && face.minus_local == lf
                    || face.plus == Some(t) && face.plus_local == Some(lf);
                assert!(named);
            }
        }
    }

    #[test]
    fn kuhn_min_angle_is_quarter_pi() {
        assert!((gen_cube_mesh(1).min_angle() - PI / 4.0).abs() < 1e-12);
        assert!((gen_cube_mesh(3).min_angle() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn regular_tet_angle() {
        let m = regular_tet();
        assert!((m.min_angle() - libm::acos(1.0 / 3.0)).abs() < 1e-12);
        assert!((m.min_angle() - 1.2310).abs() < 1e-4);
    }

    #[test]
    fn flattening_decreases_angle() {
        let mut last = f64::INFINITY;
        for h in [1.0, 0.5, 0.25, 0.1, 0.05, 0.01] {
            let a = flattened_tet(h).min_angle();
            assert!(a < last);
            last = a;
        }
    }

    #[test]
    fn volume_and_stars() {
        let m = gen_cube_mesh(3);
        assert!((m.volume() - 1.0).abs() < 1e-12);
        assert!(m.stars_face_connected());
        let r = m.diameter_ratio();
        assert!(r.is_finite() && r >= 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 2, 1, 3]]), Err(Error::InvertedTet { tet: 0, .. })));
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 2, 7]]), Err(Error::VertexOutOfRange { .. })));
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 1, 3]]), Err(Error::RepeatedVertex { .. })));
        let flat = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(Mesh::new(flat, vec![[0, 1, 2, 3]]), Err(Error::DegenerateTet { .. })));
        // three tets on one face
        let v3 = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [0.2, 0.2, 2.0],
        ];
        let r = Mesh::new(v3, vec![[0, 1, 2, 3], [0, 2, 1, 4], [0, 1, 2, 5]]);
        assert!(matches!(r, Err(Error::NonConformingFace { .. })));
    }
}
