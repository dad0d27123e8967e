//! Nodal jump sums and the sharp constant of the nodal enrichment bound.

use nalgebra::{DMatrix, DVector};

use crate::fespace::{FieldVector, P2Space};
use crate::geometry::Vec3;
use crate::mesh::Mesh;

/// The two kinds of Lagrange nodes of the P2 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex,
    Midpoint,
}

/// Local node index (0..10) of global vertex or edge `id` in tet `t`.
pub(crate) fn local_node(mesh: &Mesh, kind: NodeKind, t: usize, id: usize) -> Option<usize> {
    match kind {
        NodeKind::Vertex => mesh.tet(t).iter().position(|&v| v == id),
        NodeKind::Midpoint => mesh.tet_edges(t).iter().position(|&e| e == id).map(|j| 4 + j),
    }
}

/// Value of a discontinuous field at a node, as seen from tet `t`.
pub(crate) fn node_value(space: &P2Space, v: &FieldVector, t: usize, local: usize) -> Vec3 {
    let d = &space.dofmap.tet_dofs[t];
    Vec3::new(v.coeffs[d[3 * local]], v.coeffs[d[3 * local + 1]], v.coeffs[d[3 * local + 2]])
}

/// Σ_σ diam(σ)^power (Σ_{p ∈ V(σ)} |[[v]](p)|² + Σ_{m ∈ M(σ)} |[[v]](m)|²)
/// over interior faces, for a discontinuous field.
pub fn nodal_jump_sum(space: &P2Space, v: &FieldVector, power: i32) -> f64 {
    let mesh = space.mesh;
    let mut total = 0.0;
    for face in mesh.interior_faces() {
        let (tm, tp) = (face.minus, face.plus.expect("interior face"));
        let [a, b, c] = face.vertices;
        let edges = [(a, b), (a, c), (b, c)].map(|(x, y)| mesh.edge_id(x, y).expect("face edge"));
        let nodes = face.vertices.iter().map(|&p| (NodeKind::Vertex, p)).chain(edges.iter().map(|&e| (NodeKind::Midpoint, e)));
        let mut s = 0.0;
        for (kind, id) in nodes {
            let lm = local_node(mesh, kind, tm, id).expect("node of minus tet");
            let lp = local_node(mesh, kind, tp, id).expect("node of plus tet");
            s += (node_value(space, v, tp, lp) - node_value(space, v, tm, lm)).norm_squared();
        }
        total += pow_i(face.diameter, power) * s;
    }
    total
}

fn pow_i(x: f64, k: i32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k.unsigned_abs() {
        r *= x;
    }
    if k < 0 { 1.0 / r } else { r }
}

/// Best constant c in |v_T(p) − (Ev)(p)|² ≤ c Σ_{σ ∈ Ξ_p} |[[v]]_σ(p)|² over
/// all nodes of the given kind, with E the nodal average.
///
/// For a star of k tets with face-adjacency graph Laplacian L, the nodal
/// values u satisfy v_T(p) − Ev(p) = g_Tᵀu with g_T = e_T − 1/k, and the jump
/// sum is uᵀLu; since g_T ⊥ 1 the supremum of the ratio is g_Tᵀ L⁺ g_T.
pub fn lemma1_sharp_constant(mesh: &Mesh, kind: NodeKind) -> f64 {
    let (stars, faces) = match kind {
        NodeKind::Vertex => (mesh.vertex_stars(), mesh.vertex_faces()),
        NodeKind::Midpoint => (mesh.edge_stars(), mesh.edge_faces()),
    };
    let mut worst: f64 = 0.0;
    for (star, fs) in stars.iter().zip(&faces) {
        let k = star.len();
        if k < 2 {
            continue;
        }
        let pos = |t: usize| star.iter().position(|&s| s == t).expect("face tet in star");
        let kf = k as f64;
        // L + 11ᵀ/k is definite for a connected star and inverts L on 1^⊥.
        let mut l = DMatrix::from_element(k, k, 1.0 / kf);
        for &f in fs {
            let face = &mesh.interior_faces()[f];
            let (i, j) = (pos(face.minus), pos(face.plus.expect("interior face")));
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
            l[(i, j)] -= 1.0;
            l[(j, i)] -= 1.0;
        }
        let Some(chol) = l.cholesky() else {
            return f64::INFINITY;
        };
        for t in 0..k {
            let g = DVector::from_fn(k, |i, _| if i == t { 1.0 } else { 0.0 } - 1.0 / kf);
            worst = worst.max(g.dot(&chol.solve(&g)));
        }
    }
    worst
}

/// Largest |v_T(p) − (Ev)(p)|² / Σ_{σ ∈ Ξ_p} |[[v]]_σ(p)|² over nodes of the
/// given kind and tets of their stars. Nodes with no jumps are skipped when
/// the numerator vanishes too; otherwise the ratio is infinite.
pub(crate) fn lemma1_ratio(space: &P2Space, v: &FieldVector, ev_dg: &FieldVector, kind: NodeKind) -> f64 {
    let mesh = space.mesh;
    let (stars, faces) = match kind {
        NodeKind::Vertex => (mesh.vertex_stars(), mesh.vertex_faces()),
        NodeKind::Midpoint => (mesh.edge_stars(), mesh.edge_faces()),
    };
    let mut worst: f64 = 0.0;
    for (id, (star, fs)) in stars.iter().zip(&faces).enumerate() {
        let mut den = 0.0;
        for &f in fs {
            let face = &mesh.interior_faces()[f];
            let tp = face.plus.expect("interior face");
            let lm = local_node(mesh, kind, face.minus, id).expect("node in face tet");
            let lp = local_node(mesh, kind, tp, id).expect("node in face tet");
            den += (node_value(space, v, tp, lp) - node_value(space, v, face.minus, lm)).norm_squared();
        }
        for &t in star {
            let l = local_node(mesh, kind, t, id).expect("node in star tet");
            let num = (node_value(space, v, t, l) - node_value(space, ev_dg, t, l)).norm_squared();
            if num == 0.0 {
                continue;
            }
            worst = worst.max(if den > 0.0 { num / den } else { f64::INFINITY });
        }
    }
    worst
}
