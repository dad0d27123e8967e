//! Piecewise-quadratic vector fields: discontinuous (V) and continuous (W)
//! Lagrange spaces on a tetrahedral mesh.
//!
//! Local dof `3·node + component` of tet `t` maps to `dofmap.tet_dofs[t][3·node + component]`.

mod quadrature;
mod shape;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

pub use quadrature::{make_quadrature, Domain, QuadRule};
pub use shape::{
    p2_shape, p2_shape_all, p2_shape_bary_grad, p2_shape_bary_hess, p2_shape_grad, NODE_BARY, NUM_NODES,
};

use crate::error::{Error, Result};
use crate::geometry::{Mat3, TetGeom, Vec3};
use crate::mesh::Mesh;

/// Default quadrature degree for tets and faces; exact for every form on P2 fields.
pub const DEFAULT_QUAD_DEGREE: usize = 4;

pub const LOCAL_DOFS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DofKind {
    Discontinuous,
    Continuous,
}

impl DofKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DofKind::Discontinuous => "discontinuous",
            DofKind::Continuous => "continuous",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "discontinuous" | "disc" | "dg" => Some(DofKind::Discontinuous),
            "continuous" | "cont" | "cg" => Some(DofKind::Continuous),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub kind: DofKind,
    pub tet_dofs: Vec<[usize; LOCAL_DOFS]>,
    pub ndof: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: DofKind) -> Self {
        let nv = mesh.num_vertices();
        let tet_dofs = (0..mesh.num_tets())
            .map(|t| {
                let nodes: [usize; 10] = match kind {
                    DofKind::Discontinuous => core::array::from_fn(|n| 10 * t + n),
                    DofKind::Continuous => {
                        let v = mesh.tet(t);
                        let e = mesh.tet_edges(t);
                        core::array::from_fn(|n| if n < 4 { v[n] } else { nv + e[n - 4] })
                    }
                };
                core::array::from_fn(|d| 3 * nodes[d / 3] + d % 3)
            })
            .collect();
        let ndof = match kind {
            DofKind::Discontinuous => 30 * mesh.num_tets(),
            DofKind::Continuous => 3 * (nv + mesh.num_edges()),
        };
        Self { kind, tet_dofs, ndof }
    }
}

/// Coefficients of a P2 vector field; node values are point values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    pub kind: DofKind,
    pub coeffs: Vec<f64>,
}

impl FieldVector {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// A P2 field restricted to one tet, with the tet's geometry.
#[derive(Debug, Clone)]
pub struct LocalField {
    pub coeffs: [[f64; 3]; 10],
    pub bary_grads: [Vec3; 4],
}

impl LocalField {
    pub fn new(geom: &TetGeom, coeffs: [[f64; 3]; 10]) -> Self {
        Self { coeffs, bary_grads: geom.bary_gradients() }
    }

    pub fn value(&self, bary: &[f64; 4]) -> Vec3 {
        let n = p2_shape_all(bary);
        let mut v = Vec3::zeros();
        for (k, c) in self.coeffs.iter().enumerate() {
            v += Vec3::from(*c) * n[k];
        }
        v
    }

    /// Jacobian: entry (i, j) is ∂v_i/∂x_j.
    pub fn grad(&self, bary: &[f64; 4]) -> Mat3 {
        let mut g = Mat3::zeros();
        for (k, c) in self.coeffs.iter().enumerate() {
            let d = p2_shape_bary_grad(k, bary);
            let gk = self.bary_grads[0] * d[0]
                + self.bary_grads[1] * d[1]
                + self.bary_grads[2] * d[2]
                + self.bary_grads[3] * d[3];
            g += Vec3::from(*c) * gk.transpose();
        }
        g
    }

    /// Constant Hessians of the three components.
    pub fn hessians(&self) -> [Mat3; 3] {
        let mut h = [Mat3::zeros(); 3];
        for (k, c) in self.coeffs.iter().enumerate() {
            let hb = p2_shape_bary_hess(k);
            let hk = physical_hessian(&hb, &self.bary_grads);
            for (comp, hc) in h.iter_mut().enumerate() {
                *hc += hk * c[comp];
            }
        }
        h
    }
}

/// Maps a Hessian in barycentric variables to physical coordinates.
pub fn physical_hessian(hb: &[[f64; 4]; 4], grads: &[Vec3; 4]) -> Mat3 {
    let mut h = Mat3::zeros();
    for a in 0..4 {
        for b in 0..4 {
            if hb[a][b] != 0.0 {
                h += grads[a] * grads[b].transpose() * hb[a][b];
            }
        }
    }
    h
}

/// Physical gradient of shape function `node` at `bary`.
pub fn shape_gradient(node: usize, bary: &[f64; 4], grads: &[Vec3; 4]) -> Vec3 {
    let d = p2_shape_bary_grad(node, bary);
    grads[0] * d[0] + grads[1] * d[1] + grads[2] * d[2] + grads[3] * d[3]
}

/// A mesh with a P2 dof map.
#[derive(Debug, Clone)]
pub struct P2Space<'m> {
    pub mesh: &'m Mesh,
    pub dofmap: DofMap,
}

impl<'m> P2Space<'m> {
    pub fn new(mesh: &'m Mesh, kind: DofKind) -> Self {
        Self { mesh, dofmap: DofMap::new(mesh, kind) }
    }

    pub fn discontinuous(mesh: &'m Mesh) -> Self {
        Self::new(mesh, DofKind::Discontinuous)
    }

    pub fn continuous(mesh: &'m Mesh) -> Self {
        Self::new(mesh, DofKind::Continuous)
    }

    pub fn kind(&self) -> DofKind {
        self.dofmap.kind
    }

    pub fn ndof(&self) -> usize {
        self.dofmap.ndof
    }

    pub fn zero_field(&self) -> FieldVector {
        FieldVector { kind: self.kind(), coeffs: vec![0.0; self.ndof()] }
    }

    pub fn field(&self, coeffs: Vec<f64>) -> Result<FieldVector> {
        let f = FieldVector { kind: self.kind(), coeffs };
        self.check(&f)?;
        Ok(f)
    }

    pub fn check(&self, field: &FieldVector) -> Result<()> {
        if field.kind != self.kind() {
            return Err(Error::KindMismatch(self.kind().as_str()));
        }
        if field.coeffs.len() != self.ndof() {
            return Err(Error::DofMismatch { expected: self.ndof(), got: field.coeffs.len() });
        }
        Ok(())
    }

    pub fn local_coeffs(&self, coeffs: &[f64], t: usize) -> [[f64; 3]; 10] {
        let dofs = &self.dofmap.tet_dofs[t];
        core::array::from_fn(|n| core::array::from_fn(|c| coeffs[dofs[3 * n + c]]))
    }

    pub fn local(&self, field: &FieldVector, t: usize) -> LocalField {
        LocalField::new(self.mesh.geom(t), self.local_coeffs(&field.coeffs, t))
    }

    fn checked_local(&self, field: &FieldVector, t: usize) -> Result<LocalField> {
        self.check(field)?;
        if t >= self.mesh.num_tets() {
            return Err(Error::InvalidArgument(alloc::format!("tet {t} out of range")));
        }
        Ok(self.local(field, t))
    }

    pub fn eval_field(&self, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<Vec3> {
        Ok(self.checked_local(field, t)?.value(bary))
    }

    pub fn eval_grad(&self, field: &FieldVector, t: usize, bary: &[f64; 4]) -> Result<Mat3> {
        Ok(self.checked_local(field, t)?.grad(bary))
    }

    /// Physical coordinates of local node `n` of tet `t`.
    pub fn node_point(&self, t: usize, n: usize) -> Vec3 {
        self.mesh.geom(t).map(&NODE_BARY[n])
    }

    /// Nodal interpolant of `f`; exact for (piecewise) quadratics.
    pub fn interpolate(&self, f: impl Fn(&Vec3) -> Vec3) -> FieldVector {
        let mut coeffs = vec![0.0; self.ndof()];
        for t in 0..self.mesh.num_tets() {
            let dofs = &self.dofmap.tet_dofs[t];
            for n in 0..10 {
                let v = f(&self.node_point(t, n));
                for c in 0..3 {
                    coeffs[dofs[3 * n + c]] = v[c];
                }
            }
        }
        FieldVector { kind: self.kind(), coeffs }
    }

    /// Interpolates a different function on every tet (a broken field).
    pub fn interpolate_piecewise(&self, f: impl Fn(usize, &Vec3) -> Vec3) -> FieldVector {
        let mut coeffs = vec![0.0; self.ndof()];
        for t in 0..self.mesh.num_tets() {
            let dofs = &self.dofmap.tet_dofs[t];
            for n in 0..10 {
                let v = f(t, &self.node_point(t, n));
                for c in 0..3 {
                    coeffs[dofs[3 * n + c]] = v[c];
                }
            }
        }
        FieldVector { kind: self.kind(), coeffs }
    }

    /// Field with independent uniform coefficients in [-1, 1].
    pub fn random_field<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldVector {
        let coeffs = (0..self.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        FieldVector { kind: self.kind(), coeffs }
    }

    /// Re-expands a continuous field on the discontinuous dof map of the same mesh.
    pub fn to_discontinuous(&self, field: &FieldVector) -> Result<FieldVector> {
        self.check(field)?;
        if self.kind() == DofKind::Discontinuous {
            return Ok(field.clone());
        }
        let mut coeffs = Vec::with_capacity(30 * self.mesh.num_tets());
        for t in 0..self.mesh.num_tets() {
            for d in self.dofmap.tet_dofs[t] {
                coeffs.push(field.coeffs[d]);
            }
        }
        Ok(FieldVector { kind: DofKind::Discontinuous, coeffs })
    }

    /// Constant field with value `c` (each component).
    pub fn constant(&self, c: [f64; 3]) -> FieldVector {
        let c = Vec3::from(c);
        self.interpolate(|_| c)
    }
}
