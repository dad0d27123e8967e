//! Squared (semi)norms on P2 fields as factored quadratic forms.
//!
//! A form is a sum of element/face blocks, each contributing |G x_loc|², plus
//! signed rank-one terms s·(uᵀx)². Values are computed through the factors,
//! which keeps them accurate near the kernel where xᵀKx would cancel.

mod assemble;
mod seminorms;
#[cfg(test)]
mod tests;

pub use assemble::{
    assemble_boundary_l2, assemble_h1, assemble_h2_broken, assemble_hess, assemble_jump, assemble_jump_projected,
    assemble_l2, assemble_tf,
};
pub use seminorms::{assemble_phi1, assemble_phi2, assemble_psi_surrogate, constant_mass_functionals, psi_direct, PsiScale};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fespace::{DofKind, FieldVector};
use crate::linalg::{dot, CsrMatrix};

/// One element or face contribution |G x[dofs]|², G stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBlock {
    pub dofs: Vec<usize>,
    pub rows: usize,
    pub factor: Vec<f64>,
}

impl FactorBlock {
    pub fn new(dofs: Vec<usize>, rows: usize) -> Self {
        let m = dofs.len();
        Self { dofs, rows, factor: vec![0.0; rows * m] }
    }

    fn cols(&self) -> usize {
        self.dofs.len()
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let m = self.cols();
        &mut self.factor[r * m..(r + 1) * m]
    }

    fn local(&self, x: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&d| x[d]).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let xl = self.local(x);
        self.factor.chunks_exact(self.cols()).map(|row| sq(dot(row, &xl))).sum()
    }

    /// Local matrix GᵀG.
    pub fn gram(&self) -> DMatrix<f64> {
        let g = DMatrix::from_row_slice(self.rows, self.cols(), &self.factor);
        g.tr_mul(&g)
    }

    fn scale(&mut self, s: f64) {
        self.factor.iter_mut().for_each(|x| *x *= s);
    }
}

/// Rank-one term weight·(uᵀx)²; the weight may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    pub weight: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub label: String,
    pub kind: DofKind,
    pub ndof: usize,
    pub quad_degree: usize,
    pub blocks: Vec<FactorBlock>,
    pub rank_one: Vec<RankOne>,
}

impl QuadraticForm {
    pub fn empty(label: &str, kind: DofKind, ndof: usize, quad_degree: usize) -> Self {
        Self { label: label.into(), kind, ndof, quad_degree, blocks: Vec::new(), rank_one: Vec::new() }
    }

    /// Sum of forms on the same dof map.
    pub fn sum(label: &str, parts: &[&QuadraticForm]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty form sum".into()))?;
        let mut out = Self::empty(label, first.kind, first.ndof, 0);
        for p in parts {
            if p.ndof != out.ndof {
                return Err(Error::DofMismatch { expected: out.ndof, got: p.ndof });
            }
            if p.kind != out.kind {
                return Err(Error::KindMismatch(out.kind.as_str()));
            }
            out.quad_degree = out.quad_degree.max(p.quad_degree);
            out.blocks.extend(p.blocks.iter().cloned());
            out.rank_one.extend(p.rank_one.iter().cloned());
        }
        Ok(out)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        let s = crate::fmath::sqrt(c);
        self.blocks.iter_mut().for_each(|b| b.scale(s));
        self.rank_one.iter_mut().for_each(|t| t.weight *= c);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn has_rank_one(&self) -> bool {
        !self.rank_one.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.ndof {
            return Err(Error::DofMismatch { expected: self.ndof, got: n });
        }
        Ok(())
    }

    /// xᵀ F x.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        let blocks: f64 = self.blocks.iter().map(|b| b.value(x)).sum();
        let low: f64 = self.rank_one.iter().map(|t| t.weight * sq(dot(&t.vector, x))).sum();
        Ok(blocks + low)
    }

    pub fn eval(&self, field: &FieldVector) -> Result<f64> {
        if field.kind != self.kind {
            return Err(Error::KindMismatch(self.kind.as_str()));
        }
        self.value(&field.coeffs)
    }

    /// y = F x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        y.iter_mut().for_each(|v| *v = 0.0);
        for b in &self.blocks {
            let xl = b.local(x);
            for row in b.factor.chunks_exact(b.cols()) {
                let s = dot(row, &xl);
                for (k, &d) in b.dofs.iter().enumerate() {
                    y[d] += s * row[k];
                }
            }
        }
        self.apply_rank_one(x, y);
        Ok(())
    }

    /// y += Σ wᵢ uᵢ (uᵢᵀ x).
    pub fn apply_rank_one(&self, x: &[f64], y: &mut [f64]) {
        for t in &self.rank_one {
            crate::linalg::axpy(t.weight * dot(&t.vector, x), &t.vector, y);
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.ndof, self.ndof);
        for b in &self.blocks {
            let g = b.gram();
            for (i, &di) in b.dofs.iter().enumerate() {
                for (j, &dj) in b.dofs.iter().enumerate() {
                    m[(di, dj)] += g[(i, j)];
                }
            }
        }
        for t in &self.rank_one {
            let u = nalgebra::DVector::from_column_slice(&t.vector);
            m.ger(t.weight, &u, &u, 1.0);
        }
        m
    }

    /// The block (sparse) part only; rank-one terms are left out.
    pub fn sparse_part(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.ndof, self.block_triplets())
    }

    fn block_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for b in &self.blocks {
            let g = b.gram();
            for (i, &di) in b.dofs.iter().enumerate() {
                for (j, &dj) in b.dofs.iter().enumerate() {
                    t.push((di, dj, g[(i, j)]));
                }
            }
        }
        t
    }

    /// Upper-triangle entries (i ≤ j) of the full matrix, rank-one terms included,
    /// sorted by (i, j) and with exact zeros dropped.
    pub fn upper_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t: Vec<(usize, usize, f64)> = self.block_triplets().into_iter().filter(|&(i, j, _)| i <= j).collect();
        for r in &self.rank_one {
            let nz: Vec<usize> = (0..self.ndof).filter(|&i| r.vector[i] != 0.0).collect();
            for (a, &i) in nz.iter().enumerate() {
                for &j in &nz[a..] {
                    t.push((i, j, r.weight * r.vector[i] * r.vector[j]));
                }
            }
        }
        let csr = CsrMatrix::from_triplets(self.ndof, t);
        let mut out = Vec::with_capacity(csr.nnz());
        for i in 0..csr.n {
            for (j, v) in csr.row(i) {
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

fn sq(x: f64) -> f64 {
    x * x
}
