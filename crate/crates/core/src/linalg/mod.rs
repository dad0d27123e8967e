//! Dense and sparse symmetric linear algebra used by the eigen solvers.

mod dense;
mod sparse;

pub use dense::{deflate_two_sided, generalized_eigen, GeneralizedEigen, Householder};
pub use sparse::{pcg, rcm_ordering, CsrMatrix, EnvelopeCholesky, PcgStats};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    crate::fmath::sqrt(dot(a, a))
}
