use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fmath::sqrt;

/// Product H₀ H₁ … H_{k−1} of Householder reflectors whose trailing n − k
/// columns span the orthogonal complement of the columns it was built from.
#[derive(Debug, Clone)]
pub struct Householder {
    n: usize,
    vectors: Vec<DVector<f64>>,
}

impl Householder {
    /// Reflectors triangularizing `c` (n × k, full column rank).
    pub fn new(c: &DMatrix<f64>) -> Result<Self> {
        let (n, k) = c.shape();
        let mut work = c.clone();
        let mut vectors = Vec::with_capacity(k);
        for j in 0..k {
            let mut v = DVector::zeros(n);
            for i in j..n {
                v[i] = work[(i, j)];
            }
            let alpha = v.norm();
            if alpha == 0.0 {
                return Err(Error::InvalidArgument("deflation basis is rank deficient".into()));
            }
            v[j] += if v[j] >= 0.0 { alpha } else { -alpha };
            let vn = v.norm_squared();
            v /= sqrt(vn);
            for col in j..k {
                let d: f64 = (j..n).map(|i| v[i] * work[(i, col)]).sum();
                for i in j..n {
                    work[(i, col)] -= 2.0 * d * v[i];
                }
            }
            vectors.push(v);
        }
        Ok(Self { n, vectors })
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Maps complement coordinates y (length n − k) to x = Q [0; y].
    pub fn expand(&self, y: &DVector<f64>) -> DVector<f64> {
        let k = self.rank();
        let mut x = DVector::zeros(self.n);
        x.rows_mut(k, self.n - k).copy_from(y);
        for v in self.vectors.iter().rev() {
            let d = v.dot(&x);
            x.axpy(-2.0 * d, v, 1.0);
        }
        x
    }
}

/// Trailing block of Qᵀ A Q, i.e. A restricted to the complement.
pub fn deflate_two_sided(a: &DMatrix<f64>, h: &Householder) -> DMatrix<f64> {
    let mut m = a.clone();
    let n = m.nrows();
    for v in &h.vectors {
        // Left: M ← (I − 2vvᵀ) M, then right: M ← M (I − 2vvᵀ).
        let w = m.tr_mul(v);
        for j in 0..n {
            let s = 2.0 * w[j];
            if s != 0.0 {
                let mut col = m.column_mut(j);
                col.axpy(-s, v, 1.0);
            }
        }
        let u = &m * v;
        m.ger(-2.0, &u, v, 1.0);
    }
    let k = h.rank();
    m.view((k, k), (n - k, n - k)).into_owned()
}

/// Cholesky pivots below this fraction of the largest diagonal entry mark the
/// right-hand matrix as numerically singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Largest λ with A x = λ R x.
    pub lambda_max: f64,
    /// Smallest λ.
    pub lambda_min: f64,
    /// Eigenvector of `lambda_max`, normalized so that xᵀ R x = 1.
    pub vector: DVector<f64>,
    /// Smallest Cholesky pivot of R (a definiteness margin).
    pub min_pivot: f64,
}

/// Extremal eigenpairs of the symmetric-definite pencil (A, R).
pub fn generalized_eigen(a: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = r.nrows();
    let l = cholesky_lower(r)?;
    let (imin, min_pivot) =
        (0..n).map(|i| (i, l[(i, i)] * l[(i, i)])).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    // Cholesky of a semidefinite matrix may succeed on roundoff-sized pivots.
    let scale = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if min_pivot <= SINGULAR_PIVOT * scale {
        return Err(Error::IndefiniteRhs { index: imin, pivot: min_pivot });
    }
    // C = L⁻¹ A L⁻ᵀ
    let mut c = a.clone();
    solve_lower_in_place(&l, &mut c);
    let mut ct = c.transpose();
    solve_lower_in_place(&l, &mut ct);
    let c = (&ct + ct.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let (imax, lambda_max) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut y = eig.eigenvectors.column(imax).into_owned();
    l.tr_solve_lower_triangular_mut(&mut y);
    Ok(GeneralizedEigen { lambda_max, lambda_min, vector: y, min_pivot })
}

fn cholesky_lower(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(c) = r.clone().cholesky() {
        return Ok(c.unpack());
    }
    // Locate the failing pivot for the diagnostic.
    let n = r.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let d = r[(j, j)] - l.row(j).columns(0, j).norm_squared();
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::IndefiniteRhs { index: j, pivot: d });
        }
        let dj = sqrt(d);
        l[(j, j)] = dj;
        for i in j + 1..n {
            let s = r[(i, j)] - l.row(i).columns(0, j).dot(&l.row(j).columns(0, j));
            l[(i, j)] = s / dj;
        }
    }
    Err(Error::IndefiniteRhs { index: n, pivot: 0.0 })
}

/// B ← L⁻¹ B for lower-triangular L.
fn solve_lower_in_place(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    l.solve_lower_triangular_mut(b);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        g.tr_mul(&g) + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn complement_is_orthogonal_to_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = DMatrix::from_fn(12, 3, |_, _| rng.random_range(-1.0..1.0));
        let h = Householder::new(&c).unwrap();
        for j in 0..9 {
            let mut y = DVector::zeros(9);
            y[j] = 1.0;
            let x = h.expand(&y);
            assert!((x.norm() - 1.0).abs() < 1e-13);
            assert!(c.tr_mul(&x).norm() < 1e-13);
        }
        let a = random_spd(12, &mut rng);
        let az = deflate_two_sided(&a, &h);
        let mut y = DVector::zeros(9);
        y[2] = 1.0;
        y[5] = -0.5;
        let x = h.expand(&y);
        assert!(((y.transpose() * &az * &y)[0] - (x.transpose() * &a * &x)[0]).abs() < 1e-12);
    }

    #[test]
    fn generalized_eigen_matches_rayleigh_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_spd(10, &mut rng);
        let r = random_spd(10, &mut rng);
        let e = generalized_eigen(&a, &r).unwrap();
        let x = &e.vector;
        let q = (x.transpose() * &a * x)[0] / (x.transpose() * &r * x)[0];
        assert!((q - e.lambda_max).abs() < 1e-10 * e.lambda_max);
        let resid = &a * x - &r * x * e.lambda_max;
        assert!(resid.norm() < 1e-9 * e.lambda_max);
        assert!(e.lambda_min <= e.lambda_max);
        let id = DMatrix::identity(10, 10);
        assert!((generalized_eigen(&a, &a).unwrap().lambda_max - 1.0).abs() < 1e-12);
        assert!(matches!(generalized_eigen(&a, &(id * -1.0)), Err(Error::IndefiniteRhs { .. })));
    }
}
