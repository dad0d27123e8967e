use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::KornProblem;
use crate::error::{Error, Result};
use crate::fespace::FieldVector;
use crate::fmath::sqrt;
use crate::linalg::{deflate_two_sided, generalized_eigen, pcg, CsrMatrix, EnvelopeCholesky, Householder};

/// Largest problem the dense solver accepts.
pub const DENSE_MAX_DOFS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Dense,
    Power,
    /// Dense up to [`DENSE_MAX_DOFS`], iterative above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverKind {
    Dense,
    Power,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dense => "dense",
            SolverKind::Power => "power",
        }
    }
}

/// Settings of the block subspace iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub block: usize,
    /// Relative change of the top Ritz value regarded as converged...
    pub tol: f64,
    /// ...for this many consecutive iterations.
    pub window: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub pcg_tol: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { block: 8, tol: 1e-6, window: 3, max_iter: 5000, seed: 0x6b6f726e, pcg_tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct KornEstimate {
    pub lambda_max: f64,
    /// Field attaining `lambda_max`, scaled so that its right-hand value is 1.
    pub worst: FieldVector,
    pub solver: SolverKind,
    pub iterations: usize,
    /// Smallest Cholesky pivot of the deflated right-hand matrix (dense only).
    pub min_pivot: Option<f64>,
}

pub fn korn_constant(problem: &KornProblem, solver: Solver) -> Result<KornEstimate> {
    korn_constant_with(problem, solver, &PowerOptions::default())
}

pub fn korn_constant_with(problem: &KornProblem, solver: Solver, opts: &PowerOptions) -> Result<KornEstimate> {
    let n = problem.ndof();
    match solver {
        Solver::Dense if n > DENSE_MAX_DOFS => Err(Error::DenseTooLarge { ndof: n, max: DENSE_MAX_DOFS }),
        Solver::Dense => dense(problem),
        Solver::Auto if n <= DENSE_MAX_DOFS => dense(problem),
        Solver::Power | Solver::Auto => power(problem, opts),
    }
}

fn dense(problem: &KornProblem) -> Result<KornEstimate> {
    let a = problem.lhs.to_dense();
    let r = problem.rhs.to_dense();
    let defl = problem.deflation_vectors();
    let (ge, x) = if defl.is_empty() {
        let ge = generalized_eigen(&a, &r)?;
        let x = ge.vector.clone();
        (ge, x)
    } else {
        let c = DMatrix::from_fn(problem.ndof(), defl.len(), |i, j| defl[j][i]);
        let h = Householder::new(&c)?;
        let ge = generalized_eigen(&deflate_two_sided(&a, &h), &deflate_two_sided(&r, &h))?;
        let x = h.expand(&ge.vector);
        (ge, x)
    };
    Ok(KornEstimate {
        lambda_max: ge.lambda_max,
        worst: normalized(problem, x.as_slice().to_vec())?,
        solver: SolverKind::Dense,
        iterations: 1,
        min_pivot: Some(ge.min_pivot),
    })
}

fn normalized(problem: &KornProblem, mut x: Vec<f64>) -> Result<FieldVector> {
    let rv = problem.rhs.value(&x)?;
    if rv > 0.0 {
        let s = 1.0 / sqrt(rv);
        x.iter_mut().for_each(|v| *v *= s);
    }
    Ok(FieldVector { kind: problem.space.kind(), coeffs: x })
}

struct Operator {
    a: CsrMatrix,
    r: CsrMatrix,
    chol: EnvelopeCholesky,
    direct: bool,
}

impl Operator {
    fn new(problem: &KornProblem) -> Result<Self> {
        let a = problem.lhs.sparse_part();
        let r = problem.rhs_completed.sparse_part();
        let precond = match &problem.preconditioner_mass {
            Some(m) => {
                let mut t = Vec::with_capacity(r.nnz() + m.blocks.len() * 900);
                for i in 0..r.n {
                    t.extend(r.row(i).map(|(j, v)| (i, j, v)));
                }
                let ms = m.sparse_part();
                for i in 0..ms.n {
                    t.extend(ms.row(i).map(|(j, v)| (i, j, v)));
                }
                CsrMatrix::from_triplets(r.n, t)
            }
            None => r.clone(),
        };
        let chol = EnvelopeCholesky::factor(&precond)?;
        let direct = problem.rhs_completed.rank_one.is_empty() && problem.preconditioner_mass.is_none();
        Ok(Self { a, r, chol, direct })
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.a.mul_vec(x, &mut y);
        y
    }

    fn apply_r(&self, problem: &KornProblem, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.r.mul_vec(x, &mut y);
        problem.rhs_completed.apply_rank_one(x, &mut y);
        y
    }

    fn solve_r(&self, problem: &KornProblem, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        if self.direct {
            return Ok(self.chol.solve(b));
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            self.r.mul_vec(x, y);
            problem.rhs_completed.apply_rank_one(x, y);
        };
        Ok(pcg(apply, |r| self.chol.solve(r), b, tol, 5000)?.0)
    }
}

/// Ritz pairs of (Ã, R̃) in descending order. Directions where R̃ is
/// numerically singular are dropped. Returns (values, coefficient matrix).
fn ritz(at: &DMatrix<f64>, rt: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let re = rt.clone().symmetric_eigen();
    let top = re.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..re.eigenvalues.len()).filter(|&i| re.eigenvalues[i] > 1e-13 * top).collect();
    let z = DMatrix::from_fn(rt.nrows(), keep.len(), |i, j| {
        re.eigenvectors[(i, keep[j])] / sqrt(re.eigenvalues[keep[j]])
    });
    let az = z.tr_mul(at) * &z;
    let az = (&az + az.transpose()) * 0.5;
    let e = az.symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let w = DMatrix::from_fn(e.eigenvectors.nrows(), order.len(), |i, j| e.eigenvectors[(i, order[j])]);
    (vals, z * w)
}

fn power(problem: &KornProblem, opts: &PowerOptions) -> Result<KornEstimate> {
    let n = problem.ndof();
    let op = Operator::new(problem)?;
    let b = opts.block.max(1).min(n.saturating_sub(problem.deflation.len())).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut ax: Vec<Vec<f64>> = x.iter().map(|v| op.apply_a(v)).collect();
    let mut history: Vec<f64> = Vec::new();
    let mut calm = 0;
    for it in 1..=opts.max_iter {
        let y: Vec<Vec<f64>> = ax.iter().map(|v| op.solve_r(problem, v, opts.pcg_tol)).collect::<Result<_>>()?;
        let ay: Vec<Vec<f64>> = y.iter().map(|v| op.apply_a(v)).collect();
        let ry: Vec<Vec<f64>> = y.iter().map(|v| op.apply_r(problem, v)).collect();
        let k = y.len();
        let at = DMatrix::from_fn(k, k, |i, j| crate::linalg::dot(&y[i], &ay[j]));
        let rt = DMatrix::from_fn(k, k, |i, j| crate::linalg::dot(&y[i], &ry[j]));
        let at = (&at + at.transpose()) * 0.5;
        let rt = (&rt + rt.transpose()) * 0.5;
        let (vals, coef) = ritz(&at, &rt);
        if vals.is_empty() {
            return Err(Error::SolveFailed("subspace collapsed".into()));
        }
        let combine = |basis: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..coef.ncols())
                .map(|j| {
                    let mut v = vec![0.0; n];
                    for (i, bi) in basis.iter().enumerate() {
                        crate::linalg::axpy(coef[(i, j)], bi, &mut v);
                    }
                    v
                })
                .collect()
        };
        x = combine(&y);
        ax = combine(&ay);
        let theta = vals[0];
        if let Some(&prev) = history.last() {
            let change = (theta - prev).abs() / theta.abs().max(f64::MIN_POSITIVE);
            calm = if change < opts.tol { calm + 1 } else { 0 };
            if calm >= opts.window {
                return Ok(KornEstimate {
                    lambda_max: theta,
                    worst: normalized(problem, x.swap_remove(0))?,
                    solver: SolverKind::Power,
                    iterations: it,
                    min_pivot: None,
                });
            }
        }
        history.push(theta);
    }
    let change = match history.as_slice() {
        [.., a, b] => (b - a).abs() / b.abs(),
        _ => f64::NAN,
    };
    Err(Error::NoConvergence { iterations: opts.max_iter, change })
}
