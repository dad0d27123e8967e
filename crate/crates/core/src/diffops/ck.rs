use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::geometry::{Mat3, Vec3};

/// A smooth vector field that can be sampled together with its Jacobian.
pub trait AnalyticField {
    fn value(&self, x: &Vec3) -> Vec3;
    /// Entry (i, j) is ∂v_i/∂x_j.
    fn jacobian(&self, x: &Vec3) -> Mat3;
}

/// Adapter turning a pair of closures into an [`AnalyticField`].
pub struct FnField<F, G> {
    pub value: F,
    pub jacobian: G,
}

impl<F: Fn(&Vec3) -> Vec3, G: Fn(&Vec3) -> Mat3> AnalyticField for FnField<F, G> {
    fn value(&self, x: &Vec3) -> Vec3 {
        (self.value)(x)
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        (self.jacobian)(x)
    }
}

/// Conformal Killing field w(x) = 2(a·x)x − |x|²a + ρx + Qx + b with
/// Q = [[0, q1, q2], [−q1, 0, q3], [−q2, −q3, 0]].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CKField {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub rho: f64,
    pub q: [f64; 3],
}

impl CKField {
    pub const DIM: usize = 10;

    pub fn zero() -> Self {
        Self { a: [0.0; 3], b: [0.0; 3], rho: 0.0, q: [0.0; 3] }
    }

    /// Parameters in the order a1 a2 a3 b1 b2 b3 ρ q1 q2 q3.
    pub fn params(&self) -> [f64; 10] {
        let [a1, a2, a3] = self.a;
        let [b1, b2, b3] = self.b;
        let [q1, q2, q3] = self.q;
        [a1, a2, a3, b1, b2, b3, self.rho, q1, q2, q3]
    }

    pub fn from_params(p: &[f64; 10]) -> Self {
        Self { a: [p[0], p[1], p[2]], b: [p[3], p[4], p[5]], rho: p[6], q: [p[7], p[8], p[9]] }
    }

    /// The k-th unit parameter vector.
    pub fn basis(k: usize) -> Self {
        let mut p = [0.0; 10];
        p[k] = 1.0;
        Self::from_params(&p)
    }

    /// Parameters drawn uniformly from [-1, 1].
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let p: [f64; 10] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        Self::from_params(&p)
    }

    /// Rigid motions and translations only (a = 0, ρ = 0).
    pub fn is_rigid(&self) -> bool {
        self.a == [0.0; 3] && self.rho == 0.0
    }

    pub fn q_matrix(&self) -> Mat3 {
        let [q1, q2, q3] = self.q;
        Mat3::new(0.0, q1, q2, -q1, 0.0, q3, -q2, -q3, 0.0)
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        let a = Vec3::from(self.a);
        x * (2.0 * a.dot(x)) - a * x.norm_squared() + x * self.rho + self.q_matrix() * x + Vec3::from(self.b)
    }

    pub fn curl(&self, x: &Vec3) -> Vec3 {
        let a = Vec3::from(self.a);
        let [q1, q2, q3] = self.q;
        a.cross(x) * 4.0 + Vec3::new(-2.0 * q3, 2.0 * q2, -2.0 * q1)
    }

    pub fn div(&self, x: &Vec3) -> f64 {
        6.0 * Vec3::from(self.a).dot(x) + 3.0 * self.rho
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let (p, o) = (self.params(), other.params());
        p.iter().zip(o.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.params().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl AnalyticField for CKField {
    fn value(&self, x: &Vec3) -> Vec3 {
        self.eval(x)
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        let a = Vec3::from(self.a);
        Mat3::identity() * (2.0 * a.dot(x) + self.rho) + x * a.transpose() * 2.0 - a * x.transpose() * 2.0
            + self.q_matrix()
    }
}

/// `ck a1 a2 a3 b1 b2 b3 rho q1 q2 q3`, floats in shortest round-trip form.
impl fmt::Display for CKField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ck")?;
        for p in self.params() {
            write!(f, " {p:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseCkError {
    MissingTag,
    WrongCount(usize),
    BadNumber(usize),
}

impl fmt::Display for ParseCkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseCkError::MissingTag => f.write_str("expected a line starting with 'ck'"),
            ParseCkError::WrongCount(n) => write!(f, "expected 10 parameters, found {n}"),
            ParseCkError::BadNumber(i) => write!(f, "parameter {} is not a number", i + 1),
        }
    }
}

impl FromStr for CKField {
    type Err = ParseCkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut it = s.split_whitespace();
        if it.next() != Some("ck") {
            return Err(ParseCkError::MissingTag);
        }
        let words: alloc::vec::Vec<&str> = it.collect();
        if words.len() != 10 {
            return Err(ParseCkError::WrongCount(words.len()));
        }
        let mut p = [0.0; 10];
        for (i, w) in words.iter().enumerate() {
            p[i] = w.parse().map_err(|_| ParseCkError::BadNumber(i))?;
        }
        Ok(Self::from_params(&p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{curl_of_jacobian, trace_free_sym};
    use alloc::string::ToString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobian_matches_finite_differences_and_is_conformal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = CKField::random(&mut rng);
            let x = Vec3::new(rng.random(), rng.random(), rng.random());
            let j = w.jacobian(&x);
            let h = 1e-5;
            for k in 0..3 {
                let mut e = Vec3::zeros();
                e[k] = h;
                let fd = (w.eval(&(x + e)) - w.eval(&(x - e))) / (2.0 * h);
                assert!((fd - j.column(k)).norm() < 1e-8);
            }
            assert!(trace_free_sym(&j).norm() < 1e-13);
            assert!((curl_of_jacobian(&j) - w.curl(&x)).norm() < 1e-13);
            assert!((j.trace() - w.div(&x)).abs() < 1e-13);
        }
    }

    #[test]
    fn text_round_trip() {
        let w = CKField::random(&mut ChaCha8Rng::seed_from_u64(1));
        let s = w.to_string();
        assert!(s.starts_with("ck "));
        assert_eq!(s.parse::<CKField>().unwrap(), w);
        assert_eq!("ck 1 2".parse::<CKField>(), Err(ParseCkError::WrongCount(2)));
        assert_eq!("kc 1".parse::<CKField>(), Err(ParseCkError::MissingTag));
    }
}
