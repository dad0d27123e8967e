//! Fully symmetric positive-weight quadrature on the reference tet and triangle.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Tet,
    Triangle,
}

impl Domain {
    pub fn reference_measure(self) -> f64 {
        match self {
            Domain::Tet => 1.0 / 6.0,
            Domain::Triangle => 0.5,
        }
    }
}

/// Points are barycentric; triangle points use the first three slots and
/// leave the fourth at zero. Weights sum to the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub domain: Domain,
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 4], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Triangle points as three barycentric coordinates.
    pub fn tri_points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.points.iter().map(|p| [p[0], p[1], p[2]])
    }
}

/// Smallest supported rule integrating polynomials of `degree` exactly.
/// Supported degrees are 0 through 6 on both domains.
pub fn make_quadrature(domain: Domain, degree: usize) -> Result<QuadRule> {
    let unsupported = || Error::UnsupportedQuadrature {
        domain: match domain {
            Domain::Tet => "tet",
            Domain::Triangle => "triangle",
        },
        degree,
    };
    let (orbits, exact): (&[(Orbit, f64)], usize) = match (domain, degree) {
        (Domain::Tet, 0..=2) => (TET_DEG2, 2),
        (Domain::Tet, 3..=5) => (TET_DEG5, 5),
        (Domain::Tet, 6) => (TET_DEG6, 6),
        (Domain::Triangle, 0..=2) => (TRI_DEG2, 2),
        (Domain::Triangle, 3..=4) => (TRI_DEG4, 4),
        (Domain::Triangle, 5..=6) => (TRI_DEG6, 6),
        _ => return Err(unsupported()),
    };
    let scale = domain.reference_measure();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (orbit, w) in orbits {
        for p in orbit.expand() {
            points.push(p);
            weights.push(w * scale);
        }
    }
    Ok(QuadRule { domain, points, weights, degree: exact })
}

#[derive(Debug, Clone, Copy)]
enum Orbit {
    /// (a, a, a, 1 − 3a)
    Tet4(f64),
    /// (a, a, ½ − a, ½ − a)
    Tet6(f64),
    /// (a, a, b, 1 − 2a − b)
    Tet12(f64, f64),
    /// (a, a, 1 − 2a)
    Tri3(f64),
    /// (a, b, 1 − a − b)
    Tri6(f64, f64),
}

impl Orbit {
    fn expand(self) -> Vec<[f64; 4]> {
        let mut out: Vec<[f64; 4]> = Vec::new();
        let mut push = |p: [f64; 4]| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        match self {
            Orbit::Tet4(a) | Orbit::Tet6(a) | Orbit::Tet12(a, _) => {
                let base = match self {
                    Orbit::Tet4(_) => [a, a, a, 1.0 - 3.0 * a],
                    Orbit::Tet6(_) => [a, a, 0.5 - a, 0.5 - a],
                    Orbit::Tet12(_, b) => [a, a, b, 1.0 - 2.0 * a - b],
                    _ => unreachable!(),
                };
                for perm in permutations4() {
                    push(perm.map(|i| base[i]));
                }
            }
            Orbit::Tri3(a) | Orbit::Tri6(a, _) => {
                let base = match self {
                    Orbit::Tri3(_) => [a, a, 1.0 - 2.0 * a],
                    Orbit::Tri6(_, b) => [a, b, 1.0 - a - b],
                    _ => unreachable!(),
                };
                for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    push([base[perm[0]], base[perm[1]], base[perm[2]], 0.0]);
                }
            }
        }
        out
    }
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

// Orbit weights are normalized to sum to one over the reference domain.
const TET_DEG2: &[(Orbit, f64)] = &[(Orbit::Tet4(0.138_196_601_125_010_5), 0.25)];

const TET_DEG5: &[(Orbit, f64)] = &[
    (Orbit::Tet4(0.092_735_250_310_891_43), 0.073_493_043_116_362_41),
    (Orbit::Tet4(0.310_885_919_263_300_9), 0.112_687_925_718_017_4),
    (Orbit::Tet6(0.045_503_704_125_648_366), 0.042_546_020_777_080_14),
];

const TET_DEG6: &[(Orbit, f64)] = &[
    (Orbit::Tet4(0.214_602_871_259_218_31), 0.039_922_750_258_140_74),
    (Orbit::Tet4(0.040_673_958_534_600_825), 0.010_077_211_055_317_429),
    (Orbit::Tet4(0.322_337_890_142_274_5), 0.055_357_181_543_657_374),
    (Orbit::Tet12(0.063_661_001_875_024_59, 0.269_672_331_458_309_3), 0.048_214_285_714_294_83),
];

const TRI_DEG2: &[(Orbit, f64)] = &[(Orbit::Tri3(1.0 / 6.0), 1.0 / 3.0)];

const TRI_DEG4: &[(Orbit, f64)] = &[
    (Orbit::Tri3(0.445_948_490_915_964_9), 0.223_381_589_678_011_47),
    (Orbit::Tri3(0.091_576_213_509_770_74), 0.109_951_743_655_321_87),
];

const TRI_DEG6: &[(Orbit, f64)] = &[
    (Orbit::Tri3(0.249_286_745_170_926_36), 0.116_786_275_726_352_03),
    (Orbit::Tri3(0.063_089_014_491_498_66), 0.050_844_906_370_201_844),
    (Orbit::Tri6(0.310_352_451_033_771_85, 0.053_145_049_844_828_64), 0.082_851_075_618_389_72),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// ∫ over the unit simplex of Π x_i^{e_i} = Π e_i! / (dim + Σ e_i)!
    fn monomial_moment(exps: &[usize]) -> f64 {
        let num: f64 = exps.iter().map(|&e| factorial(e)).product();
        num / factorial(exps.len() + exps.iter().sum::<usize>())
    }

    fn check_exactness(domain: Domain, degree: usize) {
        let q = make_quadrature(domain, degree).unwrap();
        assert!(q.weights.iter().all(|&w| w > 0.0));
        let total: f64 = q.weights.iter().sum();
        assert!((total - domain.reference_measure()).abs() < 1e-15);
        let dim = if domain == Domain::Tet { 3 } else { 2 };
        for e0 in 0..=q.degree {
            for e1 in 0..=q.degree - e0 {
                for e2 in 0..=(q.degree - e0 - e1) * (dim == 3) as usize {
                    let exps = if dim == 3 { alloc::vec![e0, e1, e2] } else { alloc::vec![e0, e1] };
                    let exact = monomial_moment(&exps);
                    let approx: f64 = q
                        .iter()
                        .map(|(p, w)| {
                            w * exps.iter().enumerate().map(|(i, &e)| libm::pow(p[i + 1], e as f64)).product::<f64>()
                        })
                        .sum();
                    assert!(((approx - exact) / exact).abs() < 1e-13, "{domain:?} deg {} {exps:?}: {approx} vs {exact}", q.degree);
                }
            }
        }
    }

    #[test]
    fn exactness_tables() {
        for d in [2, 4, 6] {
            check_exactness(Domain::Tet, d);
            check_exactness(Domain::Triangle, d);
        }
    }

    #[test]
    fn named_moments() {
        let q = make_quadrature(Domain::Tet, 4).unwrap();
        let one: f64 = q.weights.iter().sum();
        assert!((one - 1.0 / 6.0).abs() < 1e-15);
        let x2: f64 = q.iter().map(|(p, w)| w * p[1] * p[1]).sum();
        assert!((x2 - 1.0 / 60.0).abs() < 1e-15);
        let t = make_quadrature(Domain::Triangle, 4).unwrap();
        let xy: f64 = t.iter().map(|(p, w)| w * p[1] * p[2]).sum();
        assert!((xy - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn point_counts_and_errors() {
        assert_eq!(make_quadrature(Domain::Tet, 2).unwrap().len(), 4);
        assert_eq!(make_quadrature(Domain::Tet, 4).unwrap().len(), 14);
        assert_eq!(make_quadrature(Domain::Tet, 6).unwrap().len(), 24);
        assert_eq!(make_quadrature(Domain::Triangle, 4).unwrap().len(), 6);
        assert_eq!(make_quadrature(Domain::Triangle, 6).unwrap().len(), 12);
        assert!(make_quadrature(Domain::Tet, 9).is_err());
    }
}
