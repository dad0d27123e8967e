//! Quadratic Lagrange shape functions on the tetrahedron.
//!
//! Node order: the four vertices, then the six edge midpoints in the
//! lexicographic local-edge order (01, 02, 03, 12, 13, 23). Barycentric
//! coordinates satisfy λ0 = 1 − x̂1 − x̂2 − x̂3 and λi = x̂i.

use crate::geometry::TET_EDGES;

pub const NUM_NODES: usize = 10;

/// Barycentric coordinates of the ten nodes.
pub const NODE_BARY: [[f64; 4]; 10] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0, 0.0],
    [0.5, 0.0, 0.5, 0.0],
    [0.5, 0.0, 0.0, 0.5],
    [0.0, 0.5, 0.5, 0.0],
    [0.0, 0.5, 0.0, 0.5],
    [0.0, 0.0, 0.5, 0.5],
];

pub fn p2_shape(node: usize, bary: &[f64; 4]) -> f64 {
    if node < 4 {
        let l = bary[node];
        l * (2.0 * l - 1.0)
    } else {
        let [i, j] = TET_EDGES[node - 4];
        4.0 * bary[i] * bary[j]
    }
}

pub fn p2_shape_all(bary: &[f64; 4]) -> [f64; 10] {
    core::array::from_fn(|n| p2_shape(n, bary))
}

/// Derivatives with respect to the four barycentric coordinates, treated as
/// independent variables.
pub fn p2_shape_bary_grad(node: usize, bary: &[f64; 4]) -> [f64; 4] {
    let mut d = [0.0; 4];
    if node < 4 {
        d[node] = 4.0 * bary[node] - 1.0;
    } else {
        let [i, j] = TET_EDGES[node - 4];
        d[i] = 4.0 * bary[j];
        d[j] = 4.0 * bary[i];
    }
    d
}

/// Gradient with respect to the reference coordinates (x̂1, x̂2, x̂3).
pub fn p2_shape_grad(node: usize, bary: &[f64; 4]) -> [f64; 3] {
    let d = p2_shape_bary_grad(node, bary);
    [d[1] - d[0], d[2] - d[0], d[3] - d[0]]
}

/// Constant second derivatives with respect to the barycentric coordinates.
pub fn p2_shape_bary_hess(node: usize) -> [[f64; 4]; 4] {
    let mut h = [[0.0; 4]; 4];
    if node < 4 {
        h[node][node] = 4.0;
    } else {
        let [i, j] = TET_EDGES[node - 4];
        h[i][j] = 4.0;
        h[j][i] = 4.0;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bary(rng: &mut ChaCha8Rng) -> [f64; 4] {
        let mut b: [f64; 4] = core::array::from_fn(|_| rng.random::<f64>());
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|x| *x /= s);
        b
    }

    #[test]
    fn kronecker_property() {
        for i in 0..10 {
            for (j, node) in NODE_BARY.iter().enumerate() {
                let v = p2_shape(i, node);
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let b = random_bary(&mut rng);
            let s: f64 = p2_shape_all(&b).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for _ in 0..20 {
            let b = random_bary(&mut rng);
            for n in 0..10 {
                let g = p2_shape_grad(n, &b);
                for j in 0..3 {
                    let mut bp = b;
                    let mut bm = b;
                    // moving x̂_j moves λ_j and the dependent λ_0
                    bp[j + 1] += h;
                    bp[0] -= h;
                    bm[j + 1] -= h;
                    bm[0] += h;
                    let fd = (p2_shape(n, &bp) - p2_shape(n, &bm)) / (2.0 * h);
                    assert!((fd - g[j]).abs() < 1e-8, "node {n} dir {j}: {fd} vs {}", g[j]);
                }
            }
        }
    }
}
