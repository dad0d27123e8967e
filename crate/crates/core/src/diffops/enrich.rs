use alloc::vec;

use crate::error::Result;
use crate::fespace::{DofKind, DofMap, FieldVector, P2Space};

/// How the enrichment operator picks a continuous nodal value from the
/// values of the tets sharing the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnrichRule {
    /// Arithmetic mean over the star, the operator used throughout.
    #[default]
    Average,
    /// Value from the lowest-numbered tet of the star. A deliberately wrong
    /// operator used to check that the nodal jump checks can fail.
    FirstInStar,
}

/// E: V → W, nodal averaging over vertex and edge-midpoint stars.
pub fn enrich(space: &P2Space, field: &FieldVector) -> Result<FieldVector> {
    enrich_with(space, field, EnrichRule::Average)
}

pub fn enrich_with(space: &P2Space, field: &FieldVector, rule: EnrichRule) -> Result<FieldVector> {
    let v = space.to_discontinuous(field)?;
    let mesh = space.mesh;
    let dg = DofMap::new(mesh, DofKind::Discontinuous);
    let cg = DofMap::new(mesh, DofKind::Continuous);
    // Means are accumulated as offsets from the first value seen so that a
    // star of equal values averages to exactly that value.
    let mut first = vec![0.0; cg.ndof];
    let mut sum = vec![0.0; cg.ndof];
    let mut count = vec![0u32; cg.ndof];
    for t in 0..mesh.num_tets() {
        for d in 0..30 {
            let g = cg.tet_dofs[t][d];
            let val = v.coeffs[dg.tet_dofs[t][d]];
            match rule {
                EnrichRule::Average => {
                    if count[g] == 0 {
                        first[g] = val;
                    }
                    sum[g] += val - first[g];
                    count[g] += 1;
                }
                EnrichRule::FirstInStar => {
                    if count[g] == 0 {
                        first[g] = val;
                        count[g] = 1;
                    }
                }
            }
        }
    }
    let coeffs = (0..cg.ndof).map(|g| first[g] + sum[g] / count[g] as f64).collect();
    Ok(FieldVector { kind: DofKind::Continuous, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::mesh::gen_cube_mesh;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_on_continuous_and_idempotent() {
        let m = gen_cube_mesh(2);
        let c = P2Space::continuous(&m);
        let d = P2Space::discontinuous(&m);
        let f = c.random_field(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(enrich(&c, &f).unwrap(), f);
        assert_eq!(enrich(&d, &c.to_discontinuous(&f).unwrap()).unwrap(), f);
        let g = d.random_field(&mut ChaCha8Rng::seed_from_u64(2));
        let eg = enrich(&d, &g).unwrap();
        assert_eq!(enrich(&c, &eg).unwrap(), eg);
    }

    #[test]
    fn indicator_gives_reciprocal_star_size() {
        let m = gen_cube_mesh(1);
        let d = P2Space::discontinuous(&m);
        let c = P2Space::continuous(&m);
        let t0 = 0;
        let f = d.interpolate_piecewise(|t, _| if t == t0 { Vec3::new(1.0, 1.0, 1.0) } else { Vec3::zeros() });
        let e = enrich(&d, &f).unwrap();
        for &p in &m.tet(t0) {
            let k = m.vertex_star(p).len() as f64;
            assert!((e.coeffs[3 * p] - 1.0 / k).abs() < 1e-15);
        }
        assert_eq!(c.ndof(), e.len());
    }
}
