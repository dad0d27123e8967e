use alloc::vec::Vec;

use crate::diffops::{curl_of_jacobian, AnalyticField, CKField};
use crate::error::{Error, Result};
use crate::fespace::{make_quadrature, DofKind, Domain, FieldVector, LocalField, P2Space};
use crate::geometry::{Mat3, TetGeom, Vec3};

const CENTROID: [f64; 4] = [0.25; 4];

/// Volume, centroid and second moments ∫ x xᵀ of a tet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMoments {
    pub volume: f64,
    pub centroid: Vec3,
    pub second: Mat3,
}

impl ElementMoments {
    pub fn new(geom: &TetGeom) -> Self {
        let volume = geom.volume();
        let s: Vec3 = geom.vertices.iter().sum();
        let mut second = s * s.transpose();
        for v in &geom.vertices {
            second += v * v.transpose();
        }
        Self { volume, centroid: s / 4.0, second: second * (volume / 20.0) }
    }
}

/// The four integrals that determine the CK projection:
/// ∫v, ∫div v, ∫curl v and ∫curl curl v over one tet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMoments {
    pub integral: Vec3,
    pub div: f64,
    pub curl: Vec3,
    pub curlcurl: Vec3,
}

impl FieldMoments {
    pub fn sub(&self, o: &Self) -> Self {
        Self {
            integral: self.integral - o.integral,
            div: self.div - o.div,
            curl: self.curl - o.curl,
            curlcurl: self.curlcurl - o.curlcurl,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.integral.amax().max(self.div.abs()).max(self.curl.amax()).max(self.curlcurl.amax())
    }
}

/// Exact moments of a P2 field: div and curl are affine, so their integrals
/// are |T| times the centroid value; curl curl is constant.
pub fn field_moments(local: &LocalField, volume: f64) -> FieldMoments {
    let mut integral = Vec3::zeros();
    for (n, c) in local.coeffs.iter().enumerate() {
        let w = if n < 4 { -volume / 20.0 } else { volume / 5.0 };
        integral += Vec3::from(*c) * w;
    }
    let g = local.grad(&CENTROID);
    FieldMoments {
        integral,
        div: g.trace() * volume,
        curl: curl_of_jacobian(&g) * volume,
        curlcurl: local.curlcurl() * volume,
    }
}

/// Moments of a smooth field by degree-4 quadrature; ∫curl curl v is taken
/// as the boundary integral ∮ n × curl v.
pub fn analytic_moments(geom: &TetGeom, f: &impl AnalyticField) -> FieldMoments {
    let tet = make_quadrature(Domain::Tet, 4).expect("degree 4 supported");
    let tri = make_quadrature(Domain::Triangle, 4).expect("degree 4 supported");
    let scale = 6.0 * geom.volume();
    let mut m = FieldMoments { integral: Vec3::zeros(), div: 0.0, curl: Vec3::zeros(), curlcurl: Vec3::zeros() };
    for (p, w) in tet.iter() {
        let x = geom.map(p);
        let j = f.jacobian(&x);
        m.integral += f.value(&x) * (w * scale);
        m.div += j.trace() * w * scale;
        m.curl += curl_of_jacobian(&j) * (w * scale);
    }
    for face in 0..4 {
        let (n, area) = geom.face_normal(face);
        let idx = crate::geometry::TET_FACES[face];
        for (fb, w) in tri.tri_points().zip(tri.weights.iter()) {
            let x = geom.vertices[idx[0]] * fb[0] + geom.vertices[idx[1]] * fb[1] + geom.vertices[idx[2]] * fb[2];
            let c = curl_of_jacobian(&f.jacobian(&x));
            m.curlcurl += n.cross(&c) * (w * 2.0 * area);
        }
    }
    m
}

/// Solves the moment system block by block: a from ∫curl curl, then the
/// skew part from ∫curl, ρ from ∫div and finally b from ∫v.
pub fn project_from_moments(em: &ElementMoments, fm: &FieldMoments) -> CKField {
    let vol = em.volume;
    let c = em.centroid;
    let a = fm.curlcurl / (8.0 * vol);
    let s = (fm.curl - a.cross(&c) * (4.0 * vol)) / (2.0 * vol);
    let q = [-s[2], s[1], -s[0]];
    let rho = (fm.div - 6.0 * vol * a.dot(&c)) / (3.0 * vol);
    let partial = CKField { a: a.into(), b: [0.0; 3], rho, q };
    let known = em.second * a * 2.0 - a * em.second.trace() + c * (rho * vol) + partial.q_matrix() * c * vol;
    let b = (fm.integral - known) / vol;
    CKField { b: b.into(), ..partial }
}

/// Π_T v for tet `t`.
pub fn ck_project_element(space: &P2Space, field: &FieldVector, t: usize) -> Result<CKField> {
    space.check(field)?;
    if t >= space.mesh.num_tets() {
        return Err(Error::InvalidArgument(alloc::format!("tet {t} out of range")));
    }
    let geom = space.mesh.geom(t);
    let em = ElementMoments::new(geom);
    Ok(project_from_moments(&em, &field_moments(&space.local(field, t), em.volume)))
}

/// Π v, one CK field per tet.
pub fn ck_project_global(space: &P2Space, field: &FieldVector) -> Result<Vec<CKField>> {
    (0..space.mesh.num_tets()).map(|t| ck_project_element(space, field, t)).collect()
}

/// v − Π v as a discontinuous field, together with the per-tet projections.
pub fn ck_residual(space: &P2Space, field: &FieldVector) -> Result<(Vec<CKField>, FieldVector)> {
    let proj = ck_project_global(space, field)?;
    let v = space.to_discontinuous(field)?;
    let dg = P2Space::new(space.mesh, DofKind::Discontinuous);
    let pi = dg.interpolate_piecewise(|t, x| proj[t].eval(x));
    let coeffs = v.coeffs.iter().zip(&pi.coeffs).map(|(a, b)| a - b).collect();
    Ok((proj, FieldVector { kind: DofKind::Discontinuous, coeffs }))
}
