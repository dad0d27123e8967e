use alloc::string::ToString;
use alloc::vec::Vec;
use core::cell::OnceCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::nodal::{lemma1_ratio, lemma1_sharp_constant, nodal_jump_sum, NodeKind};
use super::{CheckResult, Hooks, Witness};
use crate::diffops::{ck_project_element, ck_residual, enrich_with, face_l2_norm_sq, face_project, CKField};
use crate::error::{Error, Result};
use crate::fespace::{DofKind, FieldVector, P2Space};
use crate::forms::{assemble_h1, assemble_l2, assemble_phi1, assemble_phi2, assemble_tf, QuadraticForm};
use crate::geometry::{signed_volume, Vec3};
use crate::mesh::{single_tet, FaceRef, Mesh};
use crate::spectra::{constant_deflation, korn_constant, local_korn_constant, KornProblem, Solver};

/// Every check, in report order.
pub const CHECK_NAMES: [&str; 17] = [
    "appB_wellposed",
    "eq_grad_bound_domination",
    "eq_interp_def_moments",
    "eq_kernel_condition",
    "eq_proj_ineq_contraction",
    "eq_project_error_one",
    "eq_project_error_two",
    "eq_seminorm_bound_phi1",
    "eq_seminorm_bound_phi2",
    "ex1_phi1_bound",
    "ex2_phi2_bound",
    "ex3_phi1_proj",
    "ex4_phi2_proj",
    "lemma1_midpoint",
    "lemma1_vertex",
    "lemma2_v_estimate",
    "lemma2_v_estimate_phi2",
];

/// Checks that measure an unknown constant pass when the measured value is
/// finite, positive and varies by at most this factor over seeds s, s+1, s+2.
pub const STABILITY_RATIO: f64 = 2.0;

const ROUNDOFF_TOL: f64 = 1e-10;
const KERNEL_TOL: f64 = 1e-20;
const CONTRACTION_TOL: f64 = 1e-12;
const DOMINATION_TOL: f64 = 1e-8;
const PROJECT_ERROR_TOL: f64 = 1e-6;
const LEMMA1_TOL: f64 = 1e-9;
const WELLPOSED_TETS: usize = 20;

enum Rule {
    /// measured ≤ bound.
    Bound(f64),
    /// measured ≤ bound and stable over seeds.
    BoundStable(f64),
    /// finite and stable over seeds.
    Stable,
}

pub(crate) struct Context<'m> {
    mesh: &'m Mesh,
    hooks: Hooks,
    dg: P2Space<'m>,
    cg: P2Space<'m>,
    h1: QuadraticForm,
    tf: QuadraticForm,
    phi1: QuadraticForm,
    phi2: QuadraticForm,
    h1_cg: OnceCell<QuadraticForm>,
    tf_cg: OnceCell<QuadraticForm>,
    l2: OnceCell<QuadraticForm>,
    local_k: OnceCell<Vec<f64>>,
}

impl<'m> Context<'m> {
    pub(crate) fn new(mesh: &'m Mesh, hooks: Hooks) -> Result<Self> {
        let dg = P2Space::discontinuous(mesh);
        let cg = P2Space::continuous(mesh);
        Ok(Self {
            mesh,
            hooks,
            h1: assemble_h1(&dg),
            tf: assemble_tf(&dg),
            phi1: assemble_phi1(&dg),
            phi2: assemble_phi2(&dg)?,
            dg,
            cg,
            h1_cg: OnceCell::new(),
            tf_cg: OnceCell::new(),
            l2: OnceCell::new(),
            local_k: OnceCell::new(),
        })
    }

    fn rule(&self, name: &str) -> Result<Rule> {
        Ok(match name {
            "appB_wellposed" | "eq_interp_def_moments" => Rule::Bound(ROUNDOFF_TOL),
            "eq_kernel_condition" => Rule::Bound(KERNEL_TOL),
            "eq_proj_ineq_contraction" => Rule::Bound(1.0 + CONTRACTION_TOL),
            "eq_grad_bound_domination" => Rule::Bound(1.0 + DOMINATION_TOL),
            "eq_project_error_one" => Rule::Bound(1.0 + PROJECT_ERROR_TOL),
            "lemma1_vertex" => Rule::BoundStable(lemma1_sharp_constant(self.mesh, NodeKind::Vertex) * (1.0 + LEMMA1_TOL)),
            "lemma1_midpoint" => {
                Rule::BoundStable(lemma1_sharp_constant(self.mesh, NodeKind::Midpoint) * (1.0 + LEMMA1_TOL))
            }
            n if CHECK_NAMES.contains(&n) => Rule::Stable,
            n => return Err(Error::InvalidArgument(alloc::format!("unknown check '{n}'"))),
        })
    }

    pub(crate) fn run(&self, name: &str, seed: u64, trials: usize) -> Result<CheckResult> {
        let rule = self.rule(name)?;
        let (measured, witness) = self.measure(name, seed, trials)?;
        let stability = match rule {
            Rule::Bound(_) => None,
            Rule::BoundStable(_) | Rule::Stable => {
                let mut vals = alloc::vec![measured];
                for k in 1..3 {
                    vals.push(self.measure(name, seed.wrapping_add(k), trials)?.0);
                }
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Some(if vals.iter().all(|v| v.is_finite()) && lo > 0.0 { hi / lo } else { f64::INFINITY })
            }
        };
        let stable = stability.is_some_and(|s| s <= STABILITY_RATIO);
        let (pass, tolerance) = match rule {
            Rule::Bound(b) => (measured <= b, b),
            Rule::BoundStable(b) => (measured <= b && stable, b),
            Rule::Stable => (measured.is_finite() && stable, STABILITY_RATIO),
        };
        Ok(CheckResult { name: name.to_string(), pass, measured, tolerance, seed, stability, witness: Some(witness) })
    }

    /// Largest metric over the probes drawn from `seed`, with the maximizing probe.
    fn measure(&self, name: &str, seed: u64, trials: usize) -> Result<(f64, Witness)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(name));
        let mut best: Option<(f64, Witness)> = None;
        for w in self.probes(name, &mut rng, trials)? {
            let m = self.metric(name, &w)?;
            let better = match &best {
                None => true,
                Some((b, _)) => m.is_nan() || (!b.is_nan() && m > *b),
            };
            if better {
                best = Some((m, w));
            }
        }
        best.ok_or_else(|| Error::InvalidArgument("no probes".into()))
    }

    fn probes(&self, name: &str, rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Witness>> {
        let dg_field = |rng: &mut ChaCha8Rng| witness(self.dg.random_field(rng));
        Ok(match name {
            "eq_kernel_condition" => (0..trials)
                .map(|_| {
                    let ck = CKField::random(rng);
                    let mut w = witness(self.cg.interpolate(|x| ck.eval(x)));
                    w.params = Some(ck.params());
                    w
                })
                .collect(),
            "appB_wellposed" => {
                let tets: Vec<[[f64; 3]; 4]> = (0..WELLPOSED_TETS).map(|_| random_tet(rng)).collect();
                let mut out = Vec::with_capacity(trials);
                for i in 0..trials {
                    let pts = tets[i % WELLPOSED_TETS];
                    let ck = CKField::random(rng);
                    let mesh = single_tet(pts)?;
                    let mut w = witness(P2Space::discontinuous(&mesh).interpolate(|x| ck.eval(x)));
                    w.tet = Some(pts);
                    w.params = Some(ck.params());
                    out.push(w);
                }
                out
            }
            "eq_grad_bound_domination" => self.domination_probes()?,
            _ => (0..trials).map(|_| dg_field(rng)).collect(),
        })
    }

    /// Evaluates the metric of check `name` on a single probe.
    pub(crate) fn metric(&self, name: &str, w: &Witness) -> Result<f64> {
        if name == "appB_wellposed" {
            return wellposed_metric(w);
        }
        let space = if w.kind == DofKind::Continuous { &self.cg } else { &self.dg };
        let v = space.field(w.coeffs.clone())?;
        let need_dg = |v: &FieldVector| -> Result<()> {
            if v.kind == DofKind::Discontinuous { Ok(()) } else { Err(Error::KindMismatch(DofKind::Discontinuous.as_str())) }
        };
        match name {
            "eq_kernel_condition" => {
                let h1 = self.h1_cg.get_or_init(|| assemble_h1(&self.cg));
                let tf = self.tf_cg.get_or_init(|| assemble_tf(&self.cg));
                let v = self.cg.field(w.coeffs.clone())?;
                Ok(tf.eval(&v)? / (1.0 + h1.eval(&v)?))
            }
            "eq_grad_bound_domination" => {
                need_dg(&v)?;
                Ok(self.tf.eval(&v)? / self.h1.eval(&v)?)
            }
            "eq_interp_def_moments" => {
                need_dg(&v)?;
                let (_, r) = ck_residual(&self.dg, &v)?;
                let mut worst: f64 = 0.0;
                for t in 0..self.mesh.num_tets() {
                    let vol = self.mesh.geom(t).volume();
                    let mr = crate::diffops::field_moments(&self.dg.local(&r, t), vol).max_abs();
                    let mv = crate::diffops::field_moments(&self.dg.local(&v, t), vol).max_abs();
                    worst = worst.max(mr / mv.max(1.0));
                }
                Ok(worst)
            }
            "eq_proj_ineq_contraction" => {
                need_dg(&v)?;
                self.contraction_metric(&v)
            }
            "lemma1_vertex" | "lemma1_midpoint" => {
                need_dg(&v)?;
                let ev = self.enriched(&v)?;
                let kind = if name == "lemma1_vertex" { NodeKind::Vertex } else { NodeKind::Midpoint };
                Ok(lemma1_ratio(&self.dg, &v, &ev, kind))
            }
            "lemma2_v_estimate" | "lemma2_v_estimate_phi2" => {
                need_dg(&v)?;
                let phi = if name == "lemma2_v_estimate" { &self.phi1 } else { &self.phi2 };
                let den = self.tf.eval(&v)? + phi.eval(&v)? + nodal_jump_sum(&self.dg, &v, 1);
                Ok(self.h1.eval(&v)? / den)
            }
            "eq_seminorm_bound_phi1" | "eq_seminorm_bound_phi2" | "ex1_phi1_bound" | "ex2_phi2_bound" => {
                need_dg(&v)?;
                let (phi, power) = match name {
                    "eq_seminorm_bound_phi1" => (&self.phi1, 1),
                    "eq_seminorm_bound_phi2" => (&self.phi2, 1),
                    "ex1_phi1_bound" => (&self.phi1, 3),
                    _ => (&self.phi2, 2),
                };
                let ev = self.enriched(&v)?;
                let diff = sub(&v, &ev);
                Ok(phi.eval(&diff)? / nodal_jump_sum(&self.dg, &v, power))
            }
            "ex3_phi1_proj" | "ex4_phi2_proj" => {
                need_dg(&v)?;
                let phi = if name == "ex3_phi1_proj" { &self.phi1 } else { &self.phi2 };
                let (_, r) = ck_residual(&self.dg, &v)?;
                Ok(phi.eval(&r)? / self.tf.eval(&v)?)
            }
            "eq_project_error_one" | "eq_project_error_two" => {
                need_dg(&v)?;
                let (_, r) = ck_residual(&self.dg, &v)?;
                let one = name == "eq_project_error_one";
                let ks = if one { Some(self.local_k()?) } else { None };
                let l2 = if one { None } else { Some(self.l2.get_or_init(|| assemble_l2(&self.dg))) };
                let mut worst: f64 = 0.0;
                for t in 0..self.mesh.num_tets() {
                    let h1r = self.h1.blocks[t].value(&r.coeffs);
                    let ratio = match (ks, l2) {
                        (Some(ks), _) => {
                            let tfv = self.tf.blocks[t].value(&v.coeffs);
                            if h1r == 0.0 {
                                0.0
                            } else {
                                h1r / (ks[t] * ks[t] * tfv)
                            }
                        }
                        (None, Some(l2)) => {
                            let d = self.mesh.geom(t).diameter();
                            let l2r = l2.blocks[t].value(&r.coeffs);
                            if l2r == 0.0 {
                                0.0
                            } else {
                                l2r / (d * d * h1r)
                            }
                        }
                        _ => unreachable!(),
                    };
                    worst = worst.max(ratio);
                }
                Ok(worst)
            }
            n => Err(Error::InvalidArgument(alloc::format!("unknown check '{n}'"))),
        }
    }

    /// E v re-expanded on the discontinuous dof map.
    fn enriched(&self, v: &FieldVector) -> Result<FieldVector> {
        self.cg.to_discontinuous(&enrich_with(&self.dg, v, self.hooks.enrich)?)
    }

    fn local_k(&self) -> Result<&Vec<f64>> {
        if let Some(k) = self.local_k.get() {
            return Ok(k);
        }
        let ks = self.mesh.geoms().iter().map(|g| local_korn_constant(g, None).map(|l| l.k)).collect::<Result<Vec<_>>>()?;
        Ok(self.local_k.get_or_init(|| ks))
    }

    /// Per tet, the field maximizing ‖tf ε(v)‖²/|v|²_{H¹(T)} over fields
    /// orthogonal to the constants, extended by zero.
    fn domination_probes(&self) -> Result<Vec<Witness>> {
        let mut out = Vec::with_capacity(self.mesh.num_tets());
        for t in 0..self.mesh.num_tets() {
            let g = self.mesh.geom(t);
            let pts = g.vertices.map(|v| [v[0], v[1], v[2]]);
            let local = Mesh::new(pts.to_vec(), alloc::vec![[0, 1, 2, 3]])?;
            let space = P2Space::discontinuous(&local);
            let problem = KornProblem::with_deflation(
                space.clone(),
                assemble_tf(&space),
                assemble_h1(&space),
                constant_deflation(&space),
                None,
            )?;
            let est = korn_constant(&problem, Solver::Dense)?;
            let mut coeffs = alloc::vec![0.0; self.dg.ndof()];
            for (d, &g) in self.dg.dofmap.tet_dofs[t].iter().enumerate() {
                coeffs[g] = est.worst.coeffs[d];
            }
            out.push(witness(FieldVector { kind: DofKind::Discontinuous, coeffs }));
        }
        Ok(out)
    }

    /// Largest ‖π_σ g‖²/‖g‖² over interior faces, with g the jump plus a fixed
    /// non-polynomial perturbation.
    fn contraction_metric(&self, v: &FieldVector) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (f, face) in self.mesh.interior_faces().iter().enumerate() {
            let lm = self.dg.local(v, face.minus);
            let lp = self.dg.local(v, face.plus.expect("interior face"));
            let (gm, gp) = (self.mesh.geom(face.minus), self.mesh.geom(face.plus.expect("interior face")));
            let g = |x: &Vec3| lp.value(&gp.barycentric(x)) - lm.value(&gm.barycentric(x)) + perturbation(x);
            let fr = FaceRef::Interior(f);
            let proj = face_project(self.mesh, fr, g)?;
            let full = face_l2_norm_sq(self.mesh, fr, g);
            if full > 0.0 {
                worst = worst.max(proj.l2_norm_sq() / full);
            }
        }
        Ok(worst)
    }
}

fn wellposed_metric(w: &Witness) -> Result<f64> {
    let (Some(pts), Some(params)) = (w.tet, w.params) else {
        return Err(Error::InvalidArgument("witness needs a tet and CK parameters".into()));
    };
    let mesh = single_tet(pts)?;
    let space = P2Space::discontinuous(&mesh);
    let field = space.field(w.coeffs.clone())?;
    let truth = CKField::from_params(&params);
    Ok(ck_project_element(&space, &field, 0)?.max_abs_diff(&truth) / truth.max_abs().max(1.0))
}

fn perturbation(x: &Vec3) -> Vec3 {
    Vec3::new(
        libm::sin(7.0 * x[0] + 3.0 * x[1]),
        libm::cos(5.0 * x[2] - x[0]),
        libm::sin(x[0] * x[1] + 2.0 * x[2]),
    )
}

fn witness(v: FieldVector) -> Witness {
    Witness { kind: v.kind, coeffs: v.coeffs, tet: None, params: None }
}

fn sub(a: &FieldVector, b: &FieldVector) -> FieldVector {
    FieldVector { kind: a.kind, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect() }
}

/// Four uniform points in the unit cube, redrawn until the tet is not too flat.
fn random_tet(rng: &mut ChaCha8Rng) -> [[f64; 3]; 4] {
    loop {
        let pts: [[f64; 3]; 4] = core::array::from_fn(|_| core::array::from_fn(|_| rng.random_range(0.0..1.0)));
        if signed_volume(&pts.map(Vec3::from)).abs() > 0.01 {
            return pts;
        }
    }
}

/// FNV-1a of the check name: each check draws from its own stream.
fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}
