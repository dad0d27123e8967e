//! Refinement (h-independence) and minimum-angle studies.

use alloc::string::ToString;
use alloc::vec::Vec;

use super::{korn_constant, KornProblem, Solver, SolverKind, Variant, DENSE_MAX_DOFS};
use crate::error::{Error, Result};
use crate::mesh::{refine_red, scaled_cube_mesh, Mesh};
use crate::verify::CheckResult;

/// Largest max/min ratio of λ_max across refinement levels still regarded as
/// independent of the mesh.
pub const H_INDEPENDENCE_RATIO: f64 = 2.0;
/// Relative agreement required between the dense and iterative solvers.
pub const SOLVER_AGREEMENT: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelRecord {
    pub level: usize,
    pub ntets: usize,
    pub ndof: usize,
    /// Minimum dihedral angle, radians.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub theta: f64,
    /// Largest tet diameter.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub h: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub lambda_max: f64,
    pub solver: SolverKind,
    /// Wall time of the eigen-solve; `None` when timings are suppressed.
    #[cfg_attr(feature = "serde", serde(default, with = "crate::serde_float::option"))]
    pub runtime_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyReport {
    pub variant: Option<Variant>,
    pub levels: Vec<LevelRecord>,
    pub checks: Vec<CheckResult>,
}

impl StudyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Drops the wall-clock fields so that repeated runs compare equal.
    pub fn without_timings(mut self) -> Self {
        self.levels.iter_mut().for_each(|l| l.runtime_s = None);
        self
    }
}

/// A clock in seconds; `None` disables timing (the core has no clock of its own).
pub type Clock<'a> = Option<&'a dyn Fn() -> f64>;

fn level_record(level: usize, mesh: &Mesh, variant: Variant, solver: Solver, clock: Clock) -> Result<LevelRecord> {
    let problem = KornProblem::new(mesh, variant)?;
    let start = clock.map(|c| c());
    let est = korn_constant(&problem, solver)?;
    let runtime_s = clock.zip(start).map(|(c, s)| c() - s);
    Ok(LevelRecord {
        level,
        ntets: mesh.num_tets(),
        ndof: problem.ndof(),
        theta: mesh.min_angle(),
        h: mesh.h(),
        lambda_max: est.lambda_max,
        solver: est.solver,
        runtime_s,
    })
}

fn check(name: &str, pass: bool, measured: f64, tolerance: f64) -> CheckResult {
    CheckResult { name: name.to_string(), pass, measured, tolerance, seed: 0, stability: None, witness: None }
}

fn ratio_max_min(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 { hi / lo } else { f64::INFINITY }
}

/// λ_max on `base` and `levels − 1` successive red refinements.
///
/// Level 0 is solved densely as the anchor; later levels use `solver`. Where
/// a later level is small enough, it is also solved densely and the two
/// answers are compared.
pub fn refinement_study(base: &Mesh, levels: usize, variant: Variant, solver: Solver, clock: Clock) -> Result<StudyReport> {
    if levels < 2 {
        return Err(Error::InvalidArgument("a refinement study needs at least 2 levels".into()));
    }
    let mut meshes = Vec::with_capacity(levels);
    meshes.push(base.clone());
    for _ in 1..levels {
        let next = refine_red(meshes.last().expect("non-empty"));
        meshes.push(next);
    }
    let mut records = Vec::with_capacity(levels);
    let mut checks = Vec::new();
    for (level, mesh) in meshes.iter().enumerate() {
        let s = if level == 0 { Solver::Dense } else { solver };
        let rec = level_record(level, mesh, variant, s, clock)?;
        if level > 0 && rec.solver == SolverKind::Power && rec.ndof <= DENSE_MAX_DOFS {
            let dense = korn_constant(&KornProblem::new(mesh, variant)?, Solver::Dense)?.lambda_max;
            let rel = (rec.lambda_max - dense).abs() / dense.abs();
            checks.push(check(
                &alloc::format!("dense_power_agreement_level{level}"),
                rel <= SOLVER_AGREEMENT,
                rel,
                SOLVER_AGREEMENT,
            ));
        }
        records.push(rec);
    }
    let ratio = ratio_max_min(records.iter().map(|r| r.lambda_max));
    checks.insert(0, check("h_independence", ratio <= H_INDEPENDENCE_RATIO, ratio, H_INDEPENDENCE_RATIO));
    Ok(StudyReport { variant: Some(variant), levels: records, checks })
}

/// Kuhn cube meshes squashed in x₃ by 0.6^k, k = 0..steps: slivers with
/// strictly decreasing minimum dihedral angle.
pub fn angle_family(steps: usize) -> Result<Vec<Mesh>> {
    let mut out: Vec<Mesh> = Vec::with_capacity(steps);
    let mut z = 1.0;
    for _ in 0..steps {
        let m = scaled_cube_mesh(1, [1.0, 1.0, z])?;
        if let Some(prev) = out.last() {
            if m.min_angle() >= prev.min_angle() {
                return Err(Error::InvalidArgument("angle family is not strictly decreasing in θ".into()));
            }
        }
        out.push(m);
        z *= 0.6;
    }
    Ok(out)
}

/// λ_max across a family of meshes ordered by decreasing minimum angle.
pub fn angle_study(family: &[Mesh], variant: Variant, solver: Solver, clock: Clock) -> Result<StudyReport> {
    if family.len() < 2 {
        return Err(Error::InvalidArgument("an angle study needs at least 2 meshes".into()));
    }
    let records = family
        .iter()
        .enumerate()
        .map(|(k, m)| level_record(k, m, variant, solver, clock))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = records.windows(2).all(|w| w[1].theta < w[0].theta);
    let finite = records.iter().all(|r| r.lambda_max.is_finite());
    let (first, last) = (&records[0], &records[records.len() - 1]);
    let trend = last.lambda_max / first.lambda_max;
    let checks = alloc::vec![
        check("theta_decreasing", decreasing, last.theta, first.theta),
        check("lambda_finite", finite, records.iter().map(|r| r.lambda_max).fold(0.0, f64::max), f64::INFINITY),
        check("lambda_grows_as_theta_shrinks", trend > 1.0, trend, 1.0),
    ];
    Ok(StudyReport { variant: Some(variant), levels: records, checks })
}
