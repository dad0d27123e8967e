//! Named property checks with seed-derived randomness and recomputable witnesses.
//!
//! Every check is "the largest value of a metric over a set of probes". The
//! probe attaining it is kept as the witness, and [`recompute`] re-evaluates
//! the metric on the witness alone.

mod checks;
mod nodal;

pub use checks::{CHECK_NAMES, STABILITY_RATIO};
pub use nodal::{lemma1_sharp_constant, nodal_jump_sum, NodeKind};

use alloc::string::String;
use alloc::vec::Vec;

use crate::diffops::EnrichRule;
use crate::error::{Error, Result};
use crate::fespace::DofKind;
use crate::mesh::Mesh;

/// The probe attaining a check's measured value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub kind: DofKind,
    pub coeffs: Vec<f64>,
    /// Vertices of a stand-alone tet, for checks that do not use the mesh.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub tet: Option<[[f64; 3]; 4]>,
    /// CK parameters the field was built from.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub params: Option<[f64; 10]>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub measured: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub tolerance: f64,
    pub seed: u64,
    /// max/min of the measured value over seeds s, s+1, s+2 for checks whose
    /// threshold is stability rather than a fixed bound.
    #[cfg_attr(feature = "serde", serde(default, with = "crate::serde_float::option"))]
    pub stability: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub witness: Option<Witness>,
}

/// Test hooks that swap in deliberately wrong operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Hooks {
    pub enrich: EnrichRule,
}

pub const MIN_TRIALS: usize = 50;

/// Runs every check on `mesh`, sorted by name.
pub fn run_all(mesh: &Mesh, seed: u64, trials: usize) -> Result<Vec<CheckResult>> {
    run_all_with(mesh, seed, trials, Hooks::default())
}

pub fn run_all_with(mesh: &Mesh, seed: u64, trials: usize, hooks: Hooks) -> Result<Vec<CheckResult>> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(alloc::format!("trials must be at least {MIN_TRIALS}")));
    }
    let ctx = checks::Context::new(mesh, hooks)?;
    let mut out: Vec<CheckResult> = CHECK_NAMES.iter().map(|n| ctx.run(n, seed, trials)).collect::<Result<_>>()?;
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Runs one named check.
pub fn run_check(mesh: &Mesh, name: &str, seed: u64, trials: usize, hooks: Hooks) -> Result<CheckResult> {
    checks::Context::new(mesh, hooks)?.run(name, seed, trials)
}

/// Re-evaluates the metric of check `name` on its witness.
pub fn recompute(mesh: &Mesh, result: &CheckResult, hooks: Hooks) -> Result<f64> {
    let w = result.witness.as_ref().ok_or_else(|| Error::InvalidArgument("check has no witness".into()))?;
    checks::Context::new(mesh, hooks)?.metric(&result.name, w)
}
