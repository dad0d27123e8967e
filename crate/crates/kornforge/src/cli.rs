//! Command-line front end.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::builder::PossibleValue;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use kornforge_core::fespace::{DofKind, P2Space};
use kornforge_core::forms::{
    assemble_boundary_l2, assemble_h1, assemble_h2_broken, assemble_hess, assemble_jump, assemble_jump_projected,
    assemble_l2, assemble_phi1, assemble_phi2, assemble_psi_surrogate, assemble_tf, PsiScale, QuadraticForm,
};
use kornforge_core::mesh::{gen_cube_mesh, refine_red, Mesh};
use kornforge_core::spectra::{
    angle_family, angle_study, korn_constant_with, local_korn_constant, refinement_study, KornProblem, LevelRecord,
    PowerOptions, Solver, Variant,
};
use kornforge_core::verify::{run_check, Hooks, CHECK_NAMES};
use rayon::prelude::*;

use crate::config::read_config;
use crate::error::{exit, AppError, AppResult};
use crate::io::{self, MeshFormat};
use crate::report::{write_csv, LocalRecord, MeshSummary, Report};

pub const THREADS_ENV: &str = "KORNFORGE_THREADS";

/// Writes to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
fn out(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(exit::OK);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(exit::USAGE);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { out(&format!("{}\n", format_args!($($arg)*))) };
}

#[derive(Debug, Parser)]
#[command(
    name = "kornforge",
    version,
    about = "Sharp constants and property checks for discrete trace-free Korn inequalities on P2 tetrahedral meshes",
    after_help = "Exit codes: 0 success, 1 a check failed, 2 usage or input error, 3 numerical failure."
)]
pub struct Cli {
    /// Worker threads [default: $KORNFORGE_THREADS, else all cores]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// File of `key = value` lines supplying defaults for the command's flags; flags given on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or inspect meshes
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Sharp Korn constant λ_max of one variant, or per-element constants k(T) with --local
    #[command(args_override_self = true)]
    Constant(ConstantArgs),
    /// Refinement and minimum-angle studies
    #[command(subcommand)]
    Study(StudyCommand),
    /// Run every property check and write a report
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Write an assembled quadratic form as a `symmat` coordinate list
    #[command(args_override_self = true)]
    ExportForm(ExportArgs),
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Write a Kuhn cube mesh
    #[command(args_override_self = true)]
    Gen(MeshGenArgs),
    /// Print a JSON summary of a mesh
    #[command(args_override_self = true)]
    Info(MeshArgs),
}

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// λ_max across successive red refinements (level 0 dense)
    #[command(args_override_self = true)]
    Refine(RefineArgs),
    /// λ_max across Kuhn cubes squashed in z by 0.6^k
    #[command(args_override_self = true)]
    Angle(AngleArgs),
}

/// `gen:N` or a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Gen(usize),
    File(PathBuf),
}

impl FromStr for MeshSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("gen:") {
            Some(n) => match n.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(MeshSource::Gen(n)),
                _ => Err(format!("'{s}': expected gen:N with N ≥ 1")),
            },
            None if s.is_empty() => Err("empty mesh source".into()),
            None => Ok(MeshSource::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSource::Gen(n) => write!(f, "gen:{n}"),
            MeshSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    /// `gen:N` for the unit cube cut into N³ Kuhn cells, or a mesh file (`.msh` Gmsh 2.2 ASCII, otherwise `tetmesh 1`)
    #[arg(long, default_value = "gen:1", value_name = "SOURCE")]
    pub mesh: MeshSource,
    /// Red refinements applied to the mesh
    #[arg(long, default_value_t = 0, value_name = "K")]
    pub refine: usize,
}

impl MeshArgs {
    pub fn describe(&self) -> String {
        if self.refine == 0 {
            self.mesh.to_string()
        } else {
            format!("{}+refine:{}", self.mesh, self.refine)
        }
    }

    pub fn load(&self) -> AppResult<Mesh> {
        let mut m = match &self.mesh {
            MeshSource::Gen(n) => gen_cube_mesh(*n),
            MeshSource::File(p) => io::read_mesh(p)?,
        };
        for _ in 0..self.refine {
            m = refine_red(&m);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantArg(pub Variant);

impl ValueEnum for VariantArg {
    fn value_variants<'a>() -> &'a [Self] {
        const ALL: [VariantArg; 6] = [
            VariantArg(Variant::UsefulOne),
            VariantArg(Variant::UsefulTwo),
            VariantArg(Variant::Disc),
            VariantArg(Variant::DiscProj),
            VariantArg(Variant::CgPhi1),
            VariantArg(Variant::CgPhi2),
        ];
        &ALL
    }

    fn to_possible_value(&self) -> Option<PossibleValue> {
        Some(PossibleValue::new(self.0.name()).help(self.0.describe()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    /// Dense generalized eigensolver (up to 4000 dofs)
    Dense,
    /// Block subspace iteration with factorized right-hand solves
    Power,
    /// Dense when feasible, otherwise power
    Auto,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Dense => Solver::Dense,
            SolverArg::Power => Solver::Power,
            SolverArg::Auto => Solver::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Discontinuous,
    Continuous,
}

impl From<KindArg> for DofKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Discontinuous => DofKind::Discontinuous,
            KindArg::Continuous => DofKind::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    /// ‖v‖² on Ω
    L2,
    /// Broken |v|²_H¹
    H1,
    /// ‖ε(v) − ⅓ div v 𝕀‖², broken
    Tf,
    /// Broken |v|²_H²
    H2,
    /// Σ_T ∫ |∇²v|² with mixed derivatives counted once per pair
    Hess,
    /// Σ_σ diam(σ)⁻¹ ‖[[v]]‖² over interior faces (discontinuous only)
    Jump,
    /// Same with the jump projected onto face quadratics (discontinuous only)
    JumpProj,
    /// ‖v‖² on ∂Ω
    BoundaryL2,
    /// Φ₁(v)² = ‖v − mean(v)‖²
    Phi1,
    /// Φ₂(v)², the boundary trace projected onto mean-free conformal Killing fields
    Phi2,
    /// Quadratic surrogate of Ψ_ℓ; ℓ defaults to the domain diameter
    Psi,
    /// Right-hand form of --variant
    Rhs,
}

#[derive(Debug, Clone, Args)]
pub struct MeshGenArgs {
    /// Cells per cube edge
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Red refinements applied after generation
    #[arg(long, default_value_t = 0, value_name = "K")]
    pub refine: usize,
    /// Output file; `.msh` selects Gmsh 2.2, anything else `tetmesh 1`
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Inequality whose sharp constant is computed
    #[arg(long, default_value = "useful_one")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
    /// Seed of the iterative solver's start block
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-element constants k(T) instead of the global constant
    #[arg(long)]
    pub local: bool,
    /// Ψ length scale ℓ (with --local) [default: diam T]
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<f64>,
    /// Ψ exponent of the div and curl terms (with --local) [default: -1.5]
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Ψ exponent of the curl curl terms (with --local) [default: -0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// JSON report
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Where the field attaining λ_max is written (`fieldvec 1` format) [default: worst_field.txt]
    #[arg(long, value_name = "PATH")]
    pub field: Option<PathBuf>,
    /// Leave the runtime field of the report empty
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StudyOutput {
    /// JSON report
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// CSV table `level,ntets,theta,h,lambda_max`
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Leave the runtime fields of the report empty
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Number of levels, the base mesh included
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value = "useful_one")]
    pub variant: VariantArg,
    /// Solver for levels ≥ 1 (level 0 is always dense)
    #[arg(long, value_enum, default_value_t = SolverArg::Power)]
    pub solver: SolverArg,
    #[command(flatten)]
    pub output: StudyOutput,
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    /// Family size
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    #[arg(long, default_value = "useful_one")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
    #[command(flatten)]
    pub output: StudyOutput,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random probes per check (at least 50)
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// JSON report [default: standard output]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, value_enum)]
    pub form: FormArg,
    /// Field space (ignored for --form rhs, which uses the variant's space)
    #[arg(long, value_enum, default_value_t = KindArg::Discontinuous)]
    pub kind: KindArg,
    /// Variant for --form rhs
    #[arg(long, default_value = "useful_one")]
    pub variant: VariantArg,
    /// Ψ length scale (with --form psi) [default: domain diameter]
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<f64>,
    /// Ψ exponent of the div and curl terms (with --form psi) [default: -1.5]
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Ψ exponent of the curl curl terms (with --form psi) [default: -0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&args) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    if e.use_stderr() {
        exit::USAGE
    } else {
        exit::OK
    }
}

/// Parses the command line, merging in the `--config` file when given.
fn parse(args: &[OsString]) -> Result<Cli, i32> {
    let cli = Cli::try_parse_from(args).map_err(clap_exit)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let entries = read_config(&path).map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })?;
    let merged = merge_config(args, &cli, &entries).map_err(|msg| {
        eprintln!("error: {}: {msg}", path.display());
        exit::USAGE
    })?;
    Cli::try_parse_from(&merged).map_err(clap_exit)
}

fn subcommand_path(cli: &Cli) -> Vec<&'static str> {
    match &cli.command {
        Command::Mesh(MeshCommand::Gen(_)) => vec!["mesh", "gen"],
        Command::Mesh(MeshCommand::Info(_)) => vec!["mesh", "info"],
        Command::Constant(_) => vec!["constant"],
        Command::Study(StudyCommand::Refine(_)) => vec!["study", "refine"],
        Command::Study(StudyCommand::Angle(_)) => vec!["study", "angle"],
        Command::Verify(_) => vec!["verify"],
        Command::ExportForm(_) => vec!["export-form"],
    }
}

/// Inserts `--key value` pairs from the config file right after the
/// subcommand names, so that later command-line flags override them.
fn merge_config(args: &[OsString], cli: &Cli, entries: &[(String, String)]) -> Result<Vec<OsString>, String> {
    let path = subcommand_path(cli);
    let mut cmd = Cli::command();
    for name in &path {
        cmd = cmd.find_subcommand(name).expect("known subcommand").clone();
    }
    let mut injected: Vec<OsString> = Vec::new();
    let mut unknown = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            unknown.push(key.clone());
            continue;
        }
        let arg = cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str()));
        let global = ["threads"].contains(&key.as_str());
        match arg {
            None if !global => unknown.push(key.clone()),
            Some(a) if !a.get_action().takes_values() => match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(format!("'{key}' is a switch; use true or false, not '{value}'")),
            },
            _ => {
                injected.push(format!("--{key}").into());
                injected.push(value.into());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(format!("unknown key(s) for '{}': {}", path.join(" "), unknown.join(", ")));
    }
    // Position just after the last subcommand name.
    let mut at = 1;
    for name in &path {
        at += args[at..].iter().position(|a| a == name).expect("subcommand present in argv") + 1;
    }
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn threads(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| format!("{THREADS_ENV}='{v}' is not a thread count")),
        Err(_) => Ok(None),
    }
}

/// Every argument error at once, before any computation.
fn validate(cli: &Cli) -> Vec<String> {
    let mut errs = Vec::new();
    match threads(cli) {
        Ok(Some(0)) => errs.push("--threads must be at least 1".to_string()),
        Ok(_) => {}
        Err(e) => errs.push(e),
    }
    let psi = |errs: &mut Vec<String>, ell: Option<f64>, a: Option<f64>, b: Option<f64>, allowed: bool, ctx: &str| {
        if !allowed && (ell.is_some() || a.is_some() || b.is_some()) {
            errs.push(format!("--ell, --a and --b only apply {ctx}"));
        }
        if let Some(l) = ell {
            if !(l > 0.0 && l.is_finite()) {
                errs.push(format!("--ell must be positive and finite, got {l}"));
            }
        }
        for (flag, v) in [("--a", a), ("--b", b)] {
            if v.is_some_and(|v| !v.is_finite()) {
                errs.push(format!("{flag} must be finite"));
            }
        }
    };
    match &cli.command {
        Command::Mesh(MeshCommand::Gen(g)) => {
            if g.n == 0 {
                errs.push("--n must be at least 1".into());
            }
        }
        Command::Mesh(MeshCommand::Info(_)) => {}
        Command::Constant(c) => {
            psi(&mut errs, c.ell, c.a, c.b, c.local, "with --local");
            if c.local && c.field.is_some() {
                errs.push("--field does not apply with --local".into());
            }
        }
        Command::Study(StudyCommand::Refine(r)) => {
            if r.levels < 2 {
                errs.push("--levels must be at least 2".into());
            }
        }
        Command::Study(StudyCommand::Angle(a)) => {
            if a.steps < 2 {
                errs.push("--steps must be at least 2".into());
            }
        }
        Command::Verify(v) => {
            if v.trials < kornforge_core::verify::MIN_TRIALS {
                errs.push(format!("--trials must be at least {}", kornforge_core::verify::MIN_TRIALS));
            }
        }
        Command::ExportForm(e) => {
            psi(&mut errs, e.ell, e.a, e.b, e.form == FormArg::Psi, "with --form psi");
            if matches!(e.form, FormArg::Jump | FormArg::JumpProj) && e.kind == KindArg::Continuous {
                errs.push("jump forms need --kind discontinuous".into());
            }
        }
    }
    errs
}

pub fn run(cli: &Cli) -> AppResult<i32> {
    let errs = validate(cli);
    if !errs.is_empty() {
        return Err(AppError::Usage(errs.join("; ")));
    }
    if let Ok(Some(n)) = threads(cli) {
        // Fails only if a pool already exists (repeated calls in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Mesh(MeshCommand::Gen(g)) => mesh_gen(g),
        Command::Mesh(MeshCommand::Info(m)) => mesh_info(m),
        Command::Constant(c) if c.local => constant_local(c),
        Command::Constant(c) => constant(c),
        Command::Study(StudyCommand::Refine(r)) => study_refine(r),
        Command::Study(StudyCommand::Angle(a)) => study_angle(a),
        Command::Verify(v) => verify(v),
        Command::ExportForm(e) => export_form(e),
    }
}

fn mesh_gen(g: &MeshGenArgs) -> AppResult<i32> {
    let mut m = gen_cube_mesh(g.n);
    for _ in 0..g.refine {
        m = refine_red(&m);
    }
    io::write_mesh(&m, &g.out, MeshFormat::from_path(&g.out))?;
    eprintln!("wrote {} ({} vertices, {} tets)", g.out.display(), m.num_vertices(), m.num_tets());
    Ok(exit::OK)
}

fn mesh_info(a: &MeshArgs) -> AppResult<i32> {
    let m = a.load()?;
    let json = serde_json::to_string_pretty(&MeshSummary::new(&m, &a.describe())).expect("summary serializes");
    outln!("{json}");
    Ok(exit::OK)
}

fn constant(c: &ConstantArgs) -> AppResult<i32> {
    let mesh = c.mesh.load()?;
    let variant = c.variant.0;
    let problem = KornProblem::new(&mesh, variant)?;
    let opts = PowerOptions { seed: PowerOptions::default().seed ^ c.seed, ..PowerOptions::default() };
    let start = Instant::now();
    let est = korn_constant_with(&problem, c.solver.into(), &opts)?;
    let runtime = start.elapsed().as_secs_f64();
    outln!(
        "{variant} lambda_max = {:?} ({} solver, {} dofs)",
        est.lambda_max,
        est.solver.name(),
        problem.ndof()
    );
    let field_path = c.field.clone().unwrap_or_else(|| PathBuf::from("worst_field.txt"));
    io::create(&field_path, |w| io::write_field(&est.worst, w))?;
    if let Some(out) = &c.out {
        let mut report = Report::new("constant");
        report.mesh = Some(MeshSummary::new(&mesh, &c.mesh.describe()));
        report.variant = Some(variant);
        report.levels.push(LevelRecord {
            level: c.mesh.refine,
            ntets: mesh.num_tets(),
            ndof: problem.ndof(),
            theta: mesh.min_angle(),
            h: mesh.h(),
            lambda_max: est.lambda_max,
            solver: est.solver,
            runtime_s: (!c.no_timings).then_some(runtime),
        });
        report.write(out)?;
    }
    Ok(exit::OK)
}

fn constant_local(c: &ConstantArgs) -> AppResult<i32> {
    let mesh = c.mesh.load()?;
    let mut report = Report::new("constant --local");
    report.mesh = Some(MeshSummary::new(&mesh, &c.mesh.describe()));
    outln!("tet k lambda_max ell theta");
    for (t, g) in mesh.geoms().iter().enumerate() {
        let mut scale = PsiScale::new(c.ell.unwrap_or_else(|| g.diameter()));
        scale.a = c.a.unwrap_or(scale.a);
        scale.b = c.b.unwrap_or(scale.b);
        let lk = local_korn_constant(g, Some(scale))?;
        outln!("{t} {:?} {:?} {:?} {:?}", lk.k, lk.lambda_max, scale.ell, g.min_dihedral());
        report.local.push(LocalRecord { tet: t, k: lk.k, ell: scale.ell, theta: g.min_dihedral(), diameter: g.diameter() });
    }
    if let Some(out) = &c.out {
        report.write(out)?;
    }
    Ok(exit::OK)
}

fn finish_study(mut report: Report, out: &StudyOutput) -> AppResult<i32> {
    if out.no_timings {
        report.levels.iter_mut().for_each(|l| l.runtime_s = None);
    }
    outln!("level ntets ndof theta h lambda_max solver");
    for l in &report.levels {
        outln!("{} {} {} {:?} {:?} {:?} {}", l.level, l.ntets, l.ndof, l.theta, l.h, l.lambda_max, l.solver.name());
    }
    print_checks(&report);
    if let Some(p) = &out.out {
        report.write(p)?;
    }
    if let Some(p) = &out.csv {
        write_csv(&report.levels, p)?;
    }
    Ok(if report.all_pass() { exit::OK } else { exit::CHECK_FAILED })
}

fn print_checks(report: &Report) {
    for c in &report.checks {
        outln!("{} {} measured={:?} tolerance={:?}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured, c.tolerance);
    }
}

fn study_refine(r: &RefineArgs) -> AppResult<i32> {
    let base = r.mesh.load()?;
    let t0 = Instant::now();
    let clock = move || t0.elapsed().as_secs_f64();
    let study = refinement_study(&base, r.levels, r.variant.0, r.solver.into(), Some(&clock))?;
    let mut report = Report::from_study("study refine", study);
    report.mesh = Some(MeshSummary::new(&base, &r.mesh.describe()));
    finish_study(report, &r.output)
}

fn study_angle(a: &AngleArgs) -> AppResult<i32> {
    let family = angle_family(a.steps)?;
    let t0 = Instant::now();
    let clock = move || t0.elapsed().as_secs_f64();
    let study = angle_study(&family, a.variant.0, a.solver.into(), Some(&clock))?;
    finish_study(Report::from_study("study angle", study), &a.output)
}

fn verify(v: &VerifyArgs) -> AppResult<i32> {
    let mesh = v.mesh.load()?;
    let mut checks = CHECK_NAMES
        .par_iter()
        .map(|name| run_check(&mesh, name, v.seed, v.trials, Hooks::default()))
        .collect::<Result<Vec<_>, _>>()?;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let mut report = Report::new("verify");
    report.mesh = Some(MeshSummary::new(&mesh, &v.mesh.describe()));
    report.checks = checks;
    match &v.out {
        Some(p) => {
            print_checks(&report);
            report.write(p)?;
        }
        None => out(&report.to_json()),
    }
    Ok(if report.all_pass() { exit::OK } else { exit::CHECK_FAILED })
}

fn export_form(e: &ExportArgs) -> AppResult<i32> {
    let mesh = e.mesh.load()?;
    let form: QuadraticForm = if e.form == FormArg::Rhs {
        KornProblem::new(&mesh, e.variant.0)?.rhs
    } else {
        let space = P2Space::new(&mesh, e.kind.into());
        match e.form {
            FormArg::L2 => assemble_l2(&space),
            FormArg::H1 => assemble_h1(&space),
            FormArg::Tf => assemble_tf(&space),
            FormArg::H2 => assemble_h2_broken(&space),
            FormArg::Hess => assemble_hess(&space),
            FormArg::Jump => assemble_jump(&space)?,
            FormArg::JumpProj => assemble_jump_projected(&space)?,
            FormArg::BoundaryL2 => assemble_boundary_l2(&space),
            FormArg::Phi1 => assemble_phi1(&space),
            FormArg::Phi2 => assemble_phi2(&space)?,
            FormArg::Psi => {
                let mut scale = PsiScale::new(e.ell.unwrap_or_else(|| mesh.domain_diameter()));
                scale.a = e.a.unwrap_or(scale.a);
                scale.b = e.b.unwrap_or(scale.b);
                assemble_psi_surrogate(&space, scale)?
            }
            FormArg::Rhs => unreachable!(),
        }
    };
    io::create(&e.out, |w| io::write_symmat(&form, w))?;
    eprintln!("wrote {} ({} dofs)", e.out.display(), form.ndof);
    Ok(exit::OK)
}
