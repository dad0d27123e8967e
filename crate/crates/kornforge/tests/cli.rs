use std::path::Path;
use std::process::{Command, Output};

use kornforge::io::{read_field, read_mesh, read_symmat};
use kornforge::report::Report;
use kornforge_core::fespace::DofKind;

fn kornforge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kornforge"))
        .args(args)
        .current_dir(dir)
        .env_remove("KORNFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_passes_on_the_kuhn_cube() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(&["verify", "--mesh", "gen:1", "--trials", "60", "--out", "v.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::read(&dir.path().join("v.json")).unwrap();
    assert_eq!(r.checks.len(), kornforge_core::verify::CHECK_NAMES.len());
    assert!(r.all_pass());
    assert!(r.checks.iter().all(|c| c.witness.is_some() && c.seed == 0));
}

#[test]
fn usage_errors_exit_two_with_one_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--bogus"][..],
        &["constant", "--ell", "1"],
        &["verify", "--mesh", "gen:0"],
        &["verify", "--mesh", "missing.tm"],
        &["export-form", "--form", "jump", "--kind", "continuous", "--out", "j.txt"],
    ] {
        let o = kornforge(args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    // Several problems are reported together.
    let o = kornforge(&["--threads", "0", "verify", "--trials", "3"], dir.path());
    let msg = stderr(&o);
    assert_eq!(code(&o), 2);
    assert!(msg.contains("--threads") && msg.contains("--trials"), "{msg}");
}

#[test]
fn constant_writes_field_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(
        &["constant", "--mesh", "gen:1", "--variant", "cg_phi2", "--out", "c.json", "--field", "w.txt", "--no-timings"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("cg_phi2 lambda_max = "), "{stdout}");
    let r = Report::read(&dir.path().join("c.json")).unwrap();
    assert_eq!(r.levels.len(), 1);
    assert_eq!(r.levels[0].runtime_s, None);
    assert!((r.levels[0].lambda_max - 2.9075).abs() < 1e-3);
    let f = read_field(std::io::BufReader::new(std::fs::File::open(dir.path().join("w.txt")).unwrap()), "w").unwrap();
    assert_eq!(f.kind, DofKind::Continuous);
    assert_eq!(f.coeffs.len(), r.levels[0].ndof);
}

#[test]
fn local_constants_are_listed_per_tet() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(&["constant", "--local", "--ell", "2", "--a", "-1", "--out", "l.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::read(&dir.path().join("l.json")).unwrap();
    assert_eq!(r.local.len(), 6);
    assert!(r.local.iter().all(|l| l.ell == 2.0 && l.k.is_finite() && l.k > 0.0));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# verify defaults\ntrials = 50\nseed = 7\nout = cfg.json\n").unwrap();
    let o = kornforge(&["--config", "run.cfg", "verify", "--seed", "9"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::read(&dir.path().join("cfg.json")).unwrap();
    assert!(r.checks.iter().all(|c| c.seed == 9));

    std::fs::write(dir.path().join("bad.cfg"), "trials = 50\nlevels = 3\n").unwrap();
    let o = kornforge(&["verify", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("levels"));
}

#[test]
fn mesh_gen_and_info_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(&["mesh", "gen", "--n", "2", "--refine", "1", "--out", "m.msh"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_mesh(&dir.path().join("m.msh")).unwrap();
    assert_eq!(m.num_tets(), 48 * 8);
    let o = kornforge(&["mesh", "info", "--mesh", "m.msh"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ntets"], 384);
    assert_eq!(v["stars_face_connected"], true);
}

#[test]
fn study_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(
        &["study", "angle", "--steps", "3", "--variant", "useful_two", "--out", "a.json", "--csv", "a.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::read(&dir.path().join("a.json")).unwrap();
    assert_eq!(r.levels.len(), 3);
    assert!(r.levels.windows(2).all(|w| w[1].theta < w[0].theta));
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn export_form_writes_symmetric_upper_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let o = kornforge(&["export-form", "--form", "rhs", "--variant", "disc", "--out", "r.txt"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_symmat(std::io::BufReader::new(std::fs::File::open(dir.path().join("r.txt")).unwrap()), "r").unwrap();
    assert_eq!(s.n, 180);
    assert!(!s.entries.is_empty());
}
