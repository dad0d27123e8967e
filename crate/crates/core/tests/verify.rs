//! Property checks: every check passes on the Kuhn meshes, witnesses
//! reproduce the measured values, and a broken enrichment is caught.

use kornforge_core::diffops::EnrichRule;
use kornforge_core::mesh::gen_cube_mesh;
use kornforge_core::verify::{recompute, run_all, run_all_with, run_check, Hooks, CHECK_NAMES};
use kornforge_core::Error;

#[test]
fn all_checks_pass_on_kuhn_meshes() {
    for n in [1, 2] {
        let m = gen_cube_mesh(n);
        let r = run_all(&m, 0, 60).unwrap();
        assert_eq!(r.len(), CHECK_NAMES.len());
        for c in &r {
            assert!(c.pass, "n={n}: {c:?}");
        }
        assert!(r.windows(2).all(|w| w[0].name < w[1].name));
    }
}

#[test]
fn witnesses_reproduce_measured_values() {
    let m = gen_cube_mesh(1);
    for c in run_all(&m, 3, 50).unwrap() {
        let again = recompute(&m, &c, Hooks::default()).unwrap();
        assert!((again - c.measured).abs() <= 1e-12 * c.measured.abs().max(1e-300), "{}: {} vs {}", c.name, again, c.measured);
    }
}

#[test]
fn identical_inputs_give_identical_results() {
    let m = gen_cube_mesh(1);
    assert_eq!(run_all(&m, 11, 50).unwrap(), run_all(&m, 11, 50).unwrap());
    assert_ne!(run_all(&m, 11, 50).unwrap(), run_all(&m, 12, 50).unwrap());
}

#[test]
fn broken_enrichment_fails_lemma1() {
    let m = gen_cube_mesh(1);
    let hooks = Hooks { enrich: EnrichRule::FirstInStar };
    let r = run_all_with(&m, 0, 200, hooks).unwrap();
    for name in ["lemma1_vertex", "lemma1_midpoint"] {
        let c = r.iter().find(|c| c.name == name).unwrap();
        assert!(!c.pass, "{c:?}");
        // Copying one tet's value leaves the other tet of a two-tet star with
        // the whole jump: the ratio is exactly one.
        assert!((c.measured - 1.0).abs() < 1e-12, "{c:?}");
    }
}

#[test]
fn lemma1_bound_is_the_star_oracle() {
    let m = gen_cube_mesh(1);
    let c = run_check(&m, "lemma1_vertex", 0, 200, Hooks::default()).unwrap();
    assert!((c.tolerance / (1.0 + 1e-9) - 35.0 / 72.0).abs() < 1e-14);
    assert!(c.measured > 0.1 && c.measured <= c.tolerance);
}

#[test]
fn bad_arguments_are_errors() {
    let m = gen_cube_mesh(1);
    assert!(matches!(run_all(&m, 0, 10), Err(Error::InvalidArgument(_))));
    assert!(matches!(run_check(&m, "no_such_check", 0, 50, Hooks::default()), Err(Error::InvalidArgument(_))));
}
