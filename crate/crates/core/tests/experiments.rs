use std::path::PathBuf;

use strata::experiments::{self, ExperimentConfig, RunOptions, Suite, SuiteReport};

fn cache() -> String {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("eigen-cache").display().to_string()
}

/// A 1025-point line grid with the cache attached; `extra` is spliced into the object.
fn line_config(extra: &str) -> ExperimentConfig {
    let json = format!(
        r#"{{"group": {{"id": "r1"}}, "grid": {{"half_widths": [32], "points": [1025]}},
            "cache_dir": {:?}{extra}}}"#,
        cache()
    );
    ExperimentConfig::from_json(&json).unwrap()
}

fn run(suite: Suite, cfg: &ExperimentConfig) -> SuiteReport {
    experiments::run(suite, cfg, &RunOptions::default()).unwrap()
}

fn failures(r: &SuiteReport) -> Vec<String> {
    r.checks.iter().filter(|c| !c.pass).map(|c| format!("{c:?}")).collect()
}

#[test]
fn suite_names_round_trip() {
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
    assert!("nope".parse::<Suite>().is_err());
}

#[test]
fn group_check_is_seeded() {
    let cfg = ExperimentConfig::from_json(r#"{"group": {"id": "engel"}, "samples": 100, "seed": 3}"#).unwrap();
    let a = run(Suite::GroupCheck, &cfg);
    let b = run(Suite::GroupCheck, &cfg);
    assert!(a.pass(), "{:?}", failures(&a));
    assert_eq!(a.checks, b.checks);
    let other = ExperimentConfig::from_json(r#"{"group": {"id": "engel"}, "samples": 100, "seed": 4}"#).unwrap();
    assert_ne!(run(Suite::GroupCheck, &other).checks, a.checks);
}

#[test]
fn lp_build_certifies_both_centers() {
    let cfg = line_config(r#", "profiles": [{"xi_center": 16}, {"xi_center": 27.2, "base": 3}]"#);
    let r = run(Suite::LpBuild, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
    assert_eq!(r.kernels.len(), 4);
    assert!(r.kernels.iter().any(|(n, _)| n.starts_with("psi-")));
}

#[test]
fn lp_kernel_moments() {
    let cfg = line_config(r#", "kernel": {"ghat": "lp", "xi_center": 16, "base": 2}"#);
    let r = run(Suite::Kernel, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
    assert_eq!(r.kernels.len(), 1);
}

#[test]
fn besov_norms_are_finite() {
    let cfg = line_config(
        r#", "profiles": [{"xi_center": 16}], "declared_k": 2, "j_max": 3,
           "params": [{"s": 0.5, "p": 2, "q": "inf"}, {"s": -1, "p": 1, "q": 1}]"#,
    );
    let r = run(Suite::Besov, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
    let norms = r.tables.iter().find(|t| t.name == "norms").unwrap();
    assert!(!norms.rows.is_empty());
}

#[test]
fn decay_slopes_on_the_line() {
    let cfg = line_config(r#", "wavelets": [{"kind": "mexican-hat", "k": 1}]"#);
    let r = run(Suite::Decay, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
    assert_eq!(r.checks.len(), 2);
}

#[test]
fn spread_bound_comes_from_the_configuration() {
    let cfg = line_config(
        r#", "profiles": [{"xi_center": 16}, {"xi_center": 27.2}], "declared_k": 2, "j_max": 4,
           "params": [{"s": 0.5, "p": 1, "q": 1}], "tolerances": {"spread": 1.0001}"#,
    );
    let r = run(Suite::Equivalence, &cfg);
    assert!(!r.pass());
    let w = r.summary().worst_case.unwrap();
    assert_eq!((w.bound, w.provenance.as_str()), (1.0001, "config"));
    assert!(w.value > 1.0001);
}

#[test]
fn abelian_group_check_passes() {
    let cfg = ExperimentConfig::from_json(r#"{"group": {"id": "r3"}, "samples": 64}"#).unwrap();
    let r = run(Suite::GroupCheck, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
}

#[test]
fn identity_multiplier_reports_the_delta() {
    let cfg = line_config(r#", "kernel": {"ghat": "one"}"#);
    let r = run(Suite::Kernel, &cfg);
    assert!(r.pass(), "{:?}", failures(&r));
    let k = &r.kernels[0].1;
    assert_eq!(k.max_abs(), k.value_at_origin().norm());
    assert!((k.integral().re - 1.0).abs() < 1e-12);
}

#[test]
fn cwt_equivalence_runs_on_the_line() {
    let cfg = line_config(
        r#", "profiles": [{"xi_center": 16}], "wavelets": [{"kind": "mexican-hat", "k": 1}],
           "declared_k": 2, "j_max": 4, "params": [{"s": 0, "p": 2, "q": 2}]"#,
    );
    let r = run(Suite::CwtEquivalence, &cfg);
    assert!(!r.checks.is_empty());
    assert!(r.pass(), "{:?}", failures(&r));
}
