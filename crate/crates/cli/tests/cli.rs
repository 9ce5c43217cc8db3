use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn homfit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homfit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = homfit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn result(dir: &Path, sub: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(sub).join("result.json")).unwrap()).unwrap()
}

fn derived(dir: &Path, sub: &str, key: &str) -> f64 {
    result(dir, sub)["derived"][key].as_f64().unwrap()
}

#[test]
fn simulate_fit_and_visibility() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["--seed", "5", "--out", "sim", "simulate", "--counts", "2e5", "--r", "0.46", "--t", "0.54"]);
    ok(
        p,
        &["--out", "fit", "fit-hom", "sim/histogram.csv", "--r", "0.46", "--t", "0.54", "--n-starts", "10"],
    );
    let v = derived(p, "fit", "visibility");
    let hw = derived(p, "fit", "visibility_ci95_halfwidth");
    assert!((v - 0.62).abs() < 0.05 && hw > 0.0 && hw < 0.05, "{v} ± {hw}");
    for f in ["config.json", "result.json", "report.txt", "model.csv"] {
        assert!(p.join("fit").join(f).is_file(), "{f}");
    }
    // the saved fit feeds the visibility subcommand
    ok(p, &["--out", "vis", "visibility", "--fit-result", "fit/result.json"]);
    assert_eq!(derived(p, "vis", "visibility"), v);
    let report = std::fs::read_to_string(p.join("fit/report.txt")).unwrap();
    assert!(report.contains("visibility") && report.contains("area_central_counts"), "{report}");
}

#[test]
fn theory_and_inversion() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["--out", "v", "theory", "--grad", "2.3", "--gjitter", "3.7"]);
    assert!((derived(p, "v", "visibility") - 0.6167).abs() < 1e-4);
    ok(p, &["--out", "j", "theory", "--grad", "2.3", "--invert", "0.6167"]);
    assert!((derived(p, "j", "gamma_jitter_per_ns") - 3.7).abs() < 0.01);
}

#[test]
fn taper_length_scales_with_alpha() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["--out", "a1", "taper", "--neff", "2.5"]);
    ok(p, &["--out", "a10", "taper", "--neff", "2.5", "--alpha", "10"]);
    let (l1, l10) = (derived(p, "a1", "taper_length_um"), derived(p, "a10", "taper_length_um"));
    assert!((l10 / l1 - 10.0).abs() < 1e-12);
    assert!((l1 - 182.0 / 1.5e3).abs() < 1e-12);
    let csv = std::fs::read_to_string(p.join("a1/taper.csv")).unwrap();
    assert!(csv.starts_with("z_um,width_nm\n0,300\n"), "{csv}");
}

#[test]
fn loss_budget_arithmetic() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["--out", "b", "loss-budget", "--detected", "1e6", "--repetition", "76e6", "--loss", "a=0.26", "--loss", "b=0.5"]);
    let want = 1e6 / 76e6 / (0.26 * 0.5);
    assert!((derived(p, "b", "eta_sp") - want).abs() < 1e-12);
}

#[test]
fn exit_codes_follow_error_class() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(homfit(p, &["fit-irf", "missing.csv"]).status.code(), Some(2));

    std::fs::write(p.join("bad.csv"), "time_ns,counts\n0.0,1\n0.1,-3\n").unwrap();
    let out = homfit(p, &["fit-irf", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("negative"), "{err}");

    assert_eq!(homfit(p, &["theory", "--grad", "-1", "--gjitter", "3"]).status.code(), Some(2));

    // a thin low-index core has no guided mode
    let out = homfit(
        p,
        &["mode-solve", "--width", "40", "--thickness", "20", "--n-core", "1.2", "--dx", "5", "--dy", "5"],
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rerun_from_config_is_identical() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["--out", "sim", "simulate", "--counts", "5e3"]);
    ok(p, &["--out", "fit", "fit-hom", "sim/histogram.csv", "--n-starts", "6"]);
    let first = std::fs::read(p.join("fit/result.json")).unwrap();
    let seed = result(p, "fit")["provenance"]["seed"].as_u64().unwrap();
    ok(p, &["--threads", "3", "--out", "again", "run", "fit/config.json"]);
    assert_eq!(std::fs::read(p.join("again/result.json")).unwrap(), first);
    assert_eq!(result(p, "again")["provenance"]["seed"].as_u64(), Some(seed));
    // without --out the rerun lands beside its config
    ok(p, &["run", "sim/config.json"]);
    assert!(p.join("sim/histogram.csv").is_file());
}
