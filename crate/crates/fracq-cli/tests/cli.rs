//! End-to-end tests of the `fracq` binary: exit codes, report schema,
//! determinism, artifact round-trips, and the per-command contracts.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const PI: f64 = std::f64::consts::PI;

fn fracq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracq"))
        .args(args)
        .arg("--set")
        .arg(format!("out_dir={}", dir.display()))
        .output()
        .expect("binary runs")
}

/// Run without touching out_dir (for commands that write nothing, or to test
/// defaults).
fn fracq_bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn check_by_name<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["checks"]
        .as_array()
        .expect("checks array")
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check named {name:?} in {doc}"))
}

#[test]
fn verify_kernels_passes_and_embeds_the_defaults_table() {
    let out = fracq_bare(&["verify-kernels"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "verify-kernels");
    assert_eq!(doc["pass"], true);
    // The versioned defaults ride along in every report.
    assert_eq!(doc["defaults"]["version"], 1);
    assert_eq!(doc["defaults"]["box"], 40.0);
    assert_eq!(doc["defaults"]["grid"], 64);
    assert_eq!(doc["defaults"]["tol"], 1e-6);
    for name in ["normalization n=1, y=1", "normalization n=3, y=1", "normalization n=5, y=1"] {
        assert_eq!(check_by_name(&doc, name)["pass"], true);
    }
    assert_eq!(check_by_name(&doc, "top-order constant κ₃ = 4/π²")["pass"], true);
}

#[test]
fn verify_kernels_perturbed_constant_fails_with_exit_1() {
    let out = fracq_bare(&["verify-kernels", "--set", "verify-kernels.perturb_constant=true"]);
    assert_eq!(code(&out), 1);
    let doc = report(&out);
    assert_eq!(doc["pass"], false);
    assert_eq!(check_by_name(&doc, "top-order constant κ₃ = 4/π²")["pass"], false);
}

#[test]
fn verify_bessel_sweeps_thirty_tuples() {
    let out = fracq_bare(&["verify-bessel"]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["results"]["tuples"].as_array().expect("tuples").len(), 30);
}

#[test]
fn bubble_defaults_pass_and_write_readable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracq(&["bubble"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["pass"], true);

    let total = doc["results"]["total_curvature"].as_f64().expect("total");
    let want = 4.0 * PI * PI;
    assert!((total - want).abs() <= 1e-3 * want, "total {total}");

    // The residual field round-trips through its on-disk form.
    let field = fracq_core::gf3::read_gf3(dir.path().join("residual.gf3")).unwrap();
    assert_eq!(field.box3.resolution, [128, 128, 128]);
    let residual_rel = doc["results"]["residual_max_relative"].as_f64().unwrap();
    assert!(residual_rel <= 1e-3);

    // Radial profile: header plus one row per sample point, u decreasing.
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r,u,curvature");
    assert_eq!(lines.len(), 1 + 65);
    let u_at = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(u_at(lines[1]) > u_at(lines[65]));
}

#[test]
fn bubble_total_curvature_is_scale_invariant() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let out1 = fracq(&["bubble"], dir1.path());
    // λ = 2 with the box and report region shrunk by the same factor lands on
    // the identical discrete problem, up to roundoff in the samples.
    let out2 = fracq(
        &[
            "bubble",
            "--set",
            "bubble.lambda=2",
            "--set",
            "bubble.box=16",
            "--set",
            "bubble.region=2",
        ],
        dir2.path(),
    );
    assert_eq!(code(&out1), 0);
    assert_eq!(code(&out2), 0);
    let d1 = report(&out1);
    let d2 = report(&out2);
    let t1 = d1["results"]["total_curvature"].as_f64().unwrap();
    let t2 = d2["results"]["total_curvature"].as_f64().unwrap();
    assert!((t1 - t2).abs() <= 1e-10 * t1.abs(), "totals {t1} vs {t2}");
    let r1 = d1["results"]["residual_max_relative"].as_f64().unwrap();
    let r2 = d2["results"]["residual_max_relative"].as_f64().unwrap();
    assert!((r1 - r2).abs() <= 1e-6 * r1.abs(), "residuals {r1} vs {r2}");
}

#[test]
fn bubble_rejects_nonpositive_scale() {
    let out = fracq_bare(&["bubble", "--set", "bubble.lambda=-1"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fracq:"));
}

#[test]
fn relation_agrees_on_model_and_gaussian_inputs() {
    for function in ["bubble", "gaussian"] {
        let out = fracq_bare(&["relation", "--set", &format!("relation.function={function}")]);
        assert_eq!(code(&out), 0, "{function} stderr: {}", String::from_utf8_lossy(&out.stderr));
        let doc = report(&out);
        assert_eq!(doc["pass"], true, "{function}");
        let rel = check_by_name(&doc, "route agreement (relative)")["value"].as_f64().unwrap();
        assert!(rel <= 2e-2, "{function}: {rel}");
    }
}

#[test]
fn relation_accepts_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let b = fracq_core::grid::Box3::cube([0.0; 3], 8.0, 64).unwrap();
    let field = fracq_core::grid::GridField3::from_profile(
        b,
        fracq_core::grid::Profile::Gaussian { center: [0.0; 3], sigma: 1.0, amp: 1.0 },
    )
    .unwrap();
    let path = dir.path().join("g.gf3");
    fracq_core::gf3::write_gf3(&field, &path).unwrap();

    let out = fracq_bare(&["relation", "--set", &format!("relation.function={}", path.display())]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    // The report echoes the geometry read from the file, not the defaults.
    assert_eq!(doc["config"]["resolution"], serde_json::json!([64, 64, 64]));
}

#[test]
fn blowup_profile_mode_requires_phi() {
    let out = fracq_bare(&["blowup"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi"));
}

#[test]
fn blowup_profile_mode_tracks_the_growth_profile() {
    let dir = tempfile::tempdir().unwrap();
    // Reduced resolution and two steps keep this fast; the deviation column
    // must still decrease.
    let out = fracq(
        &[
            "blowup",
            "--set",
            r#"blowup.phi={"coefficients":[1,0,0]}"#,
            "--set",
            "blowup.resolution=32",
            "--set",
            "blowup.k_list=[1,2]",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(check_by_name(&doc, "deviation decreasing")["pass"], true);

    let rows = doc["results"]["summary"].as_array().expect("summary");
    assert_eq!(rows.len(), 2);
    let dev: Vec<f64> = rows.iter().map(|r| r["sup_deviation_away"].as_f64().unwrap()).collect();
    assert!(dev[1] < dev[0], "deviations {dev:?}");
    for r in rows {
        assert_eq!(r["converged"], true);
        assert!(r["residual"].as_f64().unwrap() <= 1e-8);
    }

    // Per-step artifacts exist and the fields reload.
    for k in [1, 2] {
        let summary: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("solve_k{k}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["converged"], true);
        let u = fracq_core::gf3::read_gf3(dir.path().join(format!("u_k{k}.gf3"))).unwrap();
        assert_eq!(u.box3.resolution, [32, 32, 32]);
        fracq_core::gf3::read_gf3(dir.path().join(format!("v_k{k}.gf3"))).unwrap();
    }
    assert!(dir.path().join("masses.csv").exists());
}

#[test]
fn blowup_scaled_bubble_mode_flags_only_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracq(&["blowup", "--set", "blowup.mode=scaled-bubble"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(check_by_name(&doc, "concentration isolated at the scaling center")["pass"], true);
    assert_eq!(doc["results"]["flagged"], serde_json::json!([0]));
    let verdicts = &doc["results"]["concentration"]["verdicts"];
    assert_eq!(verdicts[0], "above");
    assert_eq!(verdicts[1], "below");
}

#[test]
fn blowup_rejects_unknown_mode() {
    let out = fracq_bare(&["blowup", "--set", "blowup.mode=sideways"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn pizzetti_gates_only_biharmonic_polynomials() {
    let out = fracq_bare(&["pizzetti"]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    let rows = doc["results"]["polynomials"].as_array().expect("rows");
    assert_eq!(rows.len(), 6); // radius-sq plus five random projections
    assert!(rows.iter().all(|r| r["biharmonic"] == true));

    // |X|⁴ is not biharmonic: its row is reported with a large residual but
    // does not gate the exit code.
    let out = fracq_bare(&["pizzetti", "--set", "pizzetti.polynomial=radius-fourth"]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    let row = &doc["results"]["polynomials"][0];
    assert_eq!(row["biharmonic"], false);
    assert!(row["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn brezis_merle_classifies_both_sides_of_the_critical_exponent() {
    let out = fracq_bare(&["brezis-merle"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(check_by_name(&doc, "classification at p=1.5")["pass"], true);
    assert_eq!(check_by_name(&doc, "classification at p=2.5")["pass"], true);
    let probes = doc["results"]["probes"].as_array().expect("probes");
    assert_eq!(probes[0]["divergent"], false);
    assert_eq!(probes[1]["divergent"], true);

    // A custom exponent list without expectations runs as a diagnostic: the
    // only gated check is recovering the point mass.
    let out = fracq_bare(&["brezis-merle", "--set", "brezis-merle.p_list=[1.5]"]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 1);

    // An expectation list of the wrong length is a configuration error.
    let out = fracq_bare(&["brezis-merle", "--set", "brezis-merle.expect_divergent=[true]"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn scan_writes_the_mass_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracq(&["scan"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&out);
    assert_eq!(doc["results"]["flagged"], serde_json::json!([0]));
    let csv = std::fs::read_to_string(dir.path().join("masses.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "candidate_x,candidate_y,candidate_z,radius,mass");
    assert_eq!(lines.len(), 1 + 2 * 3); // two candidates × three radii
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_fracq"))
            .args(["pizzetti"])
            .env("FRACQ_THREADS", threads)
            .output()
            .expect("binary runs");
        assert_eq!(code(&out), 0);
        out.stdout
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn config_file_is_loaded_and_must_name_the_same_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"command": "pizzetti", "pizzetti": {"radius": 0.5}}"#).unwrap();
    let out = fracq_bare(&["pizzetti", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["config"]["radius"], 0.5);

    // The same file given to a different command is rejected.
    let out = fracq_bare(&["scan", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&fracq_bare(&["no-such-command"])), 2);
    assert_eq!(code(&fracq_bare(&[])), 2);
    assert_eq!(code(&fracq_bare(&["bubble", "--set", "missing-equals"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_fracq"))
        .args(["verify-bessel"])
        .env("FRACQ_THREADS", "abc")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 2);
}
