use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entropy-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    cli(&args)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

/// Header line, column names, then rows.
fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CRLF in {}", path.display());
    let (header, body) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let cols = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header.to_string(), cols, rows)
}

fn column(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap()
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn singleton_integral_equals_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "entropy",
        &configs().join("entropy_singleton.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (header, cols, rows) = read_csv(&tmp.path().join("entropy_integral.csv"));
    assert!(
        header.starts_with("# entropy-lab ")
            && header.contains("seed=1 ")
            && header.contains("config_sha256=")
    );
    let (d, j, jb) = (
        column(&cols, "delta"),
        column(&cols, "j_uniform"),
        column(&cols, "j_bracketing"),
    );
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert_eq!(r[d], r[j]);
        assert_eq!(r[d], r[jb]);
    }
}

/// Minimal number of members whose closed `radius`-balls cover all members.
fn brute_force_cover(d: &[Vec<f64>], radius: f64) -> usize {
    let k = d.len();
    (1..=k)
        .find(|&size| {
            (0u32..1 << k)
                .filter(|s| s.count_ones() as usize == size)
                .any(|s| {
                    (0..k).all(|i| {
                        (0..k).any(|c| s >> c & 1 == 1 && d[i][c] <= radius * (1.0 + 1e-12))
                    })
                })
        })
        .unwrap()
}

#[test]
fn halfline_covering_column_matches_brute_force() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "entropy",
        &configs().join("entropy_halflines.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let (_, cols, rows) = read_csv(&tmp.path().join("entropy_sweep.csv"));
    // half-lines on 4 uniform points: members 1{x ≤ t_i}, i = 0..4, distance √(|i−j|/4), ‖F‖ = 1
    let d: Vec<Vec<f64>> = (0..5)
        .map(|i| {
            (0..5)
                .map(|j| ((i as f64 - j as f64).abs() / 4.0).sqrt())
                .collect()
        })
        .collect();
    let (e, c, g) = (
        column(&cols, "eps"),
        column(&cols, "covering_exact"),
        column(&cols, "covering_greedy"),
    );
    for r in &rows {
        let eps: f64 = r[e].parse().unwrap();
        let want = brute_force_cover(&d, eps);
        assert_eq!(r[c].parse::<usize>().unwrap(), want, "ε = {eps}");
        assert!(r[g].parse::<usize>().unwrap() >= want);
    }
}

#[test]
fn zero_class_smoke_passes_with_zero_ratios() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "verify",
        &configs().join("verify_smoke.json"),
        tmp.path(),
        &["--workers", "2"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let (_, cols, rows) = read_csv(&tmp.path().join("ratios.csv"));
    let r = column(&cols, "ratio");
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row[r] == "0.0"));
    assert_eq!(
        summary(&tmp.path().join("verify_summary.json"))["passed"],
        true
    );
}

#[test]
fn corrupted_curve_fails_structure_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "verify",
        &configs().join("verify_corrupted.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let s = summary(&tmp.path().join("verify_summary.json"));
    assert_eq!(s["passed"], false);
    let failed: Vec<&str> = s["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"structure.concavity"), "{failed:?}");
}

#[test]
fn sqrt_modulus_rate_is_a_quarter() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("rate", &configs().join("rate_sqrt.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&tmp.path().join("rate_summary.json"));
    assert_eq!(s["rates"][0]["n"], 64);
    assert!((s["rates"][0]["delta_n"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn single_sample_size_flags_slope_unavailable() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "rate",
        &configs().join("rate_single_n.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&tmp.path().join("rate_summary.json"));
    assert_eq!(s["experiment"]["slope_available"], false);
    assert!(s["experiment"]["slope"].is_null());
    assert_eq!(s["rates"].as_array().unwrap().len(), 1);
}

#[test]
fn isotonic_demo_slope_in_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "rate",
        &configs().join("rate_isotonic.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&tmp.path().join("rate_summary.json"));
    assert_eq!(s["experiment"]["in_interval"], true);
    let (_, _, rows) = read_csv(&tmp.path().join("experiment.csv"));
    assert_eq!(rows.len(), 7);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run("rate", &configs().join("rate_single_n.json"), &a, &[]);
    run(
        "rate",
        &configs().join("rate_single_n.json"),
        &b,
        &["--seed", "99"],
    );
    let ha = read_csv(&a.join("experiment.csv"));
    let hb = read_csv(&b.join("experiment.csv"));
    assert!(ha.0.contains("seed=5 "));
    assert!(hb.0.contains("seed=99 "));
    assert_ne!(ha.2, hb.2);
    assert_eq!(summary(&b.join("rate_summary.json"))["header"]["seed"], 99);
}

#[test]
fn unknown_field_is_a_config_error_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"seed": 1, "modulus": {"kind": "power", "c": 1, "a": 0.5}, "n_grid": [4], "experiment": {"n_list": [8], "replications": 2, "sigma": 1, "slope": 3}}"#,
    );
    let o = run("rate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("experiment") && err.contains("slope"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn malformed_json_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"seed\": 1,\n  \"n_grid\": [4,,]\n}");
    let o = run("rate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_with_config_code() {
    assert_eq!(cli(&["verify"]).status.code(), Some(3));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "rate",
        &configs().join("rate_sqrt.json"),
        tmp.path(),
        &["--workers", "0"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn overflowing_envelope_is_a_numeric_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
  "seed": 1,
  "devices": {
    "young_pairs": 10,
    "grid": {"kind": "unit", "m": 8},
    "measure": {"kind": "uniform"},
    "class": {"family": {"kind": "halflines"}, "scale": 40},
    "n_list": [16],
    "draws": 2,
    "holder_p": [2],
    "max_cv": 0.5,
    "fourth_moment_p": 2,
    "max_refinement_change": 0.05
  }
}"#,
    );
    let o = run("verify", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid point"));
}

#[test]
fn curve_not_dominating_class_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
  "seed": 1,
  "studies": [{
    "name": "undercovered",
    "grid": {"kind": "unit", "m": 16},
    "measure": {"kind": "uniform"},
    "class": {"family": {"kind": "halflines"}},
    "curve": {"kind": "singleton"},
    "n_grid": [16],
    "delta_grid": [0.5],
    "replications": 10,
    "ratios": [{"theorem": "thm21", "max_ratio": 2}]
  }]
}"#,
    );
    let o = run("verify", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not dominate"));
}

#[test]
fn bound_calculator_matches_library() {
    let o = cli(&[
        "bound", "bounded", "--vc", "1,2", "--delta", "0.1", "--n", "100", "--f-norm", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let got: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    let curve = entropy_lab::integral::EntropyCurve::vc(1.0, 2.0).unwrap();
    let j = entropy_lab::integral::uniform_entropy_integral(&curve, 0.1)
        .unwrap()
        .value;
    let want = entropy_lab::engine::bound_thm21(j, 0.1, 100, 1.0).unwrap();
    assert_eq!(got, want);
    let o = cli(&[
        "bound", "bounded", "--delta", "0.1", "--n", "100", "--f-norm", "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = cli(&[
        "bound", "moment", "--power", "1,1", "--delta", "0.25", "--n", "16", "--p", "2", "--f2",
        "1", "--fmom", "1",
    ]);
    let got: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((got - 0.25 * 3f64.powf(2.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("verify_smoke.json");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run("verify", &cfg, &a, &["--workers", "1"]);
    run("verify", &cfg, &b, &["--workers", "3"]);
    for f in [
        "checks.csv",
        "ratios.csv",
        "chain.csv",
        "verify_summary.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}
