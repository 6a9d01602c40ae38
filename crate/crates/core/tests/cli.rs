use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use macrorealism::cli::{read_manifest, RunManifest};

fn lgisim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgisim"))
        .args(args)
        .env_remove("LGI_BENCH_SEED")
        .output()
        .expect("spawn lgisim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

#[test]
fn default_theta_sweep_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&["sweep-theta", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("theta_sweep.csv")).unwrap();
    assert_eq!(csv, golden("theta_sweep_default.csv"));
}

#[test]
fn default_gamma_sweep_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&["sweep-gamma", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("gamma_sweep.csv")).unwrap();
    assert_eq!(csv, golden("gamma_sweep_default.csv"));
}

#[test]
fn theta_sweep_header_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&[
        "sweep-theta",
        "--step",
        "15",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("theta_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..9],
        [
            "theta_deg",
            "p_plus",
            "p_plus_sigma",
            "p_plus_N2",
            "p_plus_N2_sigma",
            "p_plus_N3",
            "p_plus_N3_sigma",
            "p_minus",
            "p_minus_sigma"
        ]
    );
    for name in [
        "re_w_plus",
        "im_w_plus",
        "re_w_minus",
        "im_w_minus",
        "k31",
        "k32",
        "k33",
        "k34",
    ] {
        let i = header.iter().position(|h| *h == name).unwrap();
        assert_eq!(header[i + 1], format!("{name}_sigma"));
    }
    assert_eq!(lines.count(), 7);
}

#[test]
fn noiseless_fine_sweep_reports_k33_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&[
        "sweep-theta",
        "--start",
        "0",
        "--end",
        "90",
        "--step",
        "1",
        "--gamma",
        "12",
        "--noise",
        "0",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("k33 violated")).unwrap();
    // 2 sin22.5° (sin22.5° − cos22.5°) = 1 − √2
    assert!(
        line.contains("theory minimum -0.4142135624 at theta=22.5000 deg"),
        "{line}"
    );
    assert!(!out.contains("k31 violated") && !out.contains("k32 violated"));
}

#[test]
fn amplify_adds_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&[
        "sweep-theta",
        "--step",
        "45",
        "--amplify",
        "2",
        "--noise",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("theta_sweep.csv")).unwrap();
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .ends_with(",p_plus_amp,p_plus_amp_sigma"));
}

#[test]
fn gamma_sweep_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lgisim(&["sweep-gamma", "--gamma-list", "12", "--out", out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("gamma_sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    let header: Vec<&str> = rows[0].split(',').collect();
    let cells: Vec<&str> = rows[1].split(',').collect();
    let col = |n: &str| cells[header.iter().position(|h| *h == n).unwrap()];
    assert_eq!(col("re_w_theory"), "0.5773502692");
    assert_eq!(col("norm_w_sq_theory"), "0.3333333333");
    assert_ne!(col("re_w_sigma"), "0.0000000000");

    let o = lgisim(&["sweep-gamma", "--gamma-list", "-4,0,4", "--out", out]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    let csv = fs::read_to_string(dir.path().join("gamma_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn bounds_output() {
    let o = lgisim(&["bounds", "-n", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("classical min -2.0000000000 max 2.0000000000"));
    assert!(out.contains("Lüders bound 2.8284271247"));
    let o = lgisim(&["bounds", "-n", "6"]);
    assert!(stdout(&o).contains("Lüders bound 5.1961524227"));
    assert_eq!(lgisim(&["bounds", "-n", "25"]).status.code(), Some(2));
}

#[test]
fn pipeline_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lgisim(&[
        "pipeline", "--theta", "15", "--gamma", "12", "--post", "minus", "--noise", "0", "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("k33 -0.3660254038"));
    assert!(text.lines().any(|l| l == "LGI_VIOLATED k33"));
    assert!(dir.path().join("pipeline_records.csv").exists());

    let o = lgisim(&[
        "pipeline", "--theta", "45", "--post", "plus", "--noise", "0", "--out", out,
    ]);
    let text = stdout(&o);
    assert!(!text.contains("LGI_VIOLATED"), "{text}");
    for line in [
        "k31 2.0000000000",
        "k32 2.0000000000",
        "k33 0.0000000000",
        "k34 0.0000000000",
    ] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn pipeline_from_bench_file() {
    let dir = tempfile::tempdir().unwrap();
    let bench = data("bench_theta15_gamma12.txt");
    let o = lgisim(&[
        "pipeline",
        "--bench",
        &bench,
        "--noise",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "LGI_VIOLATED k33"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = data("bad_element.txt");
    let o = lgisim(&["pipeline", "--bench", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(
        stderr(&o).contains("line 3: unknown element"),
        "{}",
        stderr(&o)
    );

    assert_eq!(lgisim(&["sweep-theta", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        lgisim(&["sweep-theta", "--step", "-1", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lgisim(&["sweep-theta", "--gamma", "0", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lgisim(&["sweep-gamma", "--post", "sideways"]).status.code(),
        Some(2)
    );
    assert_eq!(lgisim(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_env_var_is_overridden_by_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, sub: &str| {
        let out = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_lgisim"));
        cmd.args([
            "sweep-gamma",
            "--gamma-list",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]);
        cmd.env_remove("LGI_BENCH_SEED");
        if let Some(s) = env {
            cmd.env("LGI_BENCH_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read_to_string(out.join("gamma_sweep.csv")).unwrap()
    };
    let env9 = run(Some("9"), None, "a");
    let flag9 = run(None, Some("9"), "b");
    let both = run(Some("1"), Some("9"), "c");
    let default = run(None, None, "d");
    assert_eq!(env9, flag9);
    assert_eq!(both, flag9);
    assert_ne!(default, flag9);
}

#[test]
fn json_output_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgisim(&[
        "sweep-theta",
        "--step",
        "30",
        "--format",
        "both",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("theta_sweep.json")).unwrap())
            .unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.as_object().unwrap().values().all(|v| !v.is_object())));
    assert_eq!(json["manifest"]["command"], "sweep-theta");
    // θ = 45° has no weak value on the −m₃ port
    assert!(rows
        .iter()
        .all(|r| r["theta_deg"] != 45.0 || r["re_w_minus"].is_null()));
}

#[test]
fn rerun_from_manifest_reproduces_outputs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = lgisim(&[
        "sweep-theta",
        "--step",
        "10",
        "--seed",
        "42",
        "--out",
        first.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let manifest_path = first.path().join("theta_sweep.manifest.json");
    let manifest: RunManifest = read_manifest(&manifest_path).unwrap();
    assert_eq!(manifest.command, "sweep-theta");
    assert_eq!(manifest.seed, 42);
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));

    let o = lgisim(&[
        "rerun",
        manifest_path.to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.path().join("theta_sweep.csv")).unwrap(),
        fs::read(second.path().join("theta_sweep.csv")).unwrap()
    );
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = lgisim(&[
            "pipeline",
            "--seed",
            "3",
            "--format",
            "both",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    // the JSON copy embeds its own output path, so compare the CSV bytes
    let f = "pipeline_records.csv";
    assert_eq!(
        fs::read(a.path().join(f)).unwrap(),
        fs::read(b.path().join(f)).unwrap()
    );
}
