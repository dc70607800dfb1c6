use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pass-robust");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pass_robust(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(
        &path,
        format!("trials = 2\nseed = 5\n[activation]\nmode = \"continuous\"\nsamples = 1000\n{extra}"),
    )
    .unwrap();
    path
}

#[test]
fn run_writes_summary_traces_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = pass_robust(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("axis_value,pass_lossy_wc_ar"));
    assert!(lines[1].ends_with(",3,5"), "{}", lines[1]);

    let traces = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert!(traces.lines().count() > 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["config"]["trials"], 3);
    assert_eq!(manifest["versions"]["pass-robust"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "");
    let read = |name: &str| {
        let out = dir.path().join(name);
        let o = pass_robust(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        (
            fs::read(out.join("summary.csv")).unwrap(),
            fs::read(out.join("traces.csv")).unwrap(),
        )
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = pass_robust(&[
        "sweep",
        config.to_str().unwrap(),
        "--axis",
        "pt_dbm",
        "--values",
        "-10,0,10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("sweep_pt_dbm.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], -10.0);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1]);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["axis"], "pt_dbm");
}

#[test]
fn sweep_uses_table_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "[sweep]\naxis = \"delta_bar\"\nvalues = [0.0, 0.4]\n");
    let out = dir.path().join("out");
    let o = pass_robust(&["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("sweep_delta_bar.csv")).unwrap().lines().count(), 3);
}

#[test]
fn mismatched_axis_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = pass_robust(&[
        "sweep",
        config.to_str().unwrap(),
        "--axis",
        "rho",
        "--values",
        "0.5,0.9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("probabilistic"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "trials = 0\n").unwrap();
    let o = pass_robust(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
}

#[test]
fn validate_prints_machine_readable_report() {
    let o = pass_robust(&["validate", "exclusion"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["suite"], "exclusion");
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["passed"], true);
        assert!(c["measured"].is_number() && c["bound"].is_number());
    }
    assert!(!pass_robust(&["validate", "nonsense"]).status.success());
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let config = pass_robust_core::experiments::ScenarioConfig::from_toml_str(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        config.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
