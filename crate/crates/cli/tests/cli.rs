use std::f64::consts::{E, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const REFERENCE: &str = "m1 = 16.0\nm2 = 1.0\nl1 = 2.718281828459045\nl2 = 3.141592653589793\n";

fn twoedge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoedge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{REFERENCE}{body}")).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn dirichlet_spectrum_is_union_of_edge_lattices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"dirichlet\"\nkappa_max = 20.0\n");
    let out = dir.path().join("out");
    let res = twoedge(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let kappas = csv_column(&fs::read_to_string(out.join("roots.csv")).unwrap(), 0);
    let (w1, w2) = (4.0 * E, PI);
    let mut expect: Vec<f64> = (1..)
        .map(|n| n as f64 * PI / w1)
        .take_while(|&k| k <= 20.0)
        .chain((1..).map(|n| n as f64 * PI / w2).take_while(|&k| k <= 20.0))
        .collect();
    expect.sort_by(f64::total_cmp);
    assert_eq!(kappas.len(), expect.len());
    for (a, b) in kappas.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    }
}

#[test]
fn verify_reports_all_suites_passing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "verify_roots = 100\n");
    let out = dir.path().join("v");
    let res = twoedge(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["all_passed"], true);
    let suites = report["suites"].as_array().unwrap();
    for preset in ["dirichlet", "neumann", "segment", "ring", "pendant", "rose"] {
        assert!(suites.iter().any(|s| s["boundary_condition"] == preset && s["suite"] == "catalog_roots"));
    }
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"rose\"\nroots = 400\n");
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let res = twoedge(&["leaning", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(res.status.success());
        runs.push((
            fs::read(out.join("leaning.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn json_format_writes_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"segment\"\nroots = 50\n");
    let out = dir.path().join("j");
    let res = twoedge(&["torus", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "json"]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("points.json")).unwrap()).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["phi1", "phi2"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 50);
}

#[test]
fn invalid_config_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "m1 = 1.0\nl1 = 1.0\nl2 = 1.0\n").unwrap();
    let out = dir.path().join("none");
    let res = twoedge(&["spectrum", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("m2"));
    assert!(!out.exists());
}

#[test]
fn non_segment_semiclassical_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"ring\"\n");
    let out = dir.path().join("s");
    let res = twoedge(&["semiclassical", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}
