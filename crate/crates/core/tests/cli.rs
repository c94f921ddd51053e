//! End-to-end runs of the `qhstop` binary on the shipped configs.

use qh_stopping::cli::output::{emit_plot_data, BarSeries, PlotKind, PlotSource};
use qh_stopping::estimation::{self, presets, CurvePoint};
use qh_stopping::hazard;
use qh_stopping::identification::{self, Grid, RichData};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn qhstop(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhstop"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn ok(config_name: &str, extra: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = qhstop(&config(config_name), dir.path(), extra);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    dir
}

/// Rows of a CSV output keyed by column name; `#` header lines skipped.
fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().unwrap().clone();
    r.records().map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

fn float(row: &BTreeMap<String, String>, key: &str) -> f64 {
    let s = &row[key];
    match s.as_str() {
        "-inf" => f64::NEG_INFINITY,
        "inf" => f64::INFINITY,
        _ => s.parse().unwrap(),
    }
}

fn error_of(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or("");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not JSON: {stderr}"))
}

fn temp_config(body: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, body).unwrap();
    (dir, path)
}

#[test]
fn solve_writes_the_uniform_profile() {
    let dir = ok("solve_uniform.json", &["--quiet"]);
    let text = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    for tag in ["# tool: qhstop", "# config_sha256: ", "# seed: 0", "# tolerances:"] {
        assert!(text.contains(tag), "missing {tag}");
    }
    let rows = read_csv(&dir.path().join("profile.csv"));
    assert_eq!(rows[0].keys().cloned().collect::<Vec<_>>(), ["c_t", "p_t", "q_t", "t", "v_t"]);
    let p: Vec<f64> = rows.iter().map(|r| float(r, "p_t")).collect();
    let expect = [0.25827, 0.304687, 0.375, 0.5, 1.0];
    assert!(p.iter().zip(expect).all(|(a, b)| (a - b).abs() <= 5e-6), "{p:?}");
    assert_eq!(float(&rows[4], "v_t"), f64::NEG_INFINITY);
    let sim = read_csv(&dir.path().join("simulation.csv"));
    assert_eq!(sim.len(), 5);
    let bars = read_csv(&dir.path().join("plot_bars.csv"));
    assert_eq!(bars.len(), 5);
}

#[test]
fn welfare_examples() {
    let dir = ok("welfare_tax.json", &["--quiet"]);
    let rows = read_csv(&dir.path().join("welfare.csv"));
    assert_eq!(float(&rows[0], "w"), 347.0 / 256.0);
    assert_eq!(float(&rows[0], "v"), 83.0 / 512.0);
    let dir = ok("welfare_deadline.json", &["--quiet"]);
    let summary = read_csv(&dir.path().join("welfare_summary.csv"));
    let value = summary.iter().find(|r| r["quantity"] == "self1_value_beta").unwrap();
    assert_eq!(float(value, "value"), -0.75);
}

#[test]
fn rationalize_configs_run() {
    for name in ["rationalize_sophisticated.json", "rationalize_naive.json", "rationalize_moments.json"] {
        let dir = ok(name, &["--quiet"]);
        let law = read_csv(&dir.path().join("law.csv"));
        let total: f64 = law.iter().map(|r| float(r, "weight")).sum();
        assert!((total - 1.0).abs() < 1e-12, "{name}: weights sum to {total}");
        assert!(dir.path().join("profile.csv").exists());
    }
}

#[test]
fn identify_recovers_the_beta_interval() {
    let dir = ok("identify_t5.json", &["--quiet"]);
    let rows = read_csv(&dir.path().join("region.csv"));
    let betas: Vec<f64> =
        rows.iter().filter(|r| float(r, "delta") == 1.0 && r["consistent"] == "1").map(|r| float(r, "beta")).collect();
    let (lo, hi) = (betas.iter().cloned().fold(f64::INFINITY, f64::min), betas.iter().cloned().fold(0.0, f64::max));
    assert!((lo - 0.82).abs() <= 0.01 && (hi - 1.28).abs() <= 0.01, "[{lo}, {hi}]");
    assert!(dir.path().join("witness.csv").exists());
    assert_eq!(read_csv(&dir.path().join("plot_region.csv")).len(), rows.len());
}

#[test]
fn estimate_reproduces_the_table() {
    let dir = ok("estimate_table.json", &["--quiet"]);
    let rows = read_csv(&dir.path().join("estimates.csv"));
    assert_eq!(rows.len(), 12);
    let distance: Vec<f64> =
        rows.iter().filter(|r| r["criterion"] == "squared_distance").map(|r| float(r, "beta_hat")).collect();
    let published = [0.819, 0.817, 0.57, 0.561, 0.7605, 0.7565];
    for (i, (a, b)) in distance.iter().zip(published).enumerate() {
        let tol = if i == 2 || i == 3 { 0.02 } else { 0.0015 };
        assert!((a - b).abs() <= tol, "row {i}: {a} vs {b}");
    }
    assert!(!read_csv(&dir.path().join("plot_curve.csv")).is_empty());
}

#[test]
fn aggregate_reports_the_mixture() {
    let dir = ok("aggregate_two_types.json", &["--quiet"]);
    let rows = read_csv(&dir.path().join("aggregate.csv"));
    let p: Vec<f64> = rows.iter().filter(|r| r["t"] != "never").map(|r| float(r, "p")).collect();
    assert_eq!(p, vec![0.3, 0.0, 1.0]);
    assert_eq!(rows.last().unwrap()["t"], "never");
}

#[test]
fn reruns_are_byte_identical() {
    let a = ok("solve_uniform.json", &["--quiet", "--seed", "11"]);
    let b = ok("solve_uniform.json", &["--quiet", "--seed", "11"]);
    for name in ["profile.csv", "simulation.csv", "plot_bars.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let c = ok("solve_uniform.json", &["--quiet", "--seed", "12"]);
    assert_ne!(std::fs::read(a.path().join("simulation.csv")).unwrap(), std::fs::read(c.path().join("simulation.csv")).unwrap());
}

#[test]
fn json_format() {
    let dir = ok("welfare_tax.json", &["--quiet", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("welfare.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["tool"], "qhstop");
    assert!(v["result"].is_object());
    assert!(!dir.path().join("welfare.csv").exists());
}

#[test]
fn validation_errors_exit_2() {
    let (_d, path) = temp_config(r#"{"command": "aggregate", "types": [], "colour": "red"}"#);
    let out = qhstop(&path, &std::env::temp_dir(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_of(&out);
    assert_eq!(e["error"]["kind"], "validation");
    assert_eq!(e["error"]["code"], 2);

    let (_d, path) = temp_config(r#"{"command": "rationalize", "p": [0.5, 0.2], "prefs": {"beta": 1, "beta_hat": 1, "delta": 1}, "terminal_value": -1}"#);
    assert_eq!(qhstop(&path, &std::env::temp_dir(), &[]).status.code(), Some(2));

    let out = qhstop(&config("welfare_tax.json"), &std::env::temp_dir(), &["--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["kind"], "validation");
}

#[test]
fn non_convergence_exits_3() {
    let (_d, path) = temp_config(
        r#"{"command": "rationalize", "p": [0.1, 0.2, 0.35, 0.6],
            "prefs": {"beta": 0.6, "beta_hat": 1, "delta": 0.95},
            "terminal_value": -2, "method": "naive", "max_iter": 1}"#,
    );
    let out = tempfile::tempdir().unwrap();
    let run = qhstop(&path, out.path(), &[]);
    assert_eq!(run.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(error_of(&run)["error"]["kind"], "numerical");
}

#[test]
fn missing_config_exits_4() {
    let out = qhstop(Path::new("/nonexistent/run.json"), &std::env::temp_dir(), &[]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["error"]["kind"], "io");
}

#[test]
fn bars_align_the_parking_pair() {
    use presets::{parking_agents, PenaltyReading, SpreadReading};
    let (red, blue) = parking_agents(SpreadReading::Variance, PenaltyReading::Raw).unwrap();
    let series: Vec<BarSeries> = [("red", &red), ("blue", &blue)]
        .into_iter()
        .map(|(label, a)| {
            let h = estimation::completion_histogram(&a.problem, &a.prefs).unwrap();
            BarSeries { label: label.into(), q: h.q, p: h.p }
        })
        .collect();
    let t = emit_plot_data(PlotSource::Bars(&series), PlotKind::Bars).unwrap();
    assert_eq!(t.rows.len(), 20);
    let (r, b) = t.rows.split_at(10);
    let mut gap: f64 = 0.0;
    for (x, y) in r.iter().zip(b) {
        assert_eq!(x[1], y[1]);
        gap = gap.max((x[2].parse::<f64>().unwrap() - y[2].parse::<f64>().unwrap()).abs());
    }
    // completion masses agree to within one percentage point
    assert!(gap < 0.01, "{gap}");
    assert_eq!(hazard::unconditional(&series[0].p).0, series[0].q);
}

#[test]
fn region_and_curve_shapes() {
    let data = RichData::new(vec![0.5, 0.25, 0.0], vec![0.25, 0.375, 0.5]).unwrap();
    let set = identification::identified_set(&data, &Grid::point(1.0), &Grid::point(1.0)).unwrap();
    assert_eq!(emit_plot_data(PlotSource::Region(&set), PlotKind::Region).unwrap().rows.len(), 1);
    let curve = vec![("m".to_string(), vec![CurvePoint { beta: 0.4, value: 2.0 }, CurvePoint { beta: 0.5, value: 1.0 }])];
    let t = emit_plot_data(PlotSource::Curve(&curve), PlotKind::Curve).unwrap();
    assert_eq!(t.rows.iter().map(|r| r[1].as_str()).collect::<Vec<_>>(), ["0.4", "0.5"]);
    assert!(emit_plot_data(PlotSource::Curve(&curve), PlotKind::Region).is_err());
}
