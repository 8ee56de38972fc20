use std::path::Path;
use std::process::{Command, Output};

fn diraclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diraclab")).args(args).env_remove("DIRACLAB_OUT").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn entries(dir: &Path) -> Vec<String> {
    match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    }
}

#[test]
fn preset_list_names_every_scenario() {
    let o = diraclab(&["preset", "list"]);
    assert!(o.status.success());
    let ids: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(ids.len(), 10);
    assert!(ids.contains(&"fig6-sweep".to_string()));
}

#[test]
fn exported_preset_runs_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&["preset", "export", "fig2-near"]);
    assert!(o.status.success());
    let cfg = dir.path().join("near.cfg");
    std::fs::write(&cfg, stdout(&o)).unwrap();

    let from_file = diraclab(&["classify", "--config", cfg.to_str().unwrap()]);
    let from_preset = diraclab(&["classify", "--preset", "fig2-near"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&from_preset));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let o = diraclab(&["preset", "export", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reports_the_expected_tags() {
    let expected = [
        ("fig1-persistence", "Persistence"),
        ("fig1-extinction", "ExtinctionInterval"),
        ("fig2-far", "Critical"),
        ("fig2-near", "Critical"),
        ("fig4-remark", "Unclassified"),
    ];
    for (id, tag) in expected {
        let o = diraclab(&["classify", "--preset", id]);
        assert!(o.status.success(), "{id}");
        let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(v["tag"], tag, "{id}");
    }
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "[model.1]\nkind = quadratic\nr = 0.25\ng = -1\n\n[ic]\nkind = gaussian\ncenter = 0\nmass = 0.1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = diraclab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.1"));
    assert!(entries(&out).is_empty());
}

#[test]
fn unstable_step_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&[
        "simulate",
        "--preset",
        "fig1-persistence",
        "--set",
        "solver.dt=0.01",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn zero_horizon_writes_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&[
        "simulate",
        "--preset",
        "fig1-persistence",
        "--set",
        "solver.t_end=0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig1-persistence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["t,rho,I,xbar,umax,J", lines[1]]);
    assert!(lines[1].starts_with("0.0,"));
    let rho: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((rho - 0.2).abs() < 4e-4);
}

#[test]
fn snapshots_and_output_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&[
        "simulate",
        "--preset",
        "fig2-near",
        "--set",
        "solver.t_end=0.01",
        "--set",
        "output.name=short",
        "--snapshots",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = std::fs::read_to_string(dir.path().join("short.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 101);
    let snaps = std::fs::read_to_string(dir.path().join("short_snapshots.csv")).unwrap();
    assert_eq!(snaps.lines().next(), Some("t,x,n"));
    // three snapshots (t = 0, 0.005, 0.01) of 6001 nodes
    assert_eq!(snaps.lines().count(), 1 + 3 * 6001);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_diraclab"))
        .args(["simulate", "--preset", "fig1-extinction", "--set", "solver.t_end=0"])
        .env("DIRACLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("fig1-extinction.csv").exists());
}

#[test]
fn hjlimit_writes_series_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&[
        "hjlimit",
        "--preset",
        "fig1-extinction",
        "--set",
        "hj.t_end=1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig1-extinction_hj.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,rho,I,xbar,umax,J,M,phase,source"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",hj")));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig1-extinction_bounds.json")).unwrap())
            .unwrap();
    let lower = report["bounds"]["lower"].as_f64().unwrap();
    let upper = report["bounds"]["upper"].as_f64().unwrap();
    let tbar = report["tbar"].as_f64().unwrap();
    assert!(lower <= tbar && tbar <= upper);
    assert_eq!(report["tbar_within_bounds"], true);
}

#[test]
fn single_value_sweep_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = diraclab(&[
        "sweep",
        "--preset",
        "fig5-fast",
        "--set",
        "grid.n_points=1501",
        "--set",
        "solver.eps=0.004",
        "--set",
        "solver.dt=0.0005",
        "--values",
        "0.2",
        "--jobs",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig5-fast_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "T,mean_rho,min_rho,extinct");
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[0], "0.2");
    let (mean, min): (f64, f64) = (cols[1].parse().unwrap(), cols[2].parse().unwrap());
    assert!(min <= mean && min > 0.0);
    assert_eq!(cols[3], "false");
}

#[test]
fn sweep_needs_a_periodic_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        diraclab(&["sweep", "--preset", "fig1-persistence", "--values", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_override_names_the_field() {
    let o = diraclab(&["classify", "--preset", "fig1-persistence", "--set", "solver.eps=abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver.eps"));
}
