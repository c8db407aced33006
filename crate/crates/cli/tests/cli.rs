use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fastslow"));
    c.env_remove("FASTSLOW_OUTPUT_DIR");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Parses `compare.csv` into (integrator, columns).
fn compare_rows(dir: &Path) -> Vec<(String, Vec<String>)> {
    fs::read_to_string(dir.join("compare.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<String> = l.split(',').map(str::to_string).collect();
            (cols[0].clone(), cols)
        })
        .collect()
}

#[test]
fn run_preset_writes_outputs_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("y19");
    let o = run(&["run", "--preset", "triangle_y19", "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["trajectory.csv", "report.txt", "summary.json", "plotdata/nodes.csv", "plotdata/weight.csv", "plotdata/phase.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn euler_failure_at_y20_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["run", "--preset", "triangle_y20", "--integrator", "euler"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let report = fs::read_to_string(tmp.path().join("output/triangle_y20/report.txt")).unwrap();
    assert!(report.contains("not ok 3 - reaches_clustering"), "{report}");
    let o = run(&["run", "--preset", "triangle_y20", "--integrator", "canard"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_config_exits_two_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "version = 1\n[scenario]\npreset = \"triangle_y19\"\n[output]\ndir = \"out\"\nemit = [\"nothing\"]\n").unwrap();
    let o = run(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:6:"), "{err}");
    assert!(!tmp.path().join("out").exists());
    assert!(!tmp.path().join("output").exists());
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("ring7.toml");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("r{k}"));
        let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(0));
        csvs.push((fs::read(dir.join("trajectory.csv")).unwrap(), fs::read(dir.join("report.txt")).unwrap()));
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn environment_overrides_config_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from_env");
    let o = bin()
        .args(["analyze", configs().join("triangle_y19.toml").to_str().unwrap()])
        .env("FASTSLOW_OUTPUT_DIR", &target)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("analysis.txt").is_file());
    assert!(!tmp.path().join("output").exists());
}

#[test]
fn compare_reproduces_the_numerical_issue() {
    let tmp = tempfile::tempdir().unwrap();
    let d20 = tmp.path().join("c20");
    let o = run(&["compare", "--preset", "triangle_y20", "--out", d20.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(d20.join("compare.txt").is_file());
    let rows = compare_rows(&d20);
    let final_gap = |name: &str| -> f64 { rows.iter().find(|r| r.0 == name).unwrap().1[5].parse().unwrap() };
    assert!(final_gap("euler") < 1e-6);
    assert!(final_gap("canard") > 0.1);
    let switch: f64 = rows.iter().find(|r| r.0 == "canard").unwrap().1[2].parse().unwrap();
    assert!(switch > 0.0 && switch.is_finite());

    let d19 = tmp.path().join("c19");
    run(&["compare", "--preset", "triangle_y19", "--out", d19.to_str().unwrap()], tmp.path());
    let gaps: Vec<f64> = compare_rows(&d19).iter().map(|r| r.1[5].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    let spread = gaps.iter().cloned().fold(f64::MIN, f64::max) - gaps.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-2);
}

#[test]
fn compare_skips_canard_off_symmetric_triangles() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--preset", "ring(7)"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("canard-aware integration skipped"));
    assert_eq!(compare_rows(&tmp.path().join("output/ring_7")).len(), 2);
}

#[test]
fn analyze_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["analyze", configs().join("equal_gains.toml").to_str().unwrap(), "--out", "eq"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("clustering manifold absent (nu = 0)"));

    let o = run(&["analyze", "--preset", "triangle_y19", "--out", "sym"], tmp.path());
    assert!(stdout(&o).contains("nu = alpha1 - alpha2 = 1"));

    run(&["analyze", "--preset", "triangle_nonsym(2,1)", "--out", "ns"], tmp.path());
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("ns/analysis.json")).unwrap()).unwrap();
    assert!((a["critical_weight"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(a["spectrum_at_critical"]["kernel_dim"], 2);
}

#[test]
fn maps_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let json = |args: &[&str]| -> (Option<i32>, serde_json::Value) {
        let mut full = vec!["maps"];
        full.extend_from_slice(args);
        full.push("--json");
        let o = run(&full, tmp.path());
        let v = serde_json::from_slice(&o.stdout).unwrap_or(serde_json::Value::Null);
        (o.status.code(), v)
    };
    let (code, v) = json(&["pi2", "--a", "0.5", "--delta", "1", "--nu", "1"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["result"], "crossed");
    assert!(v["residual"].as_f64().unwrap() < 1e-6);

    let (code, v) = json(&["pi2", "--a", "0", "--delta", "1", "--nu", "1"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["exit"]["a"], 0.0);

    let (code, v) = json(&["gamma2", "--a", "-1", "--delta", "2", "--nu", "1"]);
    assert_eq!(code, Some(0));
    assert!(v["residual"].as_f64().unwrap() < 1e-9);

    let (code, _) = json(&["gamma2", "--a", "1", "--delta", "2", "--nu", "1"]);
    assert_eq!(code, Some(1));

    let (code, v) = json(&["charts", "--chart", "k2", "--a", "0.3", "--coord", "-0.7", "--r", "0.2"]);
    assert_eq!(code, Some(0));
    assert!(v["round_trip_error"].as_f64().unwrap() < 1e-12);

    let (code, v) = json(&["pi1", "--a", "0.2", "--eps1", "0.1", "--mu1", "0.5", "--nu", "1"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["result"], "crossed");
}

#[test]
fn every_checked_in_config_parses() {
    let tmp = tempfile::tempdir().unwrap();
    let mut n = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = run(&["analyze", path.to_str().unwrap(), "--out", "a"], tmp.path());
            assert_eq!(o.status.code(), Some(0), "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["run", "--preset", "nope"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["run", "--preset", "ring(2)"], tmp.path()).status.code(), Some(2));
}
