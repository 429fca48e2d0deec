use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ribbonlab")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn repo_config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

const NARROW: &str = r#"
[geometry]
preset = "fig1a"

[sweep]
regime = "narrow"
w = [0.1, 0.08, 0.06, 0.04]
evaluator = "reduced"

[solver]
grid = [17, 7]

[solver.minimize]
max_iters = 200
"#;

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn deficits_of_geometry_d() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", &std::fs::read_to_string(repo_config("fig1d_psi.toml")).unwrap());
    let out = stdout(&["deficits", cfg.to_str().unwrap(), "--samples", "3"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x1,gauss,codazzi_1,codazzi_2");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(&v[1..], &[0.0, 1.0, 0.0]);
    }
}

#[test]
fn limit_energies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", NARROW);
    let c = cfg.to_str().unwrap();
    assert!((value(&stdout(&["limit-energy", c, "--functional", "e0g"]), "e0g") - 1.0 / 360.0).abs() < 1e-12);
    assert!((value(&stdout(&["limit-energy", c, "--functional", "J", "--m", "0,0,0"]), "J") - 1.0 / 3.0).abs() < 1e-10);
    let minj = stdout(&["limit-energy", c, "--functional", "minJ"]);
    assert!(value(&minj, "minJ") > 0.0);
    let rows: Vec<&str> = minj.lines().skip_while(|l| !l.starts_with("x1,")).collect();
    assert_eq!(rows[0], "x1,m11,m12,m22,f_min");
    assert!(rows.len() > 2 && rows[1].split(',').count() == 5);
    assert!(!run(&["limit-energy", c, "--functional", "e0c"]).status.success());
    let e = repo_config("fig1e_plate.toml");
    let out = stdout(&["limit-energy", &e, "--functional", "I"]);
    assert!(value(&out, "minI") > 0.0);
    let plate = stdout(&["limit-energy", &e, "--functional", "plate"]);
    assert_eq!(plate.lines().next(), Some("w,plate"));
}

#[test]
fn construct_writes_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", NARROW);
    for object in ["phi", "psi"] {
        let obj = dir.path().join(format!("{object}.obj"));
        stdout(&["construct", cfg.to_str().unwrap(), "--object", object, "--obj-out", obj.to_str().unwrap()]);
        let text = std::fs::read_to_string(&obj).unwrap();
        assert!(text.lines().any(|l| l.starts_with("v ")) && text.lines().any(|l| l.starts_with("f ")));
    }
    let e = repo_config("fig1e_plate.toml");
    let obj = dir.path().join("ruled.obj");
    let mid = dir.path().join("mid.csv");
    let out = stdout(&[
        "construct",
        &e,
        "--object",
        "ruled",
        "--obj-out",
        obj.to_str().unwrap(),
        "--midline-out",
        mid.to_str().unwrap(),
    ]);
    assert!(value(&out, "isometry_residual") < 1e-8);
    let rows = std::fs::read_to_string(&mid).unwrap();
    assert_eq!(rows.lines().next(), Some("x1,ii11,ii12,ii22"));
    let d = repo_config("fig1d_ansatz.toml");
    let obj = dir.path().join("ansatz.obj");
    stdout(&["construct", &d, "--object", "ansatz-d", "--obj-out", obj.to_str().unwrap(), "--w", "0.01"]);
    assert!(obj.exists());
}

#[test]
fn minimize_reports_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", NARROW);
    let obj = dir.path().join("min.obj");
    let out = stdout(&["minimize", cfg.to_str().unwrap(), "--w", "0.06", "--obj-out", obj.to_str().unwrap()]);
    assert!(value(&out, "energy") > 0.0 && value(&out, "iterations") > 0.0);
    assert!(out.contains("converged = "));
    assert!(obj.exists());
}

#[test]
fn sweep_resume_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", NARROW);
    let out_dir = dir.path().join("out");
    let first = stdout(&["sweep", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(first.contains("reused = 0"));
    let csv = out_dir.join("records.csv");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 5);
    let second = stdout(&["sweep", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(second.contains("reused = 4"));
    let fit = stdout(&["fit", csv.to_str().unwrap(), "--predictor", "w"]);
    assert!(value(&fit, "slope").is_finite() && value(&fit, "points") == 4.0);
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &NARROW.replace("[0.1, 0.08, 0.06, 0.04]", "[0.04, 0.1]"));
    let out = run(&["sweep", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("decreasing"));
    assert!(!run(&["fit", dir.path().join("none.csv").to_str().unwrap()]).status.success());
    assert!(!run(&["deficits", dir.path().join("none.toml").to_str().unwrap()]).status.success());
}
