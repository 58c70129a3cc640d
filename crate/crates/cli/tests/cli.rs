use std::path::PathBuf;
use std::process::{Command, Output};

use twingraph::gfield;
use twingraph::grid::{GridDomain, ScalarField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twingraph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twingraph-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn catalog_sample_writes_gfield() {
    let dir = scratch_dir("sample");
    let path = dir.join("cat.gf");
    let out = run(&[
        "catalog",
        "sample",
        "--name",
        "catenoid",
        "--param",
        "rho=1",
        "--domain",
        "1.5,\u{2212}0.75,3,0.75",
        "--grid",
        "129,65",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fields = gfield::read_file(&path).unwrap();
    assert_eq!(fields.len(), 1);
    assert_eq!((fields[0].domain().nx, fields[0].domain().ny), (129, 65));
}

#[test]
fn catalog_list_names_every_entry() {
    let out = run(&["catalog", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["plane", "catenoid", "helicoid", "scherk", "holomorphic"] {
        assert!(names.contains(&n));
    }
}

#[test]
fn verify_all_scherk_passes_with_stable_schema() {
    let out = run(&["verify-all", "--name", "scherk", "--param", "rho=1", "--grid", "129,129"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["checks", "grid", "pass", "surface"]);
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        let mut k: Vec<&String> = c.as_object().unwrap().keys().collect();
        k.sort();
        assert_eq!(k, ["name", "pass", "tol", "value"]);
        assert_eq!(c["pass"], true);
    }
}

#[test]
fn twin_forward_on_cubic_is_not_closed() {
    let dir = scratch_dir("cubic");
    let path = dir.join("nonminimal.gf");
    let d = GridDomain::from_bounds(0.0, 0.0, 1.0, 1.0, 33, 33).unwrap();
    gfield::write_file(&path, &[ScalarField::from_fn(d, |x, _| x * x * x)]).unwrap();
    let out = run(&["twin", "forward", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("NOT_CLOSED"));
}

#[test]
fn validation_errors_exit_one() {
    assert_eq!(run(&["verify-all", "--name", "torus"]).status.code(), Some(1));
    assert_eq!(run(&["catalog", "sample", "--name", "scherk", "--grid", "3", "--out", "x.gf"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    let out = run(&["catalog", "sample", "--name", "catenoid", "--domain", "0,0,1,1", "--out", "x.gf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("DOMAIN_NOT_ADMISSIBLE"));
}

#[test]
fn failing_check_exits_three() {
    // At three nodes per side every finite difference is one-sided and the
    // lift residuals are far from their tolerances.
    let out = run(&["verify-all", "--name", "scherk", "--grid", "5,5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["pass"], false);
}

#[test]
fn solve_round_trip_through_files() {
    let dir = scratch_dir("solve");
    let (bnd, sol) = (dir.join("b.gf"), dir.join("s.gf"));
    let d = GridDomain::from_bounds(0.0, 0.0, 1.0, 1.0, 17, 17).unwrap();
    gfield::write_file(&bnd, &[ScalarField::from_fn(d, |x, y| 0.5 * x - y)]).unwrap();
    let out =
        run(&["--threads", "2", "solve", "minimal", "--in", bnd.to_str().unwrap(), "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["iterations"].as_u64().unwrap() <= 2);
    let f = gfield::read_file(&sol).unwrap();
    assert!(f[0].max_abs_diff(&ScalarField::from_fn(d, |x, y| 0.5 * x - y)) < 1e-9);
}

#[test]
fn spacelike_failure_exits_two() {
    let dir = scratch_dir("steep");
    let bnd = dir.join("b.gf");
    let d = GridDomain::from_bounds(0.0, 0.0, 1.0, 1.0, 9, 9).unwrap();
    gfield::write_file(&bnd, &[ScalarField::from_fn(d, |x, y| 2f64.sqrt() * (x + y))]).unwrap();
    let out = run(&["solve", "maximal", "--in", bnd.to_str().unwrap(), "--out", dir.join("s.gf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("SPACELIKE_UNREACHABLE"));
}

#[test]
fn twin_then_weierstrass_on_catenoid() {
    let dir = scratch_dir("twin");
    let (f, g) = (dir.join("f.gf"), dir.join("g.gf"));
    let common = ["--name", "catenoid", "--grid", "65,33"];
    let out = run(&[&["catalog", "sample"][..], &common, &["--out", f.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[&["twin", "forward"][..], &common, &["--out", g.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["twin", "verify", "--f", f.to_str().unwrap(), "--g", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["diagnostics"]["c3_residual"].as_f64().unwrap() < 5e-3);
    let out = run(&[&["chart", "weierstrass"][..], &common].concat());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["max_residual"].as_f64().unwrap() < 0.02);
}

#[test]
fn gauss_pipeline_on_jorgens_quadratic() {
    let dir = scratch_dir("gauss");
    let (fp, gp) = (dir.join("F.gf"), dir.join("g.gf"));
    let d = GridDomain::from_bounds(-1.0, -1.0, 1.0, 1.0, 17, 17).unwrap();
    gfield::write_file(&fp, &[ScalarField::from_fn(d, |x, y| (x * x + y * y) / 2.0)]).unwrap();
    let out = run(&["gauss", "jorgens", "--in", fp.to_str().unwrap(), "--out", gp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["planarity_score"].as_f64().unwrap() <= 1e-12);
    let out = run(&["gauss", "fit", "--in", gp.to_str().unwrap(), "--i", "2", "--j", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["gauss", "quadric", "--in", gp.to_str().unwrap()]);
    assert!(stdout_json(&out)["quadric_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn sl_rotate_residual_and_detect_angle() {
    let dir = scratch_dir("sl");
    let (fp, hp) = (dir.join("F.gf"), dir.join("h.gf"));
    let d = GridDomain::from_bounds(-1.0, -1.0, 1.0, 1.0, 17, 17).unwrap();
    gfield::write_file(&fp, &[ScalarField::from_fn(d, |x, y| x * x + 0.25 * y * y)]).unwrap();
    let out = run(&[
        "sl",
        "rotate",
        "--in",
        fp.to_str().unwrap(),
        "--theta",
        "-0.4",
        "--epsilon",
        "1",
        "--out",
        hp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["sl", "residual", "--in", fp.to_str().unwrap(), "--theta", "0.3"]);
    assert_eq!(out.status.code(), Some(0));

    // (x^2 + y^2/2)/2 solves the special Lagrangian equation with tan(theta) = -3.
    let sp = dir.join("s.gf");
    gfield::write_file(&sp, &[ScalarField::from_fn(d, |x, y| (x * x + 0.5 * y * y) / 2.0)]).unwrap();
    let out = run(&["sl", "detect-angle", "--in", sp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let theta = stdout_json(&out)["theta"].as_f64().unwrap();
    assert!((theta - (-3f64).atan()).abs() < 1e-9, "{theta}");
}
