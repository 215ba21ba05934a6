use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn foliata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliata")).args(args).output().expect("spawn foliata")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_inside_the_moduli_space() {
    let out = foliata(&["classify", "--c0", "-1", "--c", "-1", "--d", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["label"], "RiemannFamilyH2");
    assert_eq!(v["config"]["subcommand"], "classify");
    assert!(v["version"].is_string());
    assert!(v["certificate"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn classify_outside_the_moduli_space() {
    let out = foliata(&["classify", "--c0", "1", "--c", "0.5", "--d", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["label"], "OutsideModuli");
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(foliata(&["classify", "--bogus"]).status.code(), Some(2));
    assert_eq!(foliata(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(foliata(&["verify", "--shiffman"]).status.code(), Some(2));
    assert_eq!(foliata(&["--help"]).status.code(), Some(0));
}

#[test]
fn field_outside_the_moduli_space_is_a_domain_error() {
    let out = foliata(&["field", "--c0", "1", "--c", "0.5", "--d", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn scan_emits_one_row_per_cell() {
    let out = foliata(&["scan", "--c0", "-1", "--rect", "-2", "2", "-2", "2", "--nx", "5", "--ny", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c,d,label");
    assert_eq!(lines.len(), 1 + 20);
    // Row-major: c varies fastest.
    let c = |l: &str| l.split(',').next().unwrap().parse::<f64>().unwrap();
    assert!(c(lines[1]) < c(lines[2]));
    assert_eq!(lines[1].split(',').nth(1), lines[5].split(',').nth(1));
}

#[test]
fn profile_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let args = ["profile", "--c0", "1", "--c", "-1", "--d", "0", "--range", "0", "6", "--step", "0.01", "--out", path(&csv)];
    assert_eq!(foliata(&args).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "f", "f_x"]);
    assert_eq!(rdr.records().count(), 601);
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "f");
    assert!(side["first_integral_drift"].as_f64().unwrap() < 1e-8);
    // f^2 = 1 - x'^2 oscillation: 2 pi / AGM(1, sqrt 2).
    let period = side["period"].as_f64().unwrap();
    assert!((period - 5.244115108584).abs() < 1e-9);
}

#[test]
fn identical_arguments_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = ["field", "--c0", "1", "--c", "-1", "--d", "-1", "--nx", "21", "--ny", "21", "--out", path(&out)];
        assert_eq!(foliata(&args).status.code(), Some(0));
        std::fs::read(&out).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    // The output path is part of the echoed config; compare everything else.
    let strip = |v: Vec<u8>| {
        let mut v: Value = serde_json::from_slice(&v).unwrap();
        v["config"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(a), strip(b));

    let mesh = |_: u8| foliata(&["mesh", "--c0", "1", "--c", "-1", "--d", "-1", "--nx", "21", "--ny", "21"]).stdout;
    assert_eq!(mesh(0), mesh(1));
}

#[test]
fn field_file_round_trips_through_verify_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("w.json");
    let args = ["field", "--c0", "-1", "--c", "-1", "--d", "-1", "--domain", "0", "0.5", "0", "0.5", "--nx", "41", "--ny", "41"];
    let mut args: Vec<&str> = args.to_vec();
    args.extend(["--out", path(&field)]);
    assert_eq!(foliata(&args).status.code(), Some(0));

    let out = foliata(&["verify", "--field", path(&field), "--shiffman", "--immersion"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["grid"]["nx"], 41);
    assert_eq!(v["singular_count"], 0);
    assert!(v["sinh_gordon"]["linf"].as_f64().unwrap() < 5e-2);
    assert!(v["shiffman"]["max_u"].as_f64().unwrap() < 5e-2);
    assert!(v["immersion"]["compat_linf"].as_f64().unwrap() < 1e-8);
    assert!(v["immersion"]["isometry_linf"].as_f64().unwrap() < 1e-2);

    // Rebuilding from parameters gives the same diagnostics as the file, up
    // to sinh(omega) being recomputed from the stored omega.
    let direct = foliata(&[
        "verify", "--c0", "-1", "--c", "-1", "--d", "-1", "--domain", "0", "0.5", "0", "0.5", "--nx", "41", "--ny", "41",
        "--shiffman",
    ]);
    let (a, b) = (&json(&direct)["sinh_gordon"], &v["sinh_gordon"]);
    assert_eq!(a["count"], b["count"]);
    for key in ["linf", "l2"] {
        let (a, b) = (a[key].as_f64().unwrap(), b[key].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-10 * b, "{key}: {a} vs {b}");
    }

    let obj = dir.path().join("m.obj");
    let out = foliata(&["mesh", "--field", path(&field), "--out", path(&obj)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    let verts: Vec<Vec<f64>> = text
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(verts.len(), 41 * 41);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 40 * 40);
    // Hyperboloid model: -p0^2 + p1^2 + p2^2 = -1.
    for p in &verts {
        assert!((-p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + 1.0).abs() < 1e-9);
    }
}

#[test]
fn weierstrass_mesh_needs_a_flat_base() {
    let base = ["mesh", "--c", "-0.25", "--d", "-0.25", "--domain", "0.5", "3", "0.5", "3", "--nx", "31", "--ny", "31"];
    let run = |c0: &str, method: &str| {
        let mut args = base.to_vec();
        args.extend(["--c0", c0, "--method", method]);
        foliata(&args).status.code()
    };
    assert_eq!(run("0", "weierstrass"), Some(0));
    assert_eq!(run("-1", "weierstrass"), Some(1));
}

#[test]
fn holonomy_of_the_onduloid_is_elliptic() {
    let out = foliata(&[
        "holonomy", "--c0", "1", "--c", "0", "--d", "-0.25", "--trivial-f", "--domain", "0", "2", "-1", "1", "--nx", "101",
        "--ny", "101", "--period", "1.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["type"], "Elliptic");
    assert_eq!(v["closed"], false);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
}
