use std::path::Path;
use std::process::{Command, Output};

use bbpyramid::bases::pyramid_eval_rst;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bbpyramid"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn dim_examples() {
    for (shape, n, want) in [
        ("pyramid", "1", "5"),
        ("pyramid", "3", "30"),
        ("tetrahedron", "2", "10"),
    ] {
        let o = run(&["dim", "--shape", shape, "--order", n]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), want);
    }
}

#[test]
fn unknown_shape_is_usage_error() {
    assert_eq!(
        run(&["dim", "--shape", "hexagon", "--order", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["dim", "--order", "1"]).status.code(), Some(2));
}

#[test]
fn eval_at_apex() {
    let o = run(&["eval", "--shape", "pyramid", "--order", "1", "--point", "0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.contains(&"(0,0,1): 1"));
    for l in lines.iter().filter(|l| !l.starts_with("(0,0,1)")) {
        assert!(l.ends_with(": 0"), "{l}");
    }
}

#[test]
fn eval_matches_library_bitwise() {
    let (n, r, s, t) = (4, 0.21, 0.37, 0.18);
    let o = run(&[
        "eval",
        "--shape",
        "pyramid",
        "--order",
        "4",
        "--point",
        "0.21,0.37,0.18",
    ]);
    let printed: Vec<f64> = stdout(&o)
        .lines()
        .map(|l| l.rsplit_once(": ").unwrap().1.parse().unwrap())
        .collect();
    let lib = pyramid_eval_rst(n, r, s, t).unwrap();
    assert_eq!(printed.len(), lib.len());
    for (a, b) in printed.iter().zip(&lib) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!((printed.iter().sum::<f64>() - 1.0).abs() < 1e-13);
}

#[test]
fn eval_outside_is_domain_error() {
    let o = run(&["eval", "--shape", "pyramid", "--order", "2", "--point", "0.8,0.8,0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("outside"));
    let o = run(&["eval", "--shape", "pyramid", "--order", "2", "--point", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reference_volume_from_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = run(&[
        "assemble",
        "--kind",
        "mass",
        "--shape",
        "pyramid",
        "--order",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let v: f64 = text.trim().parse().unwrap();
    assert!((v - 1.0 / 3.0).abs() <= 2e-16, "{text}");
    // 17 significant digits
    assert_eq!(text.trim().trim_start_matches("0.").len(), 17);
}

#[test]
fn assemble_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let geom = dir.path().join("g.json");
    std::fs::write(
        &geom,
        r#"{"vertices": [[0,0,0],[2,0,0.1],[2.2,1.5,0],[0,1,0],[0.7,0.6,1.4]]}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = run(&[
            "assemble",
            "--kind",
            "weak-z",
            "--order",
            "3",
            "--geometry",
            geom.to_str().unwrap(),
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let doc: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(doc["rows"], 30);
    assert_eq!(doc["kind"], "weak_z");
    assert_eq!(doc["geometry_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_restriction_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let o = run(&[
        "assemble",
        "--kind",
        "stiffness",
        "--order",
        "2",
        "--restrict",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(std::fs::read(&csv).unwrap(), b"");

    let json = dir.path().join("k.json");
    let o = run(&[
        "assemble",
        "--kind",
        "stiffness",
        "--order",
        "2",
        "--restrict",
        "--format",
        "json",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["rows"], 0);
    assert!(doc["warning"].as_str().unwrap().contains("interior"));
}

fn assemble_with_geometry(dir: &Path, text: &str) -> Output {
    let geom = dir.join("geom.json");
    std::fs::write(&geom, text).unwrap();
    run(&[
        "assemble",
        "--kind",
        "mass",
        "--order",
        "1",
        "--geometry",
        geom.to_str().unwrap(),
    ])
}

#[test]
fn geometry_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        assemble_with_geometry(dir.path(), "{\"vertices\": [[0,0,0]")
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        assemble_with_geometry(dir.path(), r#"{"vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]]}"#)
            .status
            .code(),
        Some(4)
    );
    // apex below the base: inverted map
    assert_eq!(
        assemble_with_geometry(
            dir.path(),
            r#"{"vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0],[0,0,-1]]}"#
        )
        .status
        .code(),
        Some(5)
    );
    let missing = run(&[
        "assemble",
        "--kind",
        "mass",
        "--order",
        "1",
        "--geometry",
        "/nonexistent/g.json",
    ]);
    assert_eq!(missing.status.code(), Some(4));
    assert_eq!(
        run(&["assemble", "--kind", "mass", "--order", "1", "--nq", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_default_passes_with_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let o = run(&["verify", "--order-max", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all suites passed"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);
    let pou = doc["suites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "partition_of_unity")
        .unwrap();
    assert!(pou["max_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn perturbed_basis_fails_verify() {
    let o = run(&["verify", "--order-max", "3", "--perturb", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("suite failed: partition_of_unity"));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_rejects_high_orders() {
    assert_eq!(run(&["verify", "--order-max", "9"]).status.code(), Some(2));
}

#[test]
fn cond_study_rows_and_trend() {
    let o = run(&["cond-study", "--order-min", "1", "--order-max", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "shape,kind,N,dof_count,nq,lambda_min,lambda_max,cond"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 24 combinations minus tet stiffness N=1..3 and pyramid stiffness N=1..2
    assert_eq!(rows.len(), 24 - 5);
    assert_eq!(stderr(&o).matches("skipped").count(), 5);
    for group in [
        ("tetrahedron", "mass"),
        ("tetrahedron", "stiffness"),
        ("pyramid", "mass"),
        ("pyramid", "stiffness"),
    ] {
        let conds: Vec<f64> = rows
            .iter()
            .filter(|r| (r[0], r[1]) == group)
            .map(|r| r[7].parse().unwrap())
            .collect();
        assert!(conds.windows(2).all(|w| w[1] > w[0]), "{group:?}: {conds:?}");
    }
}

#[test]
fn writes_only_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study.csv");
    let o = bin()
        .current_dir(dir.path())
        .args(["cond-study", "--order-max", "3", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}
