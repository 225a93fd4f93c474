use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cycleguard"));
    c.env_remove("CYCLEGUARD_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Run, require exit 0, and parse stdout as JSON.
fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(code(&out), 0, "{args:?} failed: {}", stderr(&out));
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: stdout is not JSON: {e}"))
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name)
}

fn assert_schema(name: &str, instance: &Value) {
    let raw = std::fs::read_to_string(schema_path(name)).unwrap();
    let schema: Value = serde_json::from_str(&raw).unwrap();
    let validator = jsonschema::validator_for(&schema)
        .unwrap_or_else(|e| panic!("{name} does not compile: {e}"));
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn write_file(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn gallery_names() -> Vec<String> {
    json(&["gallery", "list"])
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_owned())
        .collect()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("{v} is not a number"))
}

/// Decimal significant digits of a printed number.
fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').trim_end_matches('0').len()
}

fn numbers(v: &Value, acc: &mut Vec<f64>) {
    match v {
        Value::Number(n) => acc.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| numbers(x, acc)),
        Value::Object(o) => o.values().for_each(|x| numbers(x, acc)),
        _ => {}
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write_file(dir.path(), "bad.json", "{bad");
    let bad_expr = write_file(
        dir.path(),
        "expr.json",
        r#"{"kind":"structured","g":"x","f":{"1":"x^^2"}}"#,
    );
    let unknown_field = write_file(
        dir.path(),
        "field.json",
        r#"{"kind":"structured","g":"x","colour":"red"}"#,
    );
    for args in [
        vec!["check", bad_json.as_str()],
        vec!["check", bad_expr.as_str()],
        vec!["check", unknown_field.as_str()],
        vec!["check", "no-such-system"],
        vec!["cycles", "vdp", "--grid", "1:0:0.1"],
        vec!["cycles", "vdp", "--grid", "0.1:3"],
        vec!["cycles", "vdp", "--tol", "-1"],
        vec!["scan", "vdp", "--field", "curl"],
        vec!["scan", "vdp", "--window", "3:1:0:1"],
        vec!["portrait", "vdp", "--starts", "1;2"],
        vec!["gallery", "show", "no-such-system"],
        vec!["gallery", "verify", "no-such-system"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
        assert!(stderr(&out).len() > 10, "{args:?} gave no diagnostic");
    }
}

#[test]
fn unusable_system_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let no_origin = write_file(
        dir.path(),
        "dom.json",
        r#"{"kind":"structured","g":"x","domain":[2,1]}"#,
    );
    let general_missing_q = write_file(dir.path(), "gen.json", r#"{"kind":"general","P":"y"}"#);
    for args in [
        vec!["check", "two-cycles"],
        vec!["check", "trig"],
        vec!["transform", "two-cycles"],
        vec!["check", no_origin.as_str()],
        vec!["cycles", general_missing_q.as_str()],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 3, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn inadmissible_restoring_force_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_file(
        dir.path(),
        "g.json",
        r#"{"kind":"structured","g":"x - x^3","f":{"1":"x^2 - 1"}}"#,
    );
    let out = run(&["transform", &p]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("not admissible"));
}

#[test]
fn thread_variable_is_validated() {
    for bad in ["0", "many", "-2"] {
        let out = bin()
            .env("CYCLEGUARD_THREADS", bad)
            .args(["gallery", "list"])
            .output()
            .unwrap();
        assert_eq!(code(&out), 2, "CYCLEGUARD_THREADS={bad}");
    }
    let seq = bin()
        .env("CYCLEGUARD_THREADS", "1")
        .args(["cycles", "two-cycles"])
        .output()
        .unwrap();
    let par = bin()
        .env("CYCLEGUARD_THREADS", "3")
        .args(["cycles", "two-cycles"])
        .output()
        .unwrap();
    let flag = run(&["--sequential", "cycles", "two-cycles"]);
    assert_eq!(code(&seq), 0);
    assert_eq!(seq.stdout, par.stdout);
    assert_eq!(seq.stdout, flag.stdout);
}

#[test]
fn outputs_match_schemas() {
    for name in gallery_names() {
        let entry = json(&["gallery", "show", &name]);
        assert_schema("gallery-entry.schema.json", &entry);
        assert_schema("system-file.schema.json", &entry["system"]);
        if entry["system"]["kind"] == "structured" {
            assert_schema("report.schema.json", &json(&["check", &name]));
        }
    }
    assert_schema("gallery-list.schema.json", &json(&["gallery", "list"]));
    assert_schema(
        "cycles.schema.json",
        &json(&["cycles", "vdp", "--polyline"]),
    );
    assert_schema("cycles.schema.json", &json(&["cycles", "linear-center"]));
    assert_schema(
        "cycles.schema.json",
        &json(&["cycles", "two-cycles", "--no-exponents"]),
    );
    assert_schema(
        "scan.schema.json",
        &json(&["scan", "gauss", "--field", "edot", "--res", "60"]),
    );
    assert_schema(
        "scan.schema.json",
        &json(&["scan", "vdp", "--window", "-2:2:-1:1", "--res", "30x20"]),
    );
    assert_schema(
        "system-file.schema.json",
        &json(&["transform", "duffing-vdp", "--emit", "u-system"]),
    );
    let dir = tempfile::tempdir().unwrap();
    let summary = json(&[
        "portrait",
        "two-cycles",
        "--starts",
        "0.5,0;1,0",
        "--horizon",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_schema("portrait.schema.json", &summary);
}

#[test]
fn gallery_verify_reproduces_every_fact() {
    let v = json(&["gallery", "verify"]);
    assert_schema("gallery-verify.schema.json", &v);
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), gallery_names().len());
    for e in entries {
        for c in e["checks"].as_array().unwrap() {
            assert_eq!(c["holds"], true, "{}: {}", e["name"], c);
        }
    }
}

#[test]
fn check_reproduces_gallery_claims() {
    let fig2 = json(&["check", "fig2"]);
    assert_eq!(fig2["claim"], "exactly-one");
    assert_eq!(fig2["certified"], true);
    let unique = fig2["theorems"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["id"] == "uniqueness_trinomial")
        .unwrap();
    assert_eq!(unique["status"], "applicable");
    assert_eq!(unique["claim"], "at-most-one");

    let quartic = json(&["check", "quartic-demo"]);
    assert_eq!(quartic["claim"], "exactly-one");
    assert_eq!(quartic["basis"], "existence_odd");
    assert!(f(&quartic["boundedness"]["m"]) > 2.0);

    let gauss = json(&["check", "gauss"]);
    assert_eq!(gauss["claim"], "at-most-one");
    let w = &gauss["boundedness_failure"]["witness"];
    assert!(
        f(&w["value"]) < 0.0,
        "phi at the witness must be negative: {w}"
    );

    let lc = json(&["check", "linear-center"]);
    assert_eq!(lc["boundedness"]["route"], "trivial");
}

#[test]
fn cycles_reproduce_gallery_counts_and_radii() {
    let two = json(&["cycles", "two-cycles"]);
    let cycles = two["cycles"].as_array().unwrap();
    assert_eq!(two["count"], 2);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    assert!((f(&cycles[0]["x_star"]) - golden).abs() < 1e-6);
    assert!((f(&cycles[1]["x_star"]) - 1.0 / golden).abs() < 1e-6);
    assert_eq!(cycles[0]["stability"], "attracting");
    assert_eq!(cycles[1]["stability"], "repelling");
    let e = &cycles[0]["exponents"];
    let div = f(&e["div_integral"]);
    assert!((div + 45.4656).abs() < 1e-3, "{div}");
    for k in ["nu_integral", "log_return_derivative"] {
        assert!((f(&e[k]) - div).abs() < 1e-5 * div.abs(), "{k}: {}", e[k]);
    }

    let trig = json(&["cycles", "trig", "--no-exponents"]);
    let xs: Vec<f64> = trig["cycles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| f(&c["x_star"]))
        .collect();
    assert_eq!(xs.len(), 5);
    for (k, x) in xs.iter().enumerate() {
        assert!(
            (x - ((k + 1) as f64 * std::f64::consts::PI).sqrt()).abs() < 1e-6,
            "k = {}: {x}",
            k + 1
        );
        assert!(trig["cycles"][k].get("exponents").is_none());
    }

    let vdp = json(&["cycles", "vdp", "--polyline"]);
    assert_eq!(vdp["count"], 1);
    let c = &vdp["cycles"][0];
    assert!((f(&c["x_star"]) - 2.0086).abs() < 1e-3);
    assert!((f(&c["period"]) - 6.6633).abs() < 1e-3);
    let poly = c["polyline"].as_array().unwrap();
    assert!(poly.len() > 100);
    let r_max = f(&c["max_radius"]);
    for p in poly {
        let r = f(&p[0]).hypot(f(&p[1]));
        assert!(r <= r_max * (1.0 + 1e-6) && r >= f(&c["min_radius"]) * (1.0 - 1e-6));
    }

    let lc = json(&["cycles", "linear-center"]);
    assert_eq!(lc["count"], 0);
    assert!(!lc["degenerate"].as_array().unwrap().is_empty());
}

#[test]
fn transform_tables() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_file(
        dir.path(),
        "id.json",
        r#"{"kind":"structured","g":"x","f":{"1":"x^2 - 1","3":"x"}}"#,
    );
    let out = run(&["transform", &id, "--points", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["u", "x", "ratio", "f1", "f3"]);
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for row in &rows {
        let (u, x) = (row[0], row[1]);
        assert!((x - u).abs() < 1e-9, "alpha is the identity for g = x");
        assert!((row[2] - 1.0).abs() < 1e-9);
        assert!((row[3] - (u * u - 1.0)).abs() < 1e-8);
        assert!((row[4] - u).abs() < 1e-8);
    }
    let u_sys = json(&["transform", &id, "--emit", "u-system"]);
    assert_eq!(u_sys["f"]["1"], "x^2 - 1");
    assert!(u_sys.get("black_box").is_none());

    let out = run(&["transform", "duffing-vdp", "--points", "5", "--u-max", "2"]);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let mid: Vec<f64> = r
        .records()
        .nth(2)
        .unwrap()
        .unwrap()
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(mid[0], 0.0);
    assert!(
        (mid[3] + 1.0).abs() < 1e-9,
        "f1 pushforward at 0: {}",
        mid[3]
    );

    let bounded = write_file(
        dir.path(),
        "gauss-g.json",
        r#"{"kind":"structured","g":"x*exp(-x^2)","f":{"1":"x^2 - 1"}}"#,
    );
    let out = run(&["transform", &bounded, "--points", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stderr(&out).contains("u range: [-1, 1]"),
        "{}",
        stderr(&out)
    );
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    for rec in r.records() {
        let u: f64 = rec.unwrap()[0].parse().unwrap();
        assert!(u.abs() < 1.0);
    }
}

#[test]
fn scan_reproduces_field_signs() {
    let gauss = json(&[
        "scan",
        "gauss",
        "--field",
        "edot",
        "--window",
        "-6:6:-4:4",
        "--res",
        "120x80",
    ]);
    assert_eq!(gauss["zero_set_field"], "phi");
    assert_eq!(gauss["unbounded_count"], 4);

    let fig2 = json(&["scan", "fig2", "--field", "starshape", "--res", "80"]);
    assert!(f(&fig2["min"]) >= 0.0);
    assert_eq!(fig2["counts"]["negative"], 0);

    let vdp = json(&[
        "scan", "vdp", "--field", "A", "--window", "3", "--res", "60",
    ]);
    assert!(vdp["counts"]["negative"].as_u64().unwrap() > 0);
    assert!(vdp["counts"]["positive"].as_u64().unwrap() > 0);
    let total: u64 = ["negative", "zero", "positive"]
        .iter()
        .map(|k| vdp["counts"][k].as_u64().unwrap())
        .sum();
    assert_eq!(total, 3600);
}

#[test]
fn scan_matrix_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    json(&[
        "scan",
        "vdp",
        "--field",
        "phi",
        "--window",
        "-2:2:-1:1",
        "--res",
        "4x2",
        "--matrix",
        path.to_str().unwrap(),
    ]);
    let mut r = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, ["y\\x", "-1.5", "-0.5", "0.5", "1.5"]);
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 0.5, "top row first");
    assert_eq!(rows[1][0], -0.5);
    // For van der Pol φ = f₁(x) = x² − 1, independent of y.
    for row in &rows {
        assert_eq!(row[1..], [1.0, -1.0, -1.0, 1.0]);
    }

    let out = run(&[
        "scan", "vdp", "--field", "phi", "--res", "3", "--matrix", "-",
    ]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.records().count(), 3);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["nx"], 3);
}

#[test]
fn zero_curves_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let summary = json(&[
        "scan",
        "fig2",
        "--field",
        "phi",
        "--res",
        "90",
        "--zero-curves",
        path.to_str().unwrap(),
    ]);
    assert_eq!(summary["component_count"], 1);
    assert_eq!(summary["unbounded_count"], 0);
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        r.headers().unwrap(),
        vec!["component", "x0", "y0", "x1", "y1"]
    );
    let mut n = 0;
    for rec in r.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(v[0], 0.0);
        // φ(x, y) = x² − 1 + x²y/10 + (x² + 1)y² vanishes on a closed curve
        // through (±1, 0) and (0, ±1).
        for (x, y) in [(v[1], v[2]), (v[3], v[4])] {
            let r = x.hypot(y);
            assert!(r > 0.5 && r < 1.1, "({x}, {y})");
        }
        n += 1;
    }
    assert!(n > 50);
}

#[test]
fn portraits_follow_the_dynamics() {
    let out = run(&[
        "portrait",
        "two-cycles",
        "--starts",
        "0.3,0;1,0;1.7,0",
        "--horizon",
        "20",
        "--samples",
        "400",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["start", "t", "x", "y"]);
    let mut last = [[0.0f64; 2]; 3];
    let mut count = [0usize; 3];
    for rec in r.records() {
        let rec = rec.unwrap();
        let k: usize = rec[0].parse().unwrap();
        last[k] = [rec[2].parse().unwrap(), rec[3].parse().unwrap()];
        count[k] += 1;
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    // Inside and between the cycles orbits approach the inner one.
    for k in [0, 1] {
        assert!(
            (last[k][0].hypot(last[k][1]) - golden).abs() < 1e-3,
            "start {k}: {:?}",
            last[k]
        );
        assert_eq!(count[k], 400);
    }
    // Outside the repelling cycle orbits run away.
    assert!(last[2][0].hypot(last[2][1]) > 2.0);
    assert!(stderr(&out).contains("start 2: stopped early"));

    let dir = tempfile::tempdir().unwrap();
    let summary = json(&[
        "portrait",
        "fig2",
        "--starts",
        "0.1,0;4,4",
        "--horizon",
        "60",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let cycle = json(&["cycles", "fig2", "--no-exponents"]);
    let r_lo = f(&cycle["cycles"][0]["min_radius"]);
    let r_hi = f(&cycle["cycles"][0]["max_radius"]);
    for e in summary.as_array().unwrap() {
        assert_eq!(e["termination"]["reason"], "horizon");
        let r = f(&e["last_state"][0]).hypot(f(&e["last_state"][1]));
        assert!(r > r_lo - 1e-3 && r < r_hi + 1e-3, "{e}");
        assert!(dir.path().join(e["file"].as_str().unwrap()).exists());
    }

    let center = json(&[
        "portrait",
        "linear-center",
        "--starts",
        "1,0",
        "--horizon",
        "30",
        "--backward",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let mut r = csv::Reader::from_path(dir.path().join("orbit-0.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let (x, y): (f64, f64) = (rec[1].parse().unwrap(), rec[2].parse().unwrap());
        assert!(t <= 0.0);
        assert!((x.hypot(y) - 1.0).abs() < 1e-7);
    }
    assert_eq!(f(&center[0]["duration"]), 30.0);
}

#[test]
fn numbers_are_printed_to_twelve_significant_digits() {
    let out = run(&["cycles", "trig", "--no-exponents"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut longest = 0;
    for token in text.split(|c: char| !(c.is_ascii_digit() || ".eE-+".contains(c))) {
        if token.chars().any(|c| c.is_ascii_digit()) {
            longest = longest.max(significant_digits(token));
        }
    }
    assert!(
        longest <= 12,
        "found a number with {longest} significant digits"
    );
    assert!(longest >= 10, "numbers are over-rounded");

    let out = run(&["transform", "duffing-vdp", "--points", "9"]);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    for rec in r.records() {
        for cell in rec.unwrap().iter() {
            assert!(significant_digits(cell) <= 12, "{cell}");
        }
    }

    let mut all = Vec::new();
    numbers(&json(&["check", "quartic-demo"]), &mut all);
    assert!(all.iter().all(|v| v.is_finite()));
}

#[test]
fn closed_stdout_is_not_an_error() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = bin()
        .args(["scan", "gauss", "--res", "400", "--matrix", "-"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdout = child.stdout.take().unwrap();
    let mut first = [0u8; 16];
    stdout.read_exact(&mut first).unwrap();
    drop(stdout);
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}
