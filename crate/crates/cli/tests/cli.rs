use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_complex-sturm"));
    c.env_remove("COMPLEX_STURM_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json")
}

fn validate(schema: &str, v: &Value) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(schema);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations: {msgs:?}");
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("complex-sturm-{}-{name}", std::process::id()))
}

const SPECTRUM: [&str; 11] = ["spectrum", "--potential", "0", "--interval", "0,pi", "--bc-a", "d", "--bc-b", "d", "--region", "0.5,10,-1,1"];

#[test]
fn no_arguments_prints_usage() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--potential", "x^", "--interval", "0,1"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--potential", "0", "--interval", "1,0"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--potential", "0", "--interval", "0,1", "--region", "1,0,0,1"]).status.code(), Some(1));
    // Regular endpoint without a condition.
    assert_eq!(run(&["spectrum", "--potential", "0", "--interval", "0,1", "--region", "0.5,10,-1,1"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--potential", "0", "--interval", "0,inf", "--bc-b", "d", "--bc-a", "d", "--region", "0.5,10,-1,1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_2() {
    let mut args = SPECTRUM.to_vec();
    args.extend(["--max-evals", "10"]);
    assert_eq!(run(&args).status.code(), Some(2));
    let near = run(&["greens", "--potential", "0", "--interval", "0,pi", "--bc-a", "d", "--bc-b", "d", "--lambda", "4"]);
    assert_eq!(near.status.code(), Some(2));
}

#[test]
fn classify_half_line() {
    let v = json_ok(&["classify", "--potential", "0", "--interval", "0,inf"]);
    validate("classify.schema.json", &v);
    assert_eq!(v["nu_a"], 2);
    assert_eq!(v["nu_b"], 0);
    assert_eq!(v["dim_Ub"], 1);
}

#[test]
fn spectrum_free_dirichlet() {
    let mut args = SPECTRUM.to_vec();
    args.extend(["--oracle-n", "200"]);
    let v = json_ok(&args);
    validate("spectrum.schema.json", &v);
    let roots: Vec<f64> = v.as_array().unwrap().iter().map(|e| e["lambda"][0].as_f64().unwrap()).collect();
    assert_eq!(roots.len(), 3);
    for (r, want) in roots.iter().zip([1.0, 4.0, 9.0]) {
        assert!((r - want).abs() < 1e-8);
    }
    for e in v.as_array().unwrap() {
        assert_eq!(e["multiplicity"], 1);
        assert!((e["oracle"][0].as_f64().unwrap() - e["lambda"][0].as_f64().unwrap()).abs() < 2e-3);
    }
}

#[test]
fn config_file_replaces_flags() {
    let path = tmp("config.json");
    std::fs::write(&path, r#"{"command": "spectrum", "potential": "0", "interval": "0,pi", "bc_a": "d", "bc_b": "d", "region": [0.5, 10, -1, 1]}"#).unwrap();
    let p = path.display().to_string();
    let from_config = run(&["--config", &p]);
    let from_flags = run(&SPECTRUM);
    assert!(from_config.status.success(), "{}", String::from_utf8_lossy(&from_config.stderr));
    assert_eq!(from_config.stdout, from_flags.stdout);
    // An explicit flag overrides the file: Neumann at b gives (n − 1/2)².
    let v: Value = serde_json::from_slice(&run(&["spectrum", "--config", &p, "--bc-b", "n"]).stdout).unwrap();
    assert!((v[0]["lambda"][0].as_f64().unwrap() - 2.25).abs() < 1e-8);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn weyl_report_and_trace() {
    let trace = tmp("trace.csv");
    let v = json_ok(&["weyl", "--potential", "0", "--interval", "0,inf", "--trace", &trace.display().to_string()]);
    validate("weyl.schema.json", &v);
    assert_eq!(v["case"], "limit_point_one_L2");
    assert!(v["limit_radius_estimate"].as_f64().unwrap() < 1e-8);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().next(), Some("d,re_c,im_c,r"));
    assert_eq!(csv.lines().count(), v["disks"].as_array().unwrap().len() + 1);
    std::fs::remove_file(trace).unwrap();
}

#[test]
fn dissipativity_and_oracle_outputs() {
    let v = json_ok(&["dissipativity", "--potential", "-1i*x^2", "--interval", "0,1", "--bc-a", "r:1/-1i", "--bc-b", "r:1/1i", "--oracle-n", "100"]);
    validate("dissipativity.schema.json", &v);
    assert_eq!(v["certificate"]["status"], "certified_maximal_dissipative");
    assert!(v["numerical_range"]["max_im"].as_f64().unwrap() <= 1e-6);
    let v = json_ok(&["dissipativity", "--potential", "-1i*x^2", "--interval", "0,1", "--bc-a", "r:1/1i", "--bc-b", "d"]);
    validate("dissipativity.schema.json", &v);
    assert_eq!(v["certificate"]["status"], "not_certified");

    let v = json_ok(&["oracle", "--potential", "1i*x", "--interval", "0,1", "--bc-a", "d", "--bc-b", "d", "--count", "3", "--richardson", "--samples", "20"]);
    validate("oracle.schema.json", &v);
    let first = &v["eigenvalues"][0];
    assert!((first[0].as_f64().unwrap() - 9.8707).abs() < 1e-3 && (first[1].as_f64().unwrap() - 0.5).abs() < 1e-6);
    let v = json_ok(&["oracle", "--potential", "x^2", "--interval", "-inf,inf", "--count", "2"]);
    validate("oracle.schema.json", &v);
    assert_eq!(v["flags"], serde_json::json!(["dirichlet_proxy_a", "dirichlet_proxy_b"]));
}

#[test]
fn greens_and_solve_csv() {
    let out = run(&["greens", "--potential", "0", "--interval", "0,1", "--bc-a", "d", "--bc-b", "d", "--grid", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,re_g,im_g"));
    let mut n = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (x, y) = (v[0].min(v[1]), v[0].max(v[1]));
        assert!((v[2] - x * (1.0 - y)).abs() < 1e-10 && v[3].abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 25);

    let out = run(&["solve", "--potential", "0", "--interval", "0,1", "--d", "0", "--rhs", "-2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x,re_f,im_f,re_df,im_df\n"));
    // −f″ = −2 with f(0) = 0, f′(0) = 1: f = x + x².
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - (v[0] + v[0] * v[0])).abs() < 1e-9);
    }
}

#[test]
fn outputs_are_deterministic() {
    let args = ["dissipativity", "--potential", "-1i*x^2", "--interval", "0,1", "--bc-a", "r:1/-1i", "--bc-b", "d", "--oracle-n", "64", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let classify = ["classify", "--potential", "sin(x)", "--interval", "0,inf"];
    let threaded = run(&classify);
    let single = bin().args(classify).env("COMPLEX_STURM_THREADS", "1").output().unwrap();
    assert!(threaded.status.success());
    assert_eq!(threaded.stdout, single.stdout);
    assert_eq!(bin().args(classify).env("COMPLEX_STURM_THREADS", "zero").output().unwrap().status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let path = tmp("spectrum.json");
    let mut args = SPECTRUM.to_vec();
    let p = path.display().to_string();
    args.extend(["--out", &p]);
    let out = run(&args);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    std::fs::remove_file(path).unwrap();
}
