use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hahn-forge")).args(args).env_remove("HAHN_FORGE_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn eval_golden() {
    let out = run(&["eval", "--prec", "4", "exp(x)", "--at", "t^(1)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"value\":\"1 + 1*t^(1) + 1/2*t^(2) + 1/6*t^(3) + O(t^(4))\"}\n");
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_errors_map_to_exit_codes() {
    let out = run(&["eval", "exp(x", "--at", "0"]);
    assert_eq!(code(&out), 2);
    let doc = json(&out);
    assert_eq!((doc["line"].as_u64(), doc["col"].as_u64()), (Some(1), Some(6)));

    assert_eq!(code(&run(&["eval", "exp(x)", "--at", "1"])), 2);
    assert_eq!(code(&run(&["eval", "foo(x)", "--at", "1"])), 2);
    assert_eq!(code(&run(&["eval", "1/(x - x)", "--at", "1"])), 2);
    let zero = run(&["eval", "1/(x - x)", "--at", "1", "--inv-zero-is-zero"]);
    assert_eq!(code(&zero), 0);
    assert_eq!(json(&zero)["value"], "0 + O(t^(8))");
    // the denominator is zero up to the input precision
    assert_eq!(code(&run(&["eval", "1/(x - 1)", "--at", "1 + O(t^(1))"])), 3);
    assert_eq!(code(&run(&["eval", "x"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn prepare_golden() {
    let out = run(&["prepare", "--lambda", "0", "x^2 - t^(1)"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["report"]["verdict"], "pass");
    assert_eq!(doc["report"]["op"], "verify_preparation");
    let series: Vec<&str> = doc["preparing_set"]["points"].as_array().unwrap().iter().map(|p| p["series"].as_str().unwrap()).collect();
    for c in ["1*t^(1/2)", "-1*t^(1/2)", "0"] {
        assert!(series.contains(&c), "{series:?}");
    }
}

#[test]
fn undersized_set_fails_with_witness() {
    let out = run(&["verify", "--lambda", "0", "x^2 - t^(1)", "--with-C", "0"]);
    assert_eq!(code(&out), 1);
    let doc = json(&out);
    assert_eq!(doc["verdict"], "fail");
    let v = &doc["violations"][0];
    for key in ["ball", "x", "y"] {
        assert!(v[key].is_string());
    }
}

#[test]
fn verify_defaults_to_the_prepared_set() {
    let out = run(&["verify", "--lambda", "1", "(x - 1)*(x - 1 - t^(1))", "--trials", "100"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["trials"], 100);
}

#[test]
fn identical_argv_gives_identical_bytes() {
    for args in [
        &["prepare", "--lambda", "1", "x^3 - t^(1)*x", "--seed", "9"][..],
        &["verify", "x^2 - t^(1)", "--with-C", "0", "--seed", "3"][..],
        &["jacobian", "1/x", "--trials", "40"][..],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn seed_variable_overrides_flag() {
    let args = ["verify", "x^2 - t^(1)", "--with-C", "0", "--seed", "1", "--trials", "20"];
    let out = Command::new(env!("CARGO_BIN_EXE_hahn-forge")).args(args).env("HAHN_FORGE_SEED", "5").output().unwrap();
    assert_eq!(json(&out)["seed"], 5);
    assert_eq!(json(&run(&args))["seed"], 1);
}

#[test]
fn rv_golden() {
    let out = run(&["rv", "--lambda", "1", "2*t^(1) + 3*t^(3/2) + t^(3)"]);
    assert_eq!(json(&out)["rv"], "t^(1)*[2 + 3*t^(1/2)]");
    assert_eq!(code(&run(&["rv", "--lambda", "-1", "1"])), 2);
}

#[test]
fn hensel_catalan() {
    let out = run(&["hensel", "t^(1)", "--prec", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["root"], "-1 - 1*t^(1) - 2*t^(2) - 5*t^(3) + O(t^(4))");
    assert_eq!(code(&run(&["hensel", "1", "--prec", "4"])), 2);
}

#[test]
fn polygon_and_roots() {
    let doc = json(&run(&["polygon", "(x - t^(1))*(x - t^(2))"]));
    assert_eq!(doc["edges"].as_array().unwrap().len(), 2);
    assert_eq!(doc["edges"][0]["valuation"], "2");

    let doc = json(&run(&["roots", "x^2 - t^(1)"]));
    let roots = doc["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);
    assert!(roots.iter().all(|r| r["exact"] == true && r["ramification"] == 2));
    assert_eq!(code(&run(&["roots", "1/x"])), 2);
}

#[test]
fn divide_split_implicit() {
    let out = run(&["divide", "[1]*x1^3", "[1]*x1^2 + [t^(1)]*x1 + [t^(1)]", "--prec", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["remainders"].as_array().unwrap().len(), 2);
    assert_eq!(code(&run(&["divide", "[1]*x1", "[t^(1)]*x1"])), 2);

    let doc = json(&run(&["split", "[1]*x1*x2 + [1]*x1^2*x2"]));
    assert_eq!(doc["f2"], "0");

    let out = run(&["implicit", "[1]*x2 + [-1]*x1 + [1]*x2^2", "--degree", "3", "--prec", "1"]);
    assert_eq!(json(&out)["series"], "[2 + O(t^(1))]*x1^3 + [-1 + O(t^(1))]*x1^2 + [1 + O(t^(1))]*x1 + O(deg 4)");
}

#[test]
fn probes() {
    let out = run(&["jacobian", "x^2", "--trials", "40"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["shifts"].as_array().is_some_and(|s| !s.is_empty()));

    let unit = ["probe-unit", "--center", "0", "--delta", "t^(4)", "--epsilon", "t^(-1)", "--g", "[t^(1)]*x1", "--h", "[-1*t^(-2)]*x1^2", "--trials", "40"];
    let out = run(&unit);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["op"], "strong_unit_probe");
    let empty = run(&["probe-unit", "--center", "0", "--delta", "t^(1)", "--epsilon", "t^(1)", "--g", "0", "--h", "0"]);
    assert_eq!(code(&empty), 2);
}
