use std::fs;
use std::process::{Command, Output};

use cotsums::numtheory::mod_inverse_u64;
use cotsums::sums::{partial_cot, vasyunin};
use cotsums::Precision;
use serde_json::Value;

fn cotsums(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cotsums")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn dedekind_value_is_an_exact_string() {
    let v = json_of(&cotsums(&["compute", "dedekind", "1/3"]));
    assert_eq!(v, serde_json::json!({ "value": "1/18" }));
}

#[test]
fn partial_sum_matches_the_library() {
    let v = json_of(&cotsums(&["compute", "partial", "231/677", "--l", "100"]));
    let lib = partial_cot(231, 677, 100, Precision::default()).unwrap();
    assert_eq!(v["value"].as_str().unwrap(), lib.value.to_string());
    assert_eq!(v["method"], "direct");
    assert!(number(&v["err_estimate"]) < 1e-30);
}

#[test]
fn bound_reports_both_sums_and_continuants() {
    let v = json_of(&cotsums(&["compute", "bound", "16/215"]));
    assert!((v["sum_small"].as_f64().unwrap() - 2.676).abs() < 1e-3);
    let c: Vec<&str> = v["continuants"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(c, ["1", "13", "27", "94", "215"]);
    let big = json_of(&cotsums(&[
        "compute",
        "bound",
        "1548008755920/2504730781961",
    ]));
    assert!(big["sum_large"].as_f64().unwrap() > 0.0);
}

#[test]
fn weighted_sum_reads_a_function_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    fs::write(&path, r#"{"pieces":[{"start":"0","end":"1","poly":["0","1"]}]}"#).unwrap();
    let v = json_of(&cotsums(&["compute", "sf", "5/17", "--fn", path.to_str().unwrap()]));
    let hbar = mod_inverse_u64(5, 17).unwrap() as i64;
    let want = vasyunin(hbar, 17, Precision::default()).unwrap().value.to_f64() / 17.0;
    assert!((number(&v["value"]) - want).abs() < 1e-15);

    let bound = json_of(&cotsums(&["compute", "bound", "5/17", "--fn", path.to_str().unwrap()]));
    assert!(bound["sf"]["direct"].as_f64().unwrap() >= 0.0);

    assert_eq!(cotsums(&["compute", "sf", "5/17"]).status.code(), Some(2));
    assert_eq!(cotsums(&["compute", "sf", "5/17", "--fn", "/nonexistent.json"]).status.code(), Some(3));
    fs::write(&path, r#"{"pieces":[{"start":"0","end":"1/2","poly":["1"]}]}"#).unwrap();
    assert_eq!(cotsums(&["compute", "sf", "5/17", "--fn", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn series_closed_and_truncated_agree() {
    let closed = json_of(&cotsums(&["compute", "v1", "3/7", "--l", "2"]));
    let series = json_of(&cotsums(&["compute", "v1", "3/7", "--l", "2", "--blocks", "1000"]));
    assert_eq!(closed["method"], "closed_form");
    assert_eq!(series["method"], "truncated");
    assert!((number(&closed["value"]) - number(&series["value"])).abs() <= number(&series["err_estimate"]));

    let closed = json_of(&cotsums(&["compute", "v2", "2/5", "--beta", "7/4"]));
    let series = json_of(&cotsums(&["compute", "v2", "2/5", "--beta", "7/4", "--blocks", "4000"]));
    assert!((number(&closed["value"]) - number(&series["value"])).abs() <= number(&series["err_estimate"]));
}

#[test]
fn domain_and_usage_errors_exit_with_two() {
    for args in [
        &["compute", "partial", "1/3", "--l", "5"][..],
        &["compute", "partial", "1/3"],
        &["compute", "dedekind", "1/0"],
        &["compute", "v2", "2/5"],
        &["compute", "bound", "7/3"],
        &["compute", "nope", "1/3"],
        &["--prec", "8", "compute", "vasyunin", "1/3"],
        &["verify", "dedekind", "--lmode", "some"],
    ] {
        let out = cotsums(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn figure_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (frac, rows) in [("231/677", 676), ("16/215", 214), ("1/2", 1)] {
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        assert!(cotsums(&["figure1", frac, "--out", a.to_str().unwrap()]).status.success());
        assert!(cotsums(&["--out", b.to_str().unwrap(), "figure1", frac]).status.success());
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ell,x,value");
        assert_eq!(lines.len(), rows + 1);
    }
    let half = String::from_utf8(cotsums(&["figure1", "1/2"]).stdout).unwrap();
    assert_eq!(half.lines().nth(1).unwrap(), "1,5.0000000000000000e-1,0.0000000000000000e0");
    assert_eq!(cotsums(&["figure1", "1/2", "--out", "/nonexistent/dir/f.csv"]).status.code(), Some(3));
}

#[test]
fn verify_writes_a_report_and_signals_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = cotsums(&["verify", "dedekind", "--kmax", "60", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["kmax"], 60);
    assert_eq!(report["details"]["violations"].as_array().unwrap().len(), 0);

    // a constant fitted on k <= 5 cannot cover the (231, 677) pair
    let out = cotsums(&["verify", "mcc", "--kmax", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn sampled_sweeps_depend_only_on_their_configuration() {
    let run = |seed: &str| {
        cotsums(&["--seed", seed, "verify", "prop_mp", "--kmax", "30", "--lmode", "sample:3"]).stdout
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
}

#[test]
fn precision_flag_controls_the_digits() {
    let lo = json_of(&cotsums(&["--prec", "64", "compute", "vasyunin", "3/7"]));
    let hi = json_of(&cotsums(&["--prec", "256", "compute", "vasyunin", "3/7"]));
    let (lo, hi) = (lo["value"].as_str().unwrap(), hi["value"].as_str().unwrap());
    assert!(hi.len() > lo.len());
    assert!((lo.parse::<f64>().unwrap() - hi.parse::<f64>().unwrap()).abs() < 1e-15);
}

#[test]
fn bench_prints_an_aligned_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.json");
    let out = cotsums(&["bench", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("case"));
    assert!(text.contains("bound_v1 fibonacci k (60 digits)"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 5);
    assert!(report["truncated_over_closed"].as_f64().unwrap() > 1.0);
}
