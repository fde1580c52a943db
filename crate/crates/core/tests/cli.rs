use std::process::{Command, Output};

use serde_json::Value;

fn shw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shw"))
        .args(args)
        .env_remove("SHW_CACHE_DIR")
        .env_remove("SHW_ORACLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = shw(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn spin_envelope() {
    let v = json(&["spin", "--genus", "1", "--parity", "odd", "--degree", "4", "--profiles", "3,1"]);
    assert_eq!(v["value"], "-6/1");
    assert_eq!(v["chi"], -2);
    assert_eq!(v["query"]["command"], "spin");
    assert_eq!(v["query"]["parity"], "odd");
    assert_eq!(v["query"]["profiles"][0], "3,1");
    assert!(v.get("timing_ms").is_none());
    assert!(v.get("derivation").is_none());
}

#[test]
fn parity_aliases_agree() {
    let a = shw(&["spin", "--genus", "0", "--parity", "+", "--degree", "4", "--profiles", "3,1;3,1;3,1"]);
    let b = shw(&["spin", "--genus", "0", "--parity", "even", "--degree", "4", "--profiles", "(3,1);3 1;3,1"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["value"], "2/3");
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["gt", "--genus", "3", "--parity", "odd", "--degree", "4"][..],
        &["spin", "--genus", "2", "--parity", "even", "--degree", "3", "--profiles", "3;1^3;3", "--explain"],
        &["table", "--degree", "4", "--max-genus", "2", "--max-insertions", "2"],
        &["trflow", "--blocks", "kernel,invertible,kernel", "--seed", "11"],
    ] {
        let first = shw(args);
        let second = shw(args);
        assert_eq!(first.status.code(), Some(0));
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn pretty_renders_integers_bare() {
    let v = json(&["gt", "--genus", "2", "--parity", "even", "--degree", "4", "--pretty"]);
    assert_eq!(v["value"], "108");
    let v = json(&["gt", "--genus", "2", "--parity", "even", "--degree", "4"]);
    assert_eq!(v["value"], "108/1");
}

#[test]
fn timing_is_opt_in() {
    let v = json(&["gt", "--genus", "2", "--parity", "even", "--degree", "3", "--timing"]);
    assert!(v["timing_ms"].is_number());
}

#[test]
fn classical_methods_agree() {
    let base = ["classical", "--genus", "1", "--degree", "4", "--profiles", "2,1,1;2,2"];
    let frob = json(&base);
    let mut brute_args = base.to_vec();
    brute_args.extend(["--method", "brute-force"]);
    let brute = json(&brute_args);
    assert_eq!(frob["value"], brute["value"]);
    assert_eq!(brute["query"]["method"], "brute-force");
}

#[test]
fn explain_tree_matches_value() {
    let v = json(&["spin", "--genus", "2", "--parity", "odd", "--degree", "4", "--explain"]);
    let d = &v["derivation"];
    assert_eq!(d["rule"], "handle-removal");
    assert_eq!(d["value"], v["value"]);
    assert!(!d["terms"].as_array().unwrap().is_empty());
}

#[test]
fn table_csv() {
    let out = shw(&["table", "--degree", "3", "--max-genus", "1", "--max-insertions", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,parity,d,profiles,k,value_num,value_den");
    assert!(lines.contains(&"1,odd,3,\"3\",1,-3,1"));
    assert!(lines.contains(&"0,even,3,\"\",0,1,6"));
}

#[test]
fn exit_codes() {
    let missing_base = shw(&["spin", "--genus", "1", "--parity", "odd", "--degree", "5"]);
    assert_eq!(missing_base.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing_base.stderr).contains("BaseCaseUnavailable"));

    let genus_zero_odd = shw(&["spin", "--genus", "0", "--parity", "odd", "--degree", "3"]);
    assert_eq!(genus_zero_odd.status.code(), Some(2));

    let even_profile = shw(&["spin", "--genus", "1", "--parity", "odd", "--degree", "4", "--profiles", "2,2"]);
    assert_eq!(even_profile.status.code(), Some(2));

    let wrong_degree = shw(&["classical", "--genus", "0", "--degree", "4", "--profiles", "3"]);
    assert_eq!(wrong_degree.status.code(), Some(2));

    let over_budget = shw(&[
        "classical", "--genus", "2", "--degree", "5", "--method", "brute-force", "--oracle-budget", "10",
    ]);
    assert_eq!(over_budget.status.code(), Some(3));

    let unknown = shw(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let help = shw(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("spin"));
}

#[test]
fn cache_dir_is_populated_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let args = ["--cache-dir", path, "classical", "--genus", "0", "--degree", "6", "--profiles", "3,3;3,3;3,3"];
    let first = shw(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(dir.path().join("chartab-v1-d6.json").exists());
    let second = shw(&args);
    assert_eq!(first.stdout, second.stdout);

    std::fs::write(dir.path().join("chartab-v1-d6.json"), "{not json").unwrap();
    let third = shw(&args);
    assert_eq!(third.status.code(), Some(0));
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn verify_suite_passes() {
    let out = shw(&["verify", "--suite", "gt"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn trflow_report() {
    let v = json(&["trflow", "--blocks", "kernel,kernel,invertible", "--seed", "5"]);
    assert_eq!(v["sf_det"]["sign"], 1);
    assert_eq!(v["sf_ker"]["sign"], 1);
    assert_eq!(v["agree"], true);
    assert_eq!(v["geometric"], true);
    assert_eq!(v["vanishing_bound_holds"], true);
    assert!(v["residuals"]["tr_invariance"].as_f64().unwrap() <= 1e-12);
}
