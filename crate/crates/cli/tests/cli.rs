use std::process::{Command, Output};

use serde_json::Value;

fn brauer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brauer"))
        .args(args)
        .env_remove("BRAUER_WORK_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = brauer(&full);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (code(&o), v)
}

#[test]
fn hilbert_reports_ramification_and_product() {
    let o = brauer(&["hilbert", "-1", "-1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("ramification {real, 2}"), "{out}");
    assert!(out.contains("product +1"));
}

#[test]
fn hilbert_single_place() {
    let (c, v) = json(&["hilbert", "2", "3", "--place", "3"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["symbol"], -1);
    assert_eq!(v["command"], "hilbert");
}

#[test]
fn zero_is_a_usage_error() {
    assert_eq!(code(&brauer(&["hilbert", "0", "3"])), 2);
}

#[test]
fn insoluble_conic_exits_ten_and_names_places() {
    let o = brauer(&["conic", "1", "1", "7"]);
    assert_eq!(code(&o), 10);
    let out = stdout(&o);
    assert!(out.contains("globally insoluble"));
    assert!(out.contains("{real, 7}"), "{out}");
}

#[test]
fn soluble_conic_reports_a_point_on_the_input() {
    let (c, v) = json(&["conic", "5", "7", "-3"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["globally_soluble"], true);
    let w = &v["result"]["report"]["witness"]["coords"];
    let xs: Vec<i64> = (0..3).map(|i| w[i].as_str().unwrap().parse().unwrap()).collect();
    assert_eq!(5 * xs[0] * xs[0] + 7 * xs[1] * xs[1] - 3 * xs[2] * xs[2], 0);
}

#[test]
fn conic_listing_contains_the_textbook_point() {
    let o = brauer(&["conic", "5", "7", "-3", "--search-cap", "10", "--list", "40"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(2 : 1 : 3)"), "{}", stdout(&o));
}

#[test]
fn local_only_skips_the_search() {
    let (c, v) = json(&["conic", "1", "1", "-2", "--local-only"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["search_cap"], Value::Null);
}

#[test]
fn localsolve_verdicts_map_to_exit_codes() {
    assert_eq!(code(&brauer(&["localsolve", "bsd-dp4", "-p", "5"])), 0);
    assert_eq!(code(&brauer(&["localsolve", "conic-1-1-7", "-p", "7"])), 10);
    assert_eq!(code(&brauer(&["localsolve", "conic-1-1-7", "-p", "real"])), 10);
    assert_eq!(code(&brauer(&["localsolve", "lind-reichardt", "-p", "2"])), 0);
}

#[test]
fn localsolve_documented_runs() {
    assert_eq!(code(&brauer(&["localsolve", "bsd-dp4", "-p", "5", "-n", "3"])), 0);
    assert_eq!(code(&brauer(&["localsolve", "lind-reichardt", "-p", "17", "-n", "4"])), 0);
    assert_eq!(code(&brauer(&["localsolve", "conic-1-1-7", "-p", "7", "-n", "3"])), 10);
}

#[test]
fn localsolve_reads_a_system_file() {
    let dir = std::env::temp_dir().join(format!("brauer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("conic.txt");
    std::fs::write(&path, "vars: x y z\n1 x^2 | 1 y^2 | 3 z^2\n").unwrap();
    let o = brauer(&["localsolve", path.to_str().unwrap(), "-p", "3"]);
    assert_eq!(code(&o), 10, "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_target_is_a_usage_error() {
    assert_eq!(code(&brauer(&["localsolve", "no-such-thing", "-p", "3"])), 2);
    assert_eq!(code(&brauer(&["certify", "no-such-thing"])), 2);
}

#[test]
fn search_finds_the_cubic_point() {
    let o = brauer(&["search", "prologue-cubic", "-B", "10"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(2 : 1 : -1)"));
}

#[test]
fn empty_search_prints_the_disclaimer_and_exits_eleven() {
    let (c, v) = json(&["search", "lind-reichardt", "-B", "30"]);
    assert_eq!(c, 11);
    assert!(v["result"]["points"].as_array().unwrap().is_empty());
    assert!(v["result"]["disclaimer"].as_str().unwrap().contains("cannot certify"));
}

#[test]
fn budget_refusal_exits_twelve() {
    let o = brauer(&["--budget", "1000", "search", "lind-reichardt", "-B", "10000"]);
    assert_eq!(code(&o), 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn certify_bsd_and_recheck_the_file() {
    let (c, v) = json(&["certify", "bsd-dp4", "--recheck"]);
    assert_eq!(c, 0);
    assert_eq!(v["conclusion"]["verdict"], "EMPTY_BRAUER_SET");
    assert_eq!(v["seed"], brauer::certificate::DEFAULT_SEED);
    let dir = std::env::temp_dir().join(format!("brauer-cert-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cert.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(code(&brauer(&["recheck", path.to_str().unwrap()])), 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn certify_output_is_deterministic() {
    let a = stdout(&brauer(&["--json", "certify", "bsd-dp4"]));
    let b = stdout(&brauer(&["--json", "certify", "bsd-dp4"]));
    assert_eq!(a, b);
}

#[test]
fn refused_certificates_exit_twelve() {
    assert_eq!(code(&brauer(&["certify", "lind-reichardt"])), 12);
    assert_eq!(code(&brauer(&["certify", "two-valued-dp4"])), 12);
}

#[test]
fn reciprocity_identities_hold() {
    let (c, v) = json(&["reciprocity", "3", "7"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["all_agree"], true);
    assert_eq!(code(&brauer(&["reciprocity", "4", "7"])), 2);
}

#[test]
fn envelope_fields_are_present() {
    let (_, v) = json(&["examples"]);
    for k in ["schema_version", "tool_version", "command", "input", "input_hash", "seed", "result"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["result"].as_array().unwrap().len(), 4);
}

#[test]
fn help_documents_exit_codes_and_seed() {
    let out = stdout(&brauer(&["--help"]));
    assert!(out.contains("12 refused"));
    assert!(out.contains("1592636884"));
}

#[test]
fn documented_hilbert_runs() {
    assert!(stdout(&brauer(&["hilbert", "1", "5"])).contains("ramification {}"));
    assert!(stdout(&brauer(&["hilbert", "3", "7", "--place", "2"])).contains("= -1"));
}

#[test]
fn trivial_conic_has_a_height_one_point() {
    let (c, v) = json(&["conic", "1", "-1", "1", "--list", "1"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["points"][0]["coords"].as_array().unwrap().len(), 3);
    let h: Vec<i64> = v["result"]["points"][0]["coords"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().parse::<i64>().unwrap().abs())
        .collect();
    assert_eq!(*h.iter().max().unwrap(), 1);
}

#[test]
fn search_on_a_point_of_the_line() {
    let dir = std::env::temp_dir().join(format!("brauer-line-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("line.txt");
    std::fs::write(&path, "vars: x y\n1 x\n").unwrap();
    let o = brauer(&["search", path.to_str().unwrap(), "-B", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(0 : 1)"), "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_system_file_is_a_usage_error() {
    let dir = std::env::temp_dir().join(format!("brauer-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.txt");
    std::fs::write(&path, "vars: x y\n1 x^2 | 1 y\n").unwrap();
    let o = brauer(&["search", path.to_str().unwrap(), "-B", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_dir_all(&dir).ok();
}
