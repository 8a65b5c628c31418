use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PLUS: &str = r#"{"d": 2, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}"#;
const MIXED: &str = r#"{"d": 2, "x": [0.3, 0.4, 0.5]}"#;
const DIAGONAL: &str = r#"{"d": 2, "x": [0.0, 0.0, 0.6]}"#;
const QUTRIT: &str = r#"{"d": 3, "re": [[1, 0, 0], [0, 0, 0], [0, 0, 0]], "im": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]}"#;
const Z: &str = r#"{"d": 2, "subsets": [
  {"label": "z", "kind": "incoherent", "basis": {"d": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}}
]}"#;
const ZX: &str = r#"{"d": 2, "subsets": [
  {"label": "z", "kind": "incoherent", "basis": {"d": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}},
  {"label": "x", "kind": "incoherent", "basis": {"d": 2,
    "re": [[0.7071067811865476, 0.7071067811865476], [0.7071067811865476, -0.7071067811865476]],
    "im": [[0, 0], [0, 0]]}}
]}"#;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_genrob"))
            .args(args)
            .arg("--out")
            .arg(self.out())
            .output()
            .unwrap()
    }

    fn report(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(name)).unwrap()).unwrap()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn plus_state_has_unit_robustness() {
    let r = Run::new();
    let o = r.exec(&["robustness", s(&r.file("s.json", PLUS)), s(&r.file("f.json", Z))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = r.report("robustness.json");
    assert_eq!(rep["command"], "robustness");
    assert!((rep["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let echoed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(echoed, rep);
}

#[test]
fn free_state_has_zero_robustness() {
    let r = Run::new();
    let o = r.exec(&["robustness", s(&r.file("s.json", DIAGONAL)), s(&r.file("f.json", Z))]);
    assert_eq!(code(&o), 0);
    assert_eq!(r.report("robustness.json")["result"]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn dimension_mismatch_is_an_input_error() {
    let r = Run::new();
    let o = r.exec(&["robustness", s(&r.file("s.json", QUTRIT)), s(&r.file("f.json", Z))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn malformed_json_reports_the_line() {
    let r = Run::new();
    let o = r.exec(&["robustness", s(&r.file("s.json", "{\"d\": 2,\n \"re\": [[1, 0]")), s(&r.file("f.json", Z))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn witness_auto_is_valid() {
    let r = Run::new();
    let o = r.exec(&["witness", s(&r.file("s.json", MIXED)), s(&r.file("f.json", Z)), "--samples", "300"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = r.report("witness_report.json");
    assert_eq!(rep["result"]["valid"], true);
    assert!(rep["result"]["rho_expectation"].as_f64().unwrap() < 0.0);
    assert!(r.out().join("witness.json").exists());
}

#[test]
fn witness_above_robustness_is_rejected() {
    let r = Run::new();
    let o = r.exec(&["witness", s(&r.file("s.json", MIXED)), s(&r.file("f.json", Z)), "--s", "2"]);
    assert_eq!(code(&o), 3);
    assert_eq!(r.report("witness_report.json")["result"]["valid"], false);
}

#[test]
fn witness_of_free_state_is_not_applicable() {
    let r = Run::new();
    let o = r.exec(&["witness", s(&r.file("s.json", DIAGONAL)), s(&r.file("f.json", Z))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn worst_case_advantage_is_near_target() {
    let r = Run::new();
    let o = r.exec(&[
        "discriminate",
        s(&r.file("s.json", MIXED)),
        s(&r.file("f.json", ZX)),
        "--mode",
        "worst-case",
        "--N",
        "1000",
        "--sweep",
        "2,10,100",
        "--svg",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = &r.report("discriminate.json")["result"];
    let (target, achieved) = (res["target"].as_f64().unwrap(), res["achieved"].as_f64().unwrap());
    assert!((achieved - target).abs() <= target * 2.0 / 1000.0);
    let sweep = fs::read_to_string(r.out().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 2 * 3);
    let adv = fs::read_to_string(r.out().join("advantage.csv")).unwrap();
    assert_eq!(adv.lines().next(), Some("subset,target,achieved,N,margin"));
    assert_eq!(adv.lines().count(), 1 + 2 + 1);
    assert!(fs::read_to_string(r.out().join("sweep.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn qualitative_on_mixed_state_passes() {
    let r = Run::new();
    let o = r.exec(&["discriminate", s(&r.file("s.json", MIXED)), s(&r.file("f.json", ZX)), "--mode", "qualitative"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = &r.report("discriminate.json")["result"];
    assert_eq!(res["passed"], true);
    assert!(res["achieved"].as_f64().unwrap() > 1.0);
}

#[test]
fn qualitative_on_free_state_is_not_applicable() {
    let r = Run::new();
    let o = r.exec(&["discriminate", s(&r.file("s.json", DIAGONAL)), s(&r.file("f.json", Z)), "--mode", "qualitative"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reports_are_reproducible_for_a_seed() {
    let run = |seed: &str| {
        let r = Run::new();
        let o = r.exec(&[
            "witness",
            s(&r.file("s.json", MIXED)),
            s(&r.file("f.json", ZX)),
            "--samples",
            "200",
            "--seed",
            seed,
        ]);
        assert_eq!(code(&o), 0);
        (
            fs::read(r.out().join("witness_report.json")).unwrap(),
            fs::read(r.out().join("witness.json")).unwrap(),
        )
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7").0, run("8").0);
}

#[test]
fn verify_byrd_suite_passes() {
    let r = Run::new();
    let o = r.exec(&["verify", "--suite", "byrd"]);
    assert_eq!(code(&o), 0);
    let rep = r.report("verify.json");
    assert_eq!(rep["result"]["passed"], true);
    assert!(!rep["result"]["checks"].as_array().unwrap().is_empty());
}

#[test]
fn verify_with_impossible_tolerance_fails() {
    let r = Run::new();
    let o = r.exec(&["verify", "--suite", "witness", "--tol", "1e-30"]);
    assert_eq!(code(&o), 4);
    assert_eq!(r.report("verify.json")["result"]["passed"], false);
}

#[test]
fn unknown_suite_is_an_input_error() {
    let r = Run::new();
    assert_eq!(code(&r.exec(&["verify", "--suite", "nope"])), 1);
}
