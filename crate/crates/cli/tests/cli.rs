use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const ID: &str =
    r#"{"knots": [{"x": "0", "left": "0", "value": "0"}, {"x": "1", "left": "1", "value": "1"}]}"#;
const BERN: &str = r#"{"knots": [{"x": "0", "left": "0", "value": "0.5"}, {"x": "1", "left": "0.5", "value": "1"}]}"#;
const FLAT: &str = r#"{"knots": [
  {"x": "0", "left": "0", "value": "0"},
  {"x": "1/2", "left": "1/2", "value": "1/2"},
  {"x": "3/2", "left": "1/2", "value": "1/2"},
  {"x": "2", "left": "1", "value": "1"}
]}"#;
const EMP: &str = r#"{"family": "empirical", "dim": 2, "rows": [["0", "0"], ["1", "1"]]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let fx = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        fx.file("id.json", ID);
        fx.file("bern.json", BERN);
        fx.file("flat.json", FLAT);
        fx.file("emp.json", EMP);
        fx.file(
            "unif2.json",
            &format!(r#"{{"family": "product", "dim": 2, "margins": [{ID}, {ID}]}}"#),
        );
        fx.file(
            "unif1.json",
            &format!(r#"{{"family": "product", "dim": 1, "margins": [{ID}]}}"#),
        );
        fx
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }

    fn run(&self, args: &[&str]) -> Output {
        let args: Vec<String> = args
            .iter()
            .map(|a| match a.strip_prefix('@') {
                Some(name) => self.path(name),
                None => a.to_string(),
            })
            .collect();
        Command::new(env!("CARGO_BIN_EXE_copula"))
            .args(&args)
            .output()
            .unwrap()
    }

    /// Trimmed stdout of a successful run.
    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap().trim().to_owned()
    }
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn quantiles() {
    let fx = Fixture::new();
    assert_eq!(fx.ok(&["quantile", "@bern.json", "0.3"]), "0");
    assert_eq!(
        fx.ok(&["quantile", "@bern.json", "0.5", "--right-limit"]),
        "1"
    );
    assert_eq!(fx.ok(&["quantile", "@id.json", "0.3"]), "3/10");
    assert_eq!(fx.ok(&["quantile", "@id.json", "0"]), "-inf");
    assert_eq!(
        fx.ok(&["quantile", "@id.json", "1", "--right-limit"]),
        "+inf"
    );
    assert_eq!(
        fx.ok(&["quantile", "@flat.json", "1/2", "--right-limit"]),
        "3/2"
    );
}

#[test]
fn quantile_outside_domain_is_an_input_error() {
    let fx = Fixture::new();
    let out = fx.run(&["quantile", "@bern.json", "3/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("3/2"));
    assert_eq!(
        fx.run(&["quantile", "@bern.json", "0.1.2"]).status.code(),
        Some(2)
    );
}

#[test]
fn volumes() {
    let fx = Fixture::new();
    assert_eq!(
        fx.ok(&["volume", "@unif2.json", "0.2,0.2", "0.6,0.6"]),
        "4/25"
    );
    assert_eq!(fx.ok(&["volume", "@unif1.json", "0.4", "0.4"]), "0");
    assert_eq!(fx.ok(&["volume", "@emp.json", "-1,-1", "2,2"]), "1");
    assert_eq!(
        fx.ok(&["volume", "@emp.json", "-inf,-inf", "+inf,+inf"]),
        "1"
    );
}

#[test]
fn volume_rejects_bad_corners() {
    let fx = Fixture::new();
    for (a, b) in [("0,0", "1"), ("1,0", "0,1")] {
        let out = fx.run(&["volume", "@unif2.json", a, b]);
        assert_eq!(out.status.code(), Some(2), "{a} {b}");
        assert!(stderr(&out).starts_with("error: "));
    }
}

#[test]
fn eval_handles_both_payloads() {
    let fx = Fixture::new();
    assert_eq!(fx.ok(&["eval", "@bern.json", "0.99"]), "1/2");
    assert_eq!(fx.ok(&["eval", "@unif2.json", "1/2,2/3"]), "1/3");
    assert_eq!(fx.ok(&["eval", "@emp.json", "1,-inf"]), "0");
}

#[test]
fn margin_is_one_based() {
    let fx = Fixture::new();
    let m: Value = serde_json::from_str(&fx.ok(&["margin", "@emp.json", "2"])).unwrap();
    assert_eq!(
        m,
        json!({"knots": [
            {"x": "0", "left": "0", "value": "0.5"},
            {"x": "1", "left": "0.5", "value": "1"}
        ]})
    );
    assert_eq!(fx.run(&["margin", "@emp.json", "0"]).status.code(), Some(2));
    assert_eq!(fx.run(&["margin", "@emp.json", "3"]).status.code(), Some(2));
}

#[test]
fn extract_tabulates_the_copula() {
    let fx = Fixture::new();
    let out = fx.ok(&["extract", "@unif2.json", "--grid", "4"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 25);
    let at = values
        .iter()
        .find(|e| e["s"] == json!(["1/2", "3/4"]))
        .unwrap();
    assert_eq!(at["c"], "3/8");
}

#[test]
fn verify_sklar_reports() {
    let fx = Fixture::new();
    let out = fx.run(&["verify", "sklar", "@unif2.json", "--grid", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["max_deviation"], "0");
    assert_eq!(r["pass"], true);

    let out = fx.run(&["verify", "sklar", "@emp.json", "--max-witnesses", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json_of(&out);
    assert_eq!(r["truncated"], false);
    assert!(r["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["point"] == json!(["1/2", "1/2"]) && v["got"] == "1"));
}

#[test]
fn witnesses_are_capped() {
    let fx = Fixture::new();
    let r = json_of(&fx.run(&["verify", "sklar", "@emp.json", "--max-witnesses", "2"]));
    assert_eq!(r["violations"].as_array().unwrap().len(), 2);
    assert_eq!(r["truncated"], true);
}

#[test]
fn verify_lemma_on_the_flat_only_breaks_the_identity() {
    let fx = Fixture::new();
    let out = fx.run(&["verify", "lemma", "@flat.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json_of(&out);
    assert_eq!(r["pass_a"], true);
    assert_eq!(r["pass_b"], true);
    assert_eq!(r["pass_leftcont"], true);
    let xs: Vec<&str> = r["ff_witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["x"].as_str().unwrap())
        .collect();
    assert!(xs.contains(&"1/2") && xs.contains(&"1"));
    assert!(!xs.contains(&"3/2"));

    assert_eq!(
        fx.run(&["verify", "lemma", "@id.json"]).status.code(),
        Some(0)
    );
}

#[test]
fn verify_other_kinds() {
    let fx = Fixture::new();
    for kind in ["df", "margins", "copula"] {
        assert_eq!(
            fx.run(&["verify", kind, "@unif2.json"]).status.code(),
            Some(0),
            "{kind}"
        );
    }
    let r = json_of(&fx.run(&["verify", "margins", "@emp.json"]));
    assert_eq!(r["pass"], false);
    let out = fx.run(&["verify", "copula", "@emp.json", "--max-witnesses", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_of(&out)["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["kind"] == "upper_bound" && v["point"] == json!(["1/2", "1/2"])));
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let fx = Fixture::new();
    let a = fx.run(&[
        "verify",
        "df",
        "@emp.json",
        "--seed",
        "9",
        "--cuboids",
        "30",
    ]);
    let b = fx.run(&[
        "verify",
        "df",
        "@emp.json",
        "--seed",
        "9",
        "--cuboids",
        "30",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let report = fx.path("report.json");
    let c = fx.run(&[
        "verify",
        "df",
        "@emp.json",
        "--seed",
        "9",
        "--cuboids",
        "30",
        "-o",
        &report,
    ]);
    assert!(c.stdout.is_empty());
    assert_eq!(fs::read(&report).unwrap(), a.stdout);
}

#[test]
fn ingest_transcribes_rows() {
    let fx = Fixture::new();
    fx.file("two.csv", "0,0\n1,1\n");
    let v: Value = serde_json::from_str(&fx.ok(&["ingest", "@two.csv"])).unwrap();
    assert_eq!(
        v,
        json!({"family": "empirical", "dim": 2, "rows": [["0", "0"], ["1", "1"]]})
    );

    fx.file("head.csv", "a,b\n0.25,-1\n");
    let v: Value = serde_json::from_str(&fx.ok(&["ingest", "@head.csv", "--has-header"])).unwrap();
    assert_eq!(v["rows"], json!([["0.25", "-1"]]));
}

#[test]
fn ingest_reports_bad_rows() {
    let fx = Fixture::new();
    fx.file("ragged.csv", "0,0\n1\n");
    let out = fx.run(&["ingest", "@ragged.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2: expected 2 columns"));

    fx.file("cell.csv", "0,0\n1,x\n");
    let out = fx.run(&["ingest", "@cell.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));
}

#[test]
fn malformed_inputs_exit_two() {
    let fx = Fixture::new();
    fx.file("junk.json", "{\"knots\": [");
    fx.file(
        "noknot.json",
        r#"{"knots": [{"x": "1", "left": "1/2", "value": "1/4"}]}"#,
    );
    let cases: [&[&str]; 7] = [
        &["verify", "sklar", "@junk.json"],
        &["verify", "sklar", "@missing.json"],
        &["verify", "lemma", "@emp.json"],
        &["verify", "sklar", "@bern.json"],
        &["quantile", "@noknot.json", "0"],
        &["verify", "sklar", "@unif2.json", "--grid", "0"],
        &["verify", "bogus", "@unif2.json"],
    ];
    for args in cases {
        let out = fx.run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!stderr(&out).is_empty());
        assert!(!stderr(&out).contains("panicked"));
    }
}
