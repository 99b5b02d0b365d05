use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbound"))
        .args(args)
        .env_remove("QBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name)
}

fn assert_valid(schema: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_path(schema)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc:#}");
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

#[test]
fn table_text_mirrors_published_layout() {
    let out = qbound(&["table"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].contains("1e7") && rows[0].contains("1e35"));
    let cells = |row: &str| -> Vec<String> {
        row.split('|').skip(1).map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()
    };
    assert_eq!(
        cells(rows[2]),
        ["1.530", "1.433", "1.378", "1.344", "1.282", "1.264", "1.254", "1.248", "1.244"]
    );
    assert_eq!(cells(rows[9]), ["-", "-", "-", "-", "-", "-", "-", "2.745", "2.240"]);
    let dashes: usize = rows[2..].iter().map(|r| cells(r).iter().filter(|c| *c == "-").count()).sum();
    assert_eq!(dashes, 27);
}

#[test]
fn table_single_cell_and_formats() {
    let out = qbound(&["table", "--n0", "1", "--p0", "1e7", "--format", "csv"]);
    assert_eq!(stdout(&out), "n0,1e7\n1,1.530\n");

    let out = qbound(&["table", "--n0", "1..8", "--p0", "1e7,1e8,1e9,1e10,1e15,1e20,1e25,1e30,1e35", "--format", "json"]);
    let doc = json(&out);
    assert_valid("table.schema.json", &doc);
    let cells = doc.as_array().unwrap();
    assert_eq!(cells.len(), 72);
    assert_eq!(cells.iter().filter(|c| c["g"].is_null()).count(), 27);
    let g28 = cells.iter().find(|c| c["n0"] == 8 && c["p0"] == 1e30).unwrap();
    assert!((g28["g"].as_f64().unwrap() - 2.745).abs() < 1e-3);
}

#[test]
fn table_below_threshold_is_all_dashes() {
    let out = qbound(&["table", "--p0", "1e3", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",-")));
}

#[test]
fn table_rejects_bad_arguments() {
    for args in [
        &["table", "--n0", "0..3"][..],
        &["table", "--p0", "1e7,...,1e35"],
        &["table", "--p0", "1"],
        &["table", "--no-such-flag"],
        &["table", "--format", "yaml"],
    ] {
        assert_eq!(code(&qbound(args)), 2, "{args:?}");
    }
}

#[test]
fn bound_reports_constant_and_value() {
    let out = qbound(&["bound", "--n", "1", "--p", "1e8", "--n0", "1", "--p0", "1e7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_valid("bound.schema.json", &doc);
    assert_eq!(doc["c_rounded"], 1.53);
    // 1e8^{1/4} log(1e8) = 100 * 18.42...
    let expected = doc["c"].as_f64().unwrap() * 100.0 * 1e8f64.ln();
    assert!((doc["bound"].as_f64().unwrap() - expected).abs() < 1e-9 * expected);

    let out = qbound(&["bound", "--n", "2", "--p", "1e8"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("C = g(2, 1e8) = 2.069"));
}

#[test]
fn bound_warns_below_p0_and_rejects_invalid_pairs() {
    let out = qbound(&["bound", "--n", "1", "--p", "1e6", "--n0", "1", "--p0", "1e7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("below p0"));
    assert_eq!(json(&out)["warnings"].as_array().unwrap().len(), 1);

    let quiet = qbound(&["bound", "-q", "--n", "1", "--p", "1e6", "--n0", "1", "--p0", "1e7"]);
    assert_eq!(code(&quiet), 0);
    assert!(stderr(&quiet).is_empty());

    assert_eq!(code(&qbound(&["bound", "--n", "3", "--p", "1e7"])), 2);
    assert_eq!(code(&qbound(&["bound", "--n", "2", "--p", "1e8", "--n0", "1", "--p0", "1e8"])), 2);
    assert_eq!(code(&qbound(&["bound", "--n", "0", "--p", "1e8"])), 2);
    assert_eq!(code(&qbound(&["bound", "--n", "1"])), 2);
}

#[test]
fn nonresidue_lists() {
    let out = qbound(&["nonresidues", "--p", "7", "--d", "2", "--n", "3"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "3 5 13\n"));
    let out = qbound(&["nonresidues", "--p", "5", "--d", "2", "--n", "2"]);
    assert_eq!(stdout(&out), "2 3\n");
    let out = qbound(&["nonresidues", "--p", "5", "--n", "0"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "\n"));

    // Cubes mod 31 are {1, 2, 4, 8, 15, 16, 23, 27, 29, 30}.
    let out = qbound(&["nonresidues", "--p", "31", "--d", "3", "--n", "4", "--format", "json"]);
    let doc = json(&out);
    assert_valid("nonresidues.schema.json", &doc);
    assert_eq!(doc["q"], serde_json::json!([3, 5, 7, 11]));
}

#[test]
fn nonresidue_errors() {
    let out = qbound(&["nonresidues", "--p", "7", "--n", "3", "--cap", "10", "--format", "json"]);
    assert_eq!(code(&out), 3);
    let doc = json(&out);
    assert_valid("nonresidues.schema.json", &doc);
    assert_eq!(doc["q"], serde_json::json!([3, 5]));
    assert_eq!(doc["cap_exhausted"], true);

    assert_eq!(code(&qbound(&["nonresidues", "--p", "9", "--n", "1"])), 2);
    assert_eq!(code(&qbound(&["nonresidues", "--p", "7", "--d", "4", "--n", "1"])), 2);
}

#[test]
fn verify_requires_a_selector() {
    let out = qbound(&["verify"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&qbound(&["verify", "--lemma", "nonsense"])), 2);
}

#[test]
fn verify_single_lemma_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = qbound(&[
        "verify",
        "--lemma",
        "stirling",
        "--r-max",
        "500",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("PASS stirling: 500 instances, 500 passes, 0 failures"));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid("verify-report.schema.json", &doc);
    assert_eq!(doc["all_passed"], true);
    assert_eq!(doc["config"]["stirling_r_max"], 500);
    assert_eq!(doc["lemmas"]["stirling"]["passes"], 500);
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let run = |seed: &str, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_qbound"))
            .args(["verify", "--small", "--lemma", "disjointness,convexity", "--convexity-max", "40"])
            .args(["--seed", seed, "--format", "json"])
            .env("QBOUND_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        json(&out)
    };
    let a = run("7", "1");
    assert_valid("verify-report.schema.json", &a);
    assert_eq!(a, run("7", "3"));
    assert_eq!(a["lemmas"].as_object().unwrap().len(), 2);
    assert_ne!(a["lemmas"]["disjointness"], run("8", "1")["lemmas"]["disjointness"]);
}

#[test]
fn verify_all_small_passes() {
    let out = qbound(&["verify", "--all", "--small", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let doc = json(&out);
    assert_valid("verify-report.schema.json", &doc);
    let lemmas = doc["lemmas"].as_object().unwrap();
    assert_eq!(lemmas.len(), 7);
    for (name, r) in lemmas {
        assert_eq!(r["failures"], 0, "{name}");
        assert_eq!(r["hypothesis_failures"], 0, "{name}");
    }
    assert!(lemmas["proposition"]["passes"].as_u64().unwrap() >= 50);
}

fn scan(dir: &Path, extra: &[&str], threads: &str) -> (Output, Vec<u8>, Value) {
    let records = dir.join("records");
    let summary = dir.join("summary.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qbound"))
        .args(["scan", "--p-lo", "1e7", "--p-hi", "10020000", "--n0", "2", "--p0", "1e7"])
        .args(["--n-max", "2", "--orders", "up-to:4", "--shard-width", "2000"])
        .args(["-o", records.to_str().unwrap(), "--summary", summary.to_str().unwrap()])
        .args(extra)
        .env("QBOUND_THREADS", threads)
        .output()
        .unwrap();
    let doc = fs::read_to_string(&summary)
        .map(|s| serde_json::from_str(&s).unwrap())
        .unwrap_or(Value::Null);
    (out, fs::read(&records).unwrap_or_default(), doc)
}

#[test]
fn scan_outputs_validate_and_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (out, records, summary) = scan(dir.path(), &["--format", "json"], "1");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_valid("scan-summary.schema.json", &summary);
    assert_eq!(summary["complete"], true);
    assert_eq!(summary["aggregate"]["violations"], 0);
    assert_eq!(summary["task"]["reference"]["c"], 2.408);
    let text = String::from_utf8(records.clone()).unwrap();
    assert_eq!(text.lines().count() as u64, summary["aggregate"]["records"].as_u64().unwrap());
    for line in text.lines().step_by(97) {
        assert_valid("scan-record.schema.json", &serde_json::from_str(line).unwrap());
    }

    for threads in ["4", "8"] {
        let other = tempfile::tempdir().unwrap();
        let (_, r, s) = scan(other.path(), &["--format", "json"], threads);
        assert_eq!(r, records);
        assert_eq!(s, summary);
    }
}

#[test]
fn scan_resumes_from_checkpoint() {
    let full = tempfile::tempdir().unwrap();
    let (_, expected, expected_summary) = scan(full.path(), &[], "2");

    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("scan.checkpoint");
    let cp_arg = cp.to_str().unwrap();
    let (out, _, partial) = scan(dir.path(), &["--checkpoint", cp_arg, "--max-shards", "5"], "2");
    assert_eq!(code(&out), 0);
    assert_eq!(partial["complete"], false);
    let checkpoint: Value = serde_json::from_str(&fs::read_to_string(&cp).unwrap()).unwrap();
    assert_valid("checkpoint.schema.json", &checkpoint);
    assert_eq!(checkpoint["next_shard"], 5);

    let (out, records, summary) = scan(dir.path(), &["--checkpoint", cp_arg], "3");
    assert_eq!(code(&out), 0);
    assert_eq!(records, expected);
    assert_eq!(summary, expected_summary);

    // A different task must not pick up this checkpoint.
    let (out, _, _) = scan(dir.path(), &["--checkpoint", cp_arg, "--cap", "5000"], "1");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("different task"));
}

#[test]
fn scan_exit_codes() {
    let out = qbound(&["scan", "--p-lo", "3", "--p-hi", "60", "--n-max", "3", "--cap", "6"]);
    assert_eq!(code(&out), 3);
    let summary: Value = serde_json::from_str(&stderr(&out)[..stderr(&out).rfind('}').unwrap() + 1]).unwrap();
    assert_valid("scan-summary.schema.json", &summary);
    assert!(stdout(&out).starts_with("p,d,q_1,q_2,q_3,ratio_1,ratio_2,ratio_3,bound_ok\n"));

    for args in [
        &["scan", "--p-lo", "1e6", "--p-hi", "1e7", "--n0", "1", "--p0", "1e7"][..],
        &["scan", "--p-lo", "1e7", "--p-hi", "10001000", "--n0", "1", "--p0", "1e7", "--c", "1.2"],
        &["scan", "--p-lo", "1e7", "--p-hi", "10001000", "--n0", "1", "--p0", "1e7", "--n-max", "2"],
        &["scan", "--p-lo", "100", "--p-hi", "10"],
        &["scan", "--p-lo", "3", "--p-hi", "60", "--format", "text"],
        &["scan", "--p-lo", "3", "--p-hi", "60", "--checkpoint", "x"],
        &["scan", "--p-lo", "3", "--p-hi", "60", "--orders", "up-to:1"],
    ] {
        assert_eq!(code(&qbound(args)), 2, "{args:?}");
    }
}
