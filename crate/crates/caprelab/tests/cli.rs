//! End-to-end checks of the command-line surface: exit codes, file
//! formats, and idempotent outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caprelab"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn bank_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bank.app.json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn analyze_bank_reports_methods_and_exits_zero() {
    let out = bin()
        .args(["analyze", "--model"])
        .arg(bank_fixture())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("analyzed 3 methods"), "{text}");
    assert!(
        text.contains("BankManagement.setAllTransCustomers: 8 navigation nodes"),
        "{text}"
    );
}

#[test]
fn analyze_emits_deterministic_graph_dumps() {
    let dir_a = tmp("graphs_a");
    let dir_b = tmp("graphs_b");
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args(["analyze", "--emit-graph", "--model"])
            .arg(bank_fixture())
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    for name in [
        "app_type_graph.dot",
        "BankManagement.setAllTransCustomers.json",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let dot = std::fs::read_to_string(dir_a.join("app_type_graph.dot")).unwrap();
    assert!(dot
        .contains("\"BankManagement\" -> \"Transaction\" [label=\"transactions\", style=dashed]"));
}

#[test]
fn empty_model_analyzes_cleanly() {
    let dir = tmp("empty");
    let path = dir.join("empty.json");
    std::fs::write(&path, r#"{"types": [], "entryPoints": []}"#).unwrap();
    let out = bin()
        .args(["analyze", "--model"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("analyzed 0 methods"));
}

#[test]
fn malformed_model_exits_two() {
    let dir = tmp("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\"types\": [,]}").unwrap();
    let out = bin()
        .args(["analyze", "--model"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn invalid_model_reports_violations_and_exits_two() {
    let dir = tmp("invalid");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"types":[{"name":"A","persistent":true,
            "fields":[{"name":"x","targetType":"Ledger"}],"methods":[]}],
           "entryPoints":[]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["analyze", "--model"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("unresolved-field-type") && err.contains("Ledger"),
        "{err}"
    );
}

#[test]
fn hints_output_contains_golden_set() {
    let dir = tmp("hints");
    let path = dir.join("hints.json");
    let out = bin()
        .args(["hints", "--model"])
        .arg(bank_fixture())
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let map = caprelab::hints::hints_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let set = &map[&caprelab::model::MethodRef::new("BankManagement", "setAllTransCustomers")];
    assert!(set
        .hints
        .iter()
        .any(|h| h.marked() == "transactions@collection.account.cust.company"));
}

#[test]
fn benchgen_writes_model_dataset_traces() {
    let dir = tmp("benchgen_bank");
    let out = bin()
        .args([
            "benchgen",
            "--family",
            "bank",
            "--seed",
            "42",
            "--transactions",
            "20",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("model.json").exists());
    assert!(dir.join("dataset.json").exists());
    assert!(dir.join("traces/setAllTransCustomers.json").exists());

    let out = bin()
        .args(["benchgen", "--family", "mystery", "--out"])
        .arg(dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn gen_bank(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let out = bin()
        .args([
            "benchgen",
            "--family",
            "bank",
            "--seed",
            "1",
            "--transactions",
            "16",
            "--out",
        ])
        .arg(dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    (
        dir.join("model.json"),
        dir.join("dataset.json"),
        dir.join("traces/setAllTransCustomers.json"),
    )
}

#[test]
fn simulate_csv_row_contract_and_event_log() {
    let dir = tmp("simulate");
    let (model, dataset, trace) = gen_bank(&dir);
    let events = dir.join("events.jsonl");
    let out = bin()
        .args([
            "simulate", "--policy", "capre", "--format", "csv", "--seed", "3",
        ])
        .arg("--model")
        .arg(&model)
        .arg("--dataset")
        .arg(&dataset)
        .arg("--trace")
        .arg(&trace)
        .arg("--events")
        .arg(&events)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("policy,hits,misses,prefetched_total,used,unused,completion_time")
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("capre,"), "{row}");
    // event log: one JSON object per line
    let log = std::fs::read_to_string(&events).unwrap();
    assert!(!log.is_empty());
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("event").is_some() && v.get("oid").is_some());
    }
}

#[test]
fn compare_writes_per_seed_rows_and_is_deterministic() {
    let dir = tmp("compare");
    let (model, dataset, trace) = gen_bank(&dir);
    let run = |out_dir: &Path| {
        let out = bin()
            .args([
                "compare",
                "--repeats",
                "3",
                "--seed",
                "9",
                "--deterministic",
            ])
            .arg("--model")
            .arg(&model)
            .arg("--dataset")
            .arg(&dataset)
            .arg("--trace")
            .arg(&trace)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    };
    let a = dir.join("a");
    let b = dir.join("b");
    run(&a);
    run(&b);
    let per_seed = std::fs::read_to_string(a.join("per_seed.csv")).unwrap();
    // header plus 6 policies x 3 seeds
    assert_eq!(per_seed.lines().count(), 1 + 6 * 3);
    assert!(a.join("summary.csv").exists());
    for name in ["per_seed.csv", "summary.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} not byte-identical"
        );
    }
}

#[test]
fn oracle_check_bank_and_branch_free_verdicts() {
    let dir = tmp("oracle");
    let (model, dataset, trace) = gen_bank(&dir);
    let out = bin()
        .args(["oracle-check", "--seed", "5"])
        .arg("--model")
        .arg(&model)
        .arg("--dataset")
        .arg(&dataset)
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("BankManagement.setAllTransCustomers: superset(branch-dependent)"),
        "{text}"
    );

    // a branch-free family checks out exact
    let kdir = tmp("oracle_kmeans");
    let out = bin()
        .args(["benchgen", "--family", "kmeans", "--vectors", "40", "--out"])
        .arg(&kdir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .args(["oracle-check"])
        .arg("--model")
        .arg(kdir.join("model.json"))
        .arg("--dataset")
        .arg(kdir.join("dataset.json"))
        .arg("--trace")
        .arg(kdir.join("traces/cluster.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("VectorCollection.assignAll: exact"));
}

#[test]
fn corrupted_hints_file_exits_three() {
    let dir = tmp("badhints");
    let (model, dataset, trace) = gen_bank(&dir);
    let hints = dir.join("hints.json");
    std::fs::write(&hints, r#"{"Transaction.getAccount": ["account.ledger"]}"#).unwrap();
    let out = bin()
        .args(["simulate", "--policy", "capre"])
        .arg("--model")
        .arg(&model)
        .arg("--dataset")
        .arg(&dataset)
        .arg("--trace")
        .arg(&trace)
        .arg("--hints")
        .arg(&hints)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn capre_without_hints_runs_analysis_first() {
    let dir = tmp("autohints");
    let (model, dataset, trace) = gen_bank(&dir);
    let out = bin()
        .args(["simulate", "--policy", "capre", "--format", "json"])
        .arg("--model")
        .arg(&model)
        .arg("--dataset")
        .arg(&dataset)
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v[0]["prefetchedTotal"].as_u64().unwrap() > 0);
}
