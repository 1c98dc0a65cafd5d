use std::path::Path;
use std::process::{Command, Output};

fn bridgewatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgewatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, seed: &str, anomalies: &str, emit: &str) {
    let out = bridgewatch(&[
        "simulate",
        "--seed",
        seed,
        "--deposits",
        "5",
        "--withdrawals",
        "5",
        "--anomalies",
        anomalies,
        "--out",
        s(dir),
        "--emit",
        emit,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn clean_simulation_evaluates_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let facts = tmp.path().join("facts");
    simulate(&facts, "1", "", "facts");
    let report = tmp.path().join("report.json");
    let out = bridgewatch(&["eval", "--facts", s(&facts), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r = read_json(&report);
    assert_eq!(r["rules"]["CCTX_ValidDeposit"], 5);
    assert_eq!(r["rules"]["CCTX_ValidWithdrawal"], 5);
}

#[test]
fn forged_releases_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let facts = tmp.path().join("facts");
    simulate(&facts, "1", "forged_release=2", "facts");
    let report = tmp.path().join("report.json");
    let out = bridgewatch(&["eval", "--facts", s(&facts), "--out", s(&report)]);
    assert_eq!(code(&out), 1);
    let r = read_json(&report);
    assert_eq!(r["anomaly_counts"]["UnmatchedLocalWithdrawal"], 2);
    assert_eq!(
        r["anomalies"]["UnmatchedLocalWithdrawal"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
}

#[test]
fn missing_facts_dir_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bridgewatch(&[
        "eval",
        "--facts",
        s(&tmp.path().join("missing_dir")),
        "--out",
        s(&tmp.path().join("r.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_flags_and_specs_exit_two() {
    assert_eq!(code(&bridgewatch(&["eval"])), 2);
    assert_eq!(code(&bridgewatch(&["frobnicate"])), 2);
    let tmp = tempfile::tempdir().unwrap();
    let out = bridgewatch(&[
        "simulate",
        "--seed",
        "1",
        "--deposits",
        "1",
        "--withdrawals",
        "1",
        "--anomalies",
        "bogus=1",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(code(&out), 2);
    let out = bridgewatch(&[
        "simulate",
        "--seed",
        "1",
        "--deposits",
        "1",
        "--withdrawals",
        "1",
        "--anomalies",
        "finality_break=5",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn receipts_and_facts_paths_give_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let spec =
        "forged_release=1,replayed_id=1,finality_break=1,direct_transfer=1,orphan_bridge_event=1";
    let raw = tmp.path().join("raw");
    simulate(&raw, "8", spec, "receipts");
    for f in ["receipts.jsonl", "decoder_config.json", "ground_truth.json"] {
        assert!(raw.join(f).is_file(), "{f}");
    }
    let ingested = tmp.path().join("ingested");
    let out = bridgewatch(&[
        "ingest",
        "--receipts",
        s(&raw.join("receipts.jsonl")),
        "--config",
        s(&raw.join("decoder_config.json")),
        "--out",
        s(&ingested),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let direct = tmp.path().join("direct");
    simulate(&direct, "8", spec, "facts");

    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    assert_eq!(
        code(&bridgewatch(&[
            "eval",
            "--facts",
            s(&ingested),
            "--out",
            s(&a)
        ])),
        1
    );
    assert_eq!(
        code(&bridgewatch(&[
            "eval",
            "--facts",
            s(&direct),
            "--out",
            s(&b)
        ])),
        1
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn check_passes_on_small_store() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), "4", "replayed_id=1,forged_release=1", "facts");
    let out = bridgewatch(&["check", "--facts", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn stats_prints_json() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), "2", "", "facts");
    let out = bridgewatch(&["stats", "--facts", s(tmp.path())]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["deposits"]["count"], 5);
    assert_eq!(v["withdrawals"]["count"], 5);
    assert!(v["deposits"]["avg"].is_string());
}

#[test]
fn eval_writes_rule_csvs_and_uses_prices() {
    let tmp = tempfile::tempdir().unwrap();
    let facts = tmp.path().join("facts");
    simulate(&facts, "3", "", "facts");
    let config = read_json(&facts.join("ground_truth.json"));
    assert!(config["labels"].as_array().unwrap().is_empty());
    // Price every source token at 1 USD, 0 decimals.
    let mappings = std::fs::read_to_string(facts.join("token_mapping.facts")).unwrap();
    let prices: Vec<serde_json::Value> = mappings
        .lines()
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            serde_json::json!({"chain_id": cols[0].parse::<u64>().unwrap(), "token": cols[2], "usd": 1.0, "decimals": 0})
        })
        .collect();
    let price_path = tmp.path().join("prices.json");
    std::fs::write(&price_path, serde_json::to_string(&prices).unwrap()).unwrap();
    let csv = tmp.path().join("csv");
    let report = tmp.path().join("r.json");
    let out = bridgewatch(&[
        "eval",
        "--facts",
        s(&facts),
        "--out",
        s(&report),
        "--prices",
        s(&price_path),
        "--rules-csv",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let deposits = std::fs::read_to_string(csv.join("CCTX_ValidDeposit.csv")).unwrap();
    assert_eq!(deposits.lines().count(), 1 + 5);
    let r = read_json(&report);
    assert_eq!(r["latency"]["deposits"]["unpriced"], 0);
    assert!(r["latency"]["deposits"]["total_usd"].as_f64().unwrap() > 0.0);

    std::fs::write(&price_path, "not json").unwrap();
    let out = bridgewatch(&[
        "eval",
        "--facts",
        s(&facts),
        "--out",
        s(&report),
        "--prices",
        s(&price_path),
    ]);
    assert_eq!(code(&out), 2);
}
