mod common;

use bridgewatch_core::analytics::*;
use bridgewatch_core::facts::*;
use bridgewatch_core::oracle::brute_force_all;
use bridgewatch_core::rules::{eval_all, RuleId};
use bridgewatch_core::scenario::{generate, random_store, AnomalySpec, ScenarioParams};
use common::*;

fn report(store: &FactStore) -> Report {
    let out = eval_all(store).unwrap();
    build_report(store, &out, None, Vec::new())
}

fn only(report: &Report, kind: AnomalyKind) -> &Anomaly {
    let list = &report.anomalies[&kind];
    assert_eq!(list.len(), 1, "{kind}: {list:?}");
    &list[0]
}

fn with_finality(store: FactStore, chain_id: u64, seconds: u64) -> FactStore {
    let mut s = FactStore::new();
    for f in all_facts(&store) {
        if !matches!(f, Fact::CctxFinalityFact(ref c) if c.chain_id == chain(chain_id)) {
            s.insert(f);
        }
    }
    s.insert(CctxFinalityFact {
        chain_id: chain(chain_id),
        finality_seconds: seconds,
    });
    s
}

#[test]
fn transfer_into_bridge_without_bridge_event() {
    let mut s = FactStore::new();
    statics(&mut s);
    s.insert(tx(1000, S, 0x10, U1, 0, true));
    s.insert(Erc20TransferFact {
        tx_hash: hash(0x10),
        chain_id: chain(S),
        event_index: 1,
        token: addr(AA),
        from: addr(U1),
        to: addr(B1),
        amount: amt(5),
    });
    let r = report(&s);
    let a = only(&r, AnomalyKind::SingleTokenEvent);
    assert_eq!(a.amount, Some(amt(5)));
    assert_eq!(a.tx_hashes, vec![hash(0x10)]);
    assert_eq!(r.total_anomalies(), 1);
}

#[test]
fn transfers_in_one_tx_are_aggregated() {
    let mut s = FactStore::new();
    statics(&mut s);
    s.insert(tx(1000, S, 0x10, U1, 0, true));
    for (i, v) in [(1, 5), (2, 7)] {
        s.insert(Erc20TransferFact {
            tx_hash: hash(0x10),
            chain_id: chain(S),
            event_index: i,
            token: addr(AA),
            from: addr(U1),
            to: addr(B1),
            amount: amt(v),
        });
    }
    let r = report(&s);
    assert_eq!(
        only(&r, AnomalyKind::SingleTokenEvent).amount,
        Some(amt(12))
    );
}

#[test]
fn bridge_event_without_funds() {
    let f1 = F1::default();
    let mut s = FactStore::new();
    statics(&mut s);
    F1::insert_static(&mut s);
    s.insert(tx(1000, S, 0x01, U1, 0, true));
    s.insert(f1.bridge.clone());
    let r = report(&s);
    let a = only(&r, AnomalyKind::SingleBridgeEvent);
    assert_eq!(a.amount, Some(amt(5)));
    assert_eq!(a.chain_ids, vec![chain(S)]);
    assert_eq!(r.total_anomalies(), 1);
}

#[test]
fn complete_fixtures_are_clean() {
    let s = f1_f2();
    let r = report(&s);
    assert_eq!(r.total_anomalies(), 0, "{:?}", r.anomalies);
    // Expected counts from the brute-force evaluator.
    let oracle = brute_force_all(&s).unwrap();
    assert_eq!(r.rule(RuleId::CctxValidDeposit), oracle.rule4.len());
    assert_eq!(r.rule(RuleId::CctxValidWithdrawal), oracle.rule8.len());
    assert_eq!((oracle.rule4.len(), oracle.rule8.len()), (1, 1));
}

#[test]
fn escrow_without_release() {
    let f1 = F1::default();
    let mut s = FactStore::new();
    statics(&mut s);
    F1::insert_static(&mut s);
    f1.insert_escrow(&mut s);
    let r = report(&s);
    let a = only(&r, AnomalyKind::UnmatchedLocalDeposit);
    assert_eq!(a.severity, Severity::Warning);
    assert_eq!(a.evidence["rule"], "1");
    assert_eq!(a.evidence["side"], "escrow");
    assert_eq!(r.total_anomalies(), 1);
}

#[test]
fn forged_release_is_critical() {
    let f2 = F2::default();
    let mut s = FactStore::new();
    statics(&mut s);
    F2::insert_static(&mut s);
    f2.insert_release(&mut s);
    let r = report(&s);
    let a = only(&r, AnomalyKind::UnmatchedLocalWithdrawal);
    assert_eq!(a.severity, Severity::Critical);
    assert_eq!(a.evidence["rule"], "7");
    assert_eq!(a.evidence["side"], "release");
    assert_eq!(a.tx_hashes, vec![hash(0x04)]);
    assert_eq!(r.total_anomalies(), 1);
}

#[test]
fn release_87_seconds_after_escrow() {
    let r = report(&F1::new(1087).store());
    let a = only(&r, AnomalyKind::FinalityViolation);
    assert_eq!(a.evidence["gap"], "87");
    assert_eq!(a.evidence["window"], "1800");
    assert_eq!(a.tx_hashes, vec![hash(0x01), hash(0x02)]);
    assert_eq!(a.severity, Severity::Critical);
    // Both legs are left unmatched and say why.
    let unmatched = &r.anomalies[&AnomalyKind::UnmatchedLocalDeposit];
    assert_eq!(unmatched.len(), 2);
    assert!(unmatched
        .iter()
        .all(|a| a.evidence["finality_violation"] == "true"));
}

#[test]
fn release_66_seconds_after_escrow_with_78_second_window() {
    let s = with_finality(F2::new(5066).store(), T, 78);
    let r = report(&s);
    let a = only(&r, AnomalyKind::FinalityViolation);
    assert_eq!(a.evidence["gap"], "66");
    assert_eq!(a.evidence["window"], "78");
    assert_eq!(r.rule(RuleId::CctxValidWithdrawal), 0);
}

#[test]
fn compliant_deposit_has_no_violation() {
    assert!(report(&F1::default().store()).anomalies[&AnomalyKind::FinalityViolation].is_empty());
}

#[test]
fn boundary_gap_equal_to_window() {
    let at = report(&F1::new(2800).store());
    assert_eq!(at.rule(RuleId::CctxValidDeposit), 0);
    assert_eq!(at.anomalies[&AnomalyKind::FinalityViolation].len(), 1);
    let after = report(&F1::new(2801).store());
    assert_eq!(after.rule(RuleId::CctxValidDeposit), 1);
    assert_eq!(after.total_anomalies(), 0);
}

#[test]
fn shifting_the_escrow_back_repairs_a_violation() {
    for gap in [1u64, 87, 1799, 1800] {
        let mut f1 = F1::new(5000 + gap);
        f1.escrow_tx.timestamp = Timestamp(5000);
        let r = report(&f1.store());
        let a = only(&r, AnomalyKind::FinalityViolation);
        let window: u64 = a.evidence["window"].parse().unwrap();
        assert_eq!(a.evidence["gap"], gap.to_string());
        f1.escrow_tx.timestamp = Timestamp(5000 - (window - gap + 1));
        let fixed = report(&f1.store());
        assert_eq!(fixed.rule(RuleId::CctxValidDeposit), 1);
        assert_eq!(fixed.total_anomalies(), 0);
    }
}

#[test]
fn two_releases_one_id() {
    let f2 = F2::default();
    let mut s = f2.store();
    let mut replay = f2.release.clone();
    replay.tx_hash = hash(0x05);
    let mut payout = f2.payout.clone();
    payout.tx_hash = hash(0x05);
    s.insert(tx(5100, S, 0x05, 0x98, 0, true));
    s.insert(payout);
    s.insert(replay);
    let r = report(&s);
    let a = only(&r, AnomalyKind::DuplicateId);
    assert_eq!(a.evidence["count"], "2");
    assert_eq!(a.evidence["id"], "9");
    assert_eq!(a.tx_hashes, vec![hash(0x04), hash(0x05)]);
    // The escrow correlates with both releases: matched, but ambiguous once.
    assert_eq!(r.rule(RuleId::CctxValidWithdrawal), 2);
    let amb = only(&r, AnomalyKind::AmbiguousMatch);
    assert_eq!(amb.tx_hashes, vec![hash(0x03), hash(0x05)]);
    assert_eq!(r.count(AnomalyKind::UnmatchedLocalWithdrawal), 0);
}

#[test]
fn unique_ids_have_no_duplicates() {
    assert!(duplicate_ids(&f1_f2()).is_empty());
}

#[test]
fn empty_store_gives_all_zero_report() {
    let r = report(&FactStore::new());
    assert_eq!(r.schema_version, 1);
    assert!(r.facts.values().all(|n| *n == 0));
    assert!(r.rules.values().all(|n| *n == 0));
    assert_eq!(r.anomaly_counts.len(), 7);
    assert_eq!(r.total_anomalies(), 0);
    assert_eq!(r.latency.deposits.count, 0);
    assert!(r.latency.deposits.avg.is_none());
}

#[test]
fn report_is_deterministic() {
    let params = ScenarioParams::new(11, 20, 20).with_anomalies(
        "forged_release=2,replayed_id=2,finality_break=1,direct_transfer=1,orphan_bridge_event=1"
            .parse()
            .unwrap(),
    );
    let a = {
        let (store, _) = generate(&params).unwrap().decode().unwrap();
        report(&store).to_json()
    };
    let b = {
        let (store, _) = generate(&params).unwrap().decode().unwrap();
        report(&store).to_json()
    };
    assert_eq!(a, b);
    let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["anomaly_counts"]["UnmatchedLocalWithdrawal"], 2);
}

#[test]
fn single_cctx_latency() {
    let r = report(&F1::default().store());
    let d = &r.latency.deposits;
    assert_eq!(
        (d.count, d.min, d.max, d.median),
        (1, Some(1900), Some(1900), Some(1900))
    );
    assert_eq!(d.avg.as_deref(), Some("1900.00"));
    assert_eq!(d.std.as_deref(), Some("0.00"));
    assert_eq!(d.total_value, amt(5));
    assert_eq!(report(&f1_f2()).latency.withdrawals.min, Some(50));
}

/// Three deposits with latencies 100, 200 and 600 on a 50-second window.
#[test]
fn latencies_100_200_600() {
    let mut s = FactStore::new();
    for (i, latency) in [100u64, 200, 600].into_iter().enumerate() {
        let mut f1 = F1::new(1000 + latency);
        let (e, rel) = (0x20 + 2 * i as u8, 0x21 + 2 * i as u8);
        let id = format!("{}", 70 + i);
        f1.escrow_tx.tx_hash = hash(e);
        f1.native.tx_hash = hash(e);
        f1.bridge.tx_hash = hash(e);
        f1.bridge.deposit_id = id.clone();
        f1.release_tx.tx_hash = hash(rel);
        f1.transfer.tx_hash = hash(rel);
        f1.release.tx_hash = hash(rel);
        f1.release.deposit_id = id;
        for f in all_facts(&f1.store()) {
            s.insert(f);
        }
    }
    let s = with_finality(s, S, 50);
    let r = report(&s);
    assert_eq!(r.total_anomalies(), 0, "{:?}", r.anomalies);
    let d = &r.latency.deposits;
    assert_eq!(
        (d.count, d.min, d.max, d.median),
        (3, Some(100), Some(600), Some(200))
    );
    assert_eq!(d.avg.as_deref(), Some("300.00"));
    assert_eq!(d.total_value, amt(15));
}

#[test]
fn prices_fill_usd() {
    let table = PriceTable::new([PriceEntry {
        chain_id: chain(S),
        token: addr(AA),
        usd: 3.0,
        decimals: 0,
    }]);
    let s = f1_f2();
    let out = eval_all(&s).unwrap();
    let r = build_report(&s, &out, Some(&table), Vec::new());
    assert_eq!(r.latency.deposits.total_usd, Some(15.0));
    assert_eq!(r.latency.withdrawals.total_usd, None);
    assert_eq!(r.latency.withdrawals.unpriced, Some(1));
}

#[test]
fn accounting_and_duplicate_invariants_on_random_stores() {
    for seed in 0..30u64 {
        let store = random_store(seed, 800);
        let r = report(&store);
        for (pred, acc) in &r.accounting {
            assert_eq!(acc.total, r.rules[pred], "seed {seed} {pred}");
            assert_eq!(acc.total, acc.matched + acc.unmatched, "seed {seed} {pred}");
        }
        let unmatched = r.count(AnomalyKind::UnmatchedLocalDeposit)
            + r.count(AnomalyKind::UnmatchedLocalWithdrawal);
        assert_eq!(
            unmatched,
            r.accounting.values().map(|a| a.unmatched).sum::<usize>()
        );

        // Release-side tuples whose id appears more than once, counted directly.
        let mut shared = 0;
        for f in store.tc_token_deposited.iter() {
            if store
                .tc_token_deposited
                .iter()
                .filter(|g| g.deposit_id == f.deposit_id)
                .count()
                > 1
            {
                shared += 1;
            }
        }
        for f in store.sc_token_withdrew.iter() {
            if store
                .sc_token_withdrew
                .iter()
                .filter(|g| g.withdrawal_id == f.withdrawal_id)
                .count()
                > 1
            {
                shared += 1;
            }
        }
        let covered: usize = r.anomalies[&AnomalyKind::DuplicateId]
            .iter()
            .map(|a| a.evidence["count"].parse::<usize>().unwrap())
            .sum();
        assert_eq!(covered, shared, "seed {seed}");

        // Every anomaly cites a transaction that exists.
        let known: std::collections::HashSet<TxHash> = all_facts(&store)
            .iter()
            .filter_map(|f| f.tx_hash().copied())
            .collect();
        for list in r.anomalies.values() {
            for a in list {
                assert!(!a.tx_hashes.is_empty());
                for t in &a.tx_hashes {
                    assert!(known.contains(t), "seed {seed}: {a:?}");
                }
            }
        }
    }
}

#[test]
fn violations_repair_on_random_stores() {
    for seed in 0..20u64 {
        let store = random_store(seed, 600);
        let out = eval_all(&store).unwrap();
        for a in finality_violations(&store, &out) {
            let gap: i128 = a.evidence["gap"].parse().unwrap();
            let window: i128 = a.evidence["window"].parse().unwrap();
            assert!(gap <= window, "seed {seed}: {a:?}");
        }
    }
}

#[test]
fn latency_stats_agree_with_direct_recomputation() {
    for seed in 0..10u64 {
        let params = ScenarioParams::new(seed, 15 + seed as usize, 12)
            .with_anomalies(AnomalySpec::default());
        let (store, _) = generate(&params).unwrap().decode().unwrap();
        let r = report(&store);
        let mut xs: Vec<u64> = eval_all(&store)
            .unwrap()
            .rule4
            .iter()
            .map(|t| t.dst_timestamp.0 - t.orig_timestamp.0)
            .collect();
        xs.sort();
        let d = &r.latency.deposits;
        assert_eq!(d.count, xs.len());
        assert_eq!(d.min, xs.first().copied());
        assert_eq!(d.max, xs.last().copied());
        assert_eq!(d.median, Some(xs[(xs.len() - 1) / 2]));
        let n = xs.len() as f64;
        let mean = xs.iter().map(|x| *x as f64).sum::<f64>() / n;
        let var = xs.iter().map(|x| (*x as f64 - mean).powi(2)).sum::<f64>() / n;
        let avg: f64 = d.avg.as_deref().unwrap().parse().unwrap();
        let std: f64 = d.std.as_deref().unwrap().parse().unwrap();
        assert!(
            (avg - mean).abs() <= 0.005 + 1e-9,
            "seed {seed}: {avg} vs {mean}"
        );
        assert!(
            (std - var.sqrt()).abs() <= 0.005 + 1e-6,
            "seed {seed}: {std} vs {}",
            var.sqrt()
        );
    }
}

#[test]
fn evaluates_a_facts_directory() {
    let dir = tempfile::tempdir().unwrap();
    dump_facts_dir(&f1_f2(), dir.path()).unwrap();
    let (_, _, r) = evaluate_facts_dir(dir.path(), None).unwrap();
    assert_eq!(r.rule(RuleId::CctxValidDeposit), 1);
    assert!(r.ingest_warnings.is_empty());

    let mut s = f1_f2();
    s.cctx_finality = Default::default();
    let bad = tempfile::tempdir().unwrap();
    dump_facts_dir(&s, bad.path()).unwrap();
    assert!(matches!(
        evaluate_facts_dir(bad.path(), None),
        Err(AnalyticsError::Rules(_))
    ));
}
