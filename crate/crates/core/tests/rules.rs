mod common;

use bridgewatch_core::facts::*;
use bridgewatch_core::oracle;
use bridgewatch_core::rules::*;
use common::*;
use proptest::prelude::*;

fn counts(out: &RuleOutputs) -> [usize; 8] {
    RuleId::ALL.map(|r| out.len(r))
}

#[test]
fn f1_rule1_single_tuple() {
    let out = eval_rule1(&F1::default().store());
    let expected = ScValidNativeTokenDeposit {
        timestamp: Timestamp(1000),
        tx_hash: hash(0x01),
        deposit_id: "7".into(),
        sender: addr(U1),
        bridge_addr: addr(B1),
        beneficiary: addr(U2),
        dst_token: addr(CC),
        orig_token: addr(AA),
        orig_chain_id: chain(S),
        dst_chain_id: chain(T),
        standard: "ERC20".into(),
        amount: amt(5),
    };
    assert_eq!(out.into_iter().collect::<Vec<_>>(), vec![expected]);
}

#[test]
fn f1_rule1_reverted_escrow() {
    let mut f = F1::default();
    f.escrow_tx.status = TxStatus::Reverted;
    assert!(eval_rule1(&f.store()).is_empty());
}

#[test]
fn f1_rule1_bridge_event_first() {
    let mut f = F1::default();
    f.native.event_index = 1;
    f.bridge.event_index = 0;
    assert!(eval_rule1(&f.store()).is_empty());
}

/// F1 with the native escrow replaced by a token transfer into b1.
fn f1_erc20() -> (F1, FactStore) {
    let mut f = F1::default();
    f.escrow_tx.value = amt(0);
    let mut s = FactStore::new();
    statics(&mut s);
    F1::insert_static(&mut s);
    s.insert(f.escrow_tx.clone());
    s.insert(f.bridge.clone());
    s.insert(Erc20TransferFact {
        tx_hash: hash(0x01),
        chain_id: chain(S),
        event_index: 0,
        token: addr(AA),
        from: addr(U1),
        to: addr(B1),
        amount: amt(5),
    });
    f.insert_release(&mut s);
    (f, s)
}

#[test]
fn rule2_erc20_escrow() {
    let (_, s) = f1_erc20();
    let out = eval_rule2(&s);
    assert_eq!(out.len(), 1);
    let t = out.first().unwrap();
    assert_eq!(t.sender, addr(U1));
    assert_eq!(t.bridge_addr, addr(B1));
    assert_eq!(t.orig_chain_id, chain(S));
    assert!(eval_rule1(&s).is_empty());
    assert_eq!(eval_all(&s).unwrap().rule4.len(), 1);
}

#[test]
fn rule2_transfer_to_non_bridge() {
    let (_, mut s) = f1_erc20();
    let mut s2 = FactStore::new();
    for fact in all_facts(&s) {
        match fact {
            Fact::Erc20TransferFact(mut e) if e.chain_id == chain(S) => {
                e.to = addr(0x77);
                s2.insert(e);
            }
            other => {
                s2.insert(other);
            }
        }
    }
    s = s2;
    assert!(eval_rule2(&s).is_empty());
}

#[test]
fn rule2_amount_mismatch() {
    let (mut f, _) = f1_erc20();
    f.bridge.amount = amt(6);
    let mut s = FactStore::new();
    statics(&mut s);
    F1::insert_static(&mut s);
    s.insert(f.escrow_tx.clone());
    s.insert(f.bridge.clone());
    s.insert(Erc20TransferFact {
        tx_hash: hash(0x01),
        chain_id: chain(S),
        event_index: 0,
        token: addr(AA),
        from: addr(U1),
        to: addr(B1),
        amount: amt(5),
    });
    assert!(eval_rule2(&s).is_empty());
}

#[test]
fn f1_rule3_single_tuple() {
    let out = eval_rule3(&F1::default().store());
    let expected = TcValidErc20TokenDeposit {
        timestamp: Timestamp(2900),
        tx_hash: hash(0x02),
        deposit_id: "7".into(),
        beneficiary: addr(U2),
        dst_token: addr(CC),
        chain_id: chain(T),
        amount: amt(5),
    };
    assert_eq!(out.into_iter().collect::<Vec<_>>(), vec![expected]);
}

#[test]
fn rule3_transfer_from_non_bridge() {
    let mut f = F1::default();
    f.transfer.from = addr(0x55);
    assert!(eval_rule3(&f.store()).is_empty());
}

#[test]
fn rule3_nonzero_value() {
    let mut f = F1::default();
    f.release_tx.value = amt(3);
    assert!(eval_rule3(&f.store()).is_empty());
}

#[test]
fn f1_rule4_cctx() {
    let s = F1::default().store();
    let out = eval_all(&s).unwrap();
    assert_eq!(out.rule4.len(), 1);
    let c = out.rule4.first().unwrap();
    assert_eq!(
        (c.orig_timestamp, c.dst_timestamp),
        (Timestamp(1000), Timestamp(2900))
    );
    assert_eq!(c.sender, addr(U1));
    assert_eq!(c.orig_token, addr(AA));
    assert_eq!(out, oracle::brute_force_all(&s).unwrap());
}

#[test]
fn f1_rule4_boundary_is_not_a_match() {
    let out = eval_all(&F1::new(2800).store()).unwrap();
    assert!(out.rule4.is_empty());
    assert_eq!(out.rule1.len() + out.rule3.len(), 2);
    assert_eq!(eval_all(&F1::new(2801).store()).unwrap().rule4.len(), 1);
}

#[test]
fn f1_rule4_87_second_gap() {
    assert!(eval_all(&F1::new(1087).store()).unwrap().rule4.is_empty());
}

#[test]
fn f2_rule5_native_escrow() {
    let out = eval_rule5(&F2::default().store());
    assert_eq!(out.len(), 1);
    let t = out.first().unwrap();
    assert_eq!(t.orig_chain_id, chain(T));
    assert_eq!(t.dst_chain_id, chain(S));
    assert_eq!(t.sender, addr(U2));
    assert_eq!(t.orig_token, addr(DD));
}

#[test]
fn f2_rule7_native_branch() {
    let out = eval_rule7(&F2::default().store());
    assert_eq!(out.len(), 1);
    assert_eq!(out.first().unwrap().chain_id, chain(S));
}

#[test]
fn rule7_token_branch() {
    let f = F2::default();
    let mut s = FactStore::new();
    statics(&mut s);
    s.insert(f.release_tx.clone());
    s.insert(f.release.clone());
    s.insert(Erc20TransferFact {
        tx_hash: hash(0x04),
        chain_id: chain(S),
        event_index: 0,
        token: addr(BB),
        from: addr(B1),
        to: addr(U1),
        amount: amt(5),
    });
    assert_eq!(eval_rule7(&s).len(), 1);
}

#[test]
fn rule7_ignores_token_mapping() {
    // No mapping facts at all: the release rule still fires.
    let f = F2::default();
    let mut s = FactStore::new();
    statics(&mut s);
    f.insert_release(&mut s);
    assert_eq!(eval_rule7(&s).len(), 1);
}

#[test]
fn f2_without_mapping() {
    let f = F2::default();
    let mut s = FactStore::new();
    statics(&mut s);
    s.insert(WrappedNativeTokenFact {
        chain_id: chain(T),
        token: addr(DD),
    });
    f.insert_escrow(&mut s);
    f.insert_release(&mut s);
    assert!(eval_rule5(&s).is_empty());
    assert!(eval_rule6(&s).is_empty());
}

#[test]
fn f2_rule8_cctx() {
    let s = F2::default().store();
    let out = eval_all(&s).unwrap();
    assert_eq!(out.rule8.len(), 1);
    let c = out.rule8.first().unwrap();
    assert_eq!((c.orig_chain_id, c.dst_chain_id), (chain(T), chain(S)));
    assert_eq!(out, oracle::brute_force_all(&s).unwrap());
}

#[test]
fn f2_rule8_11_second_gap() {
    assert!(eval_all(&F2::new(5011).store()).unwrap().rule8.is_empty());
    assert!(eval_all(&F2::new(5045).store()).unwrap().rule8.is_empty());
    assert_eq!(eval_all(&F2::new(5046).store()).unwrap().rule8.len(), 1);
}

#[test]
fn f2_rule8_mismatched_id() {
    let mut f = F2::default();
    f.release.withdrawal_id = "10".into();
    let out = eval_all(&f.store()).unwrap();
    assert_eq!(
        (out.rule5.len(), out.rule7.len(), out.rule8.len()),
        (1, 1, 0)
    );
}

#[test]
fn f1_f2_counts() {
    let s = f1_f2();
    let out = eval_all(&s).unwrap();
    assert_eq!(counts(&out), [1, 0, 1, 1, 1, 0, 1, 1]);
    assert_eq!(
        counts(&oracle::brute_force_all(&s).unwrap()),
        [1, 0, 1, 1, 1, 0, 1, 1]
    );
}

#[test]
fn static_only_store_is_empty() {
    let mut s = FactStore::new();
    statics(&mut s);
    F1::insert_static(&mut s);
    assert_eq!(counts(&eval_all(&s).unwrap()), [0; 8]);
}

#[test]
fn missing_finality_is_a_config_error() {
    let mut s = FactStore::new();
    for fact in all_facts(&F1::default().store()) {
        if !matches!(&fact, Fact::CctxFinalityFact(f) if f.chain_id == chain(T)) {
            s.insert(fact);
        }
    }
    match eval_all(&s) {
        Err(RuleError::MissingFinality(chains)) => assert_eq!(chains, vec![chain(T)]),
        other => panic!("expected missing finality, got {other:?}"),
    }
}

#[test]
fn per_rule_evaluation_matches_eval_all() {
    let s = f1_f2();
    let all = eval_all(&s).unwrap();
    let (r1, r2, r3) = (eval_rule1(&s), eval_rule2(&s), eval_rule3(&s));
    let (r5, r6, r7) = (eval_rule5(&s), eval_rule6(&s), eval_rule7(&s));
    assert_eq!(all.rule4, eval_rule4(&s, &r1, &r2, &r3));
    assert_eq!(all.rule8, eval_rule8(&s, &r5, &r6, &r7));
    assert_eq!((all.rule1, all.rule2, all.rule3), (r1, r2, r3));
    assert_eq!((all.rule5, all.rule6, all.rule7), (r5, r6, r7));
}

#[test]
fn csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = eval_all(&F1::default().store()).unwrap();
    out.write_csv_dir(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("CCTX_ValidDeposit.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "orig_chain_id,orig_timestamp,orig_tx_hash,dst_chain_id,dst_timestamp,dst_tx_hash,deposit_id,orig_token,dst_token,sender,beneficiary,amount"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with(
        "1,1000,0x0000000000000000000000000000000000000000000000000000000000000001,100,2900,"
    ));
    assert!(row.ends_with(",7,0x00000000000000000000000000000000000000aa,0x00000000000000000000000000000000000000cc,0x0000000000000000000000000000000000000001,0x0000000000000000000000000000000000000002,5"));
    assert_eq!(lines.next(), None);
    for rule in RuleId::ALL {
        assert!(dir
            .path()
            .join(format!("{}.csv", rule.predicate()))
            .exists());
    }
}

fn is_subset(a: &RuleOutputs, b: &RuleOutputs) -> bool {
    RuleId::ALL.iter().all(|r| {
        let small: std::collections::BTreeSet<_> = a.rows(*r).into_iter().collect();
        let big: std::collections::BTreeSet<_> = b.rows(*r).into_iter().collect();
        small.is_subset(&big)
    })
}

fn finality_holds(out: &RuleOutputs, store: &FactStore) -> bool {
    let window = |c: ChainId| store.finality(c).min().unwrap();
    out.rule4
        .iter()
        .all(|c| c.dst_timestamp.0 - c.orig_timestamp.0 > window(c.orig_chain_id))
        && out
            .rule8
            .iter()
            .all(|c| c.dst_timestamp.0 - c.orig_timestamp.0 > window(c.orig_chain_id))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn insertion_order_is_irrelevant(order in Just(all_facts(&f1_f2())).prop_shuffle()) {
        let mut s = FactStore::new();
        for f in order {
            s.insert(f);
        }
        prop_assert_eq!(eval_all(&s).unwrap(), eval_all(&f1_f2()).unwrap());
    }

    #[test]
    fn adding_facts_never_removes_tuples(mask in proptest::collection::vec(any::<bool>(), 32)) {
        let full = f1_f2();
        let facts = all_facts(&full);
        let mut sub = FactStore::new();
        for (f, keep) in facts.iter().zip(mask.iter().cycle()) {
            // finality facts stay so evaluation is always defined
            if *keep || matches!(f, Fact::CctxFinalityFact(_)) {
                sub.insert(f.clone());
            }
        }
        let small = eval_all(&sub).unwrap();
        let big = eval_all(&full).unwrap();
        prop_assert!(is_subset(&small, &big));
        prop_assert_eq!(&small, &oracle::brute_force_all(&sub).unwrap());
    }

    #[test]
    fn cctx_gap_exceeds_window(dst_ts in 900u64..4000, wd_ts in 4900u64..5200) {
        let mut s = F1::new(dst_ts).store();
        let f2 = F2::new(wd_ts);
        F2::insert_static(&mut s);
        f2.insert_escrow(&mut s);
        f2.insert_release(&mut s);
        let out = eval_all(&s).unwrap();
        prop_assert!(finality_holds(&out, &s));
        prop_assert_eq!(out.rule4.len(), usize::from(dst_ts > 2800));
        prop_assert_eq!(out.rule8.len(), usize::from(wd_ts > 5045));
    }
}
