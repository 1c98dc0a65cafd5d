//! Naive reference evaluator.
//!
//! Each rule body is a literal nested loop over whole relations, one loop per
//! positive atom; a conjunct is tested at the first loop where all its
//! variables are bound. No indexes are consulted.
//! It exists to be audited against the rule text and compared with the
//! engine; any divergence is an engine bug.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::facts::*;
use crate::rules::*;

/// Largest store the oracle agrees to evaluate.
pub const ORACLE_FACT_LIMIT: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("store has {facts} facts; the oracle refuses more than {limit}")]
    TooLarge { facts: usize, limit: usize },
}

fn guard(store: &FactStore) -> Result<(), OracleError> {
    let facts = store.len();
    if facts > ORACLE_FACT_LIMIT {
        Err(OracleError::TooLarge {
            facts,
            limit: ORACLE_FACT_LIMIT,
        })
    } else {
        Ok(())
    }
}

fn success(t: &TransactionFact) -> bool {
    t.status == TxStatus::Success
}

fn strictly_after(orig: Timestamp, finality: u64, dst: Timestamp) -> bool {
    (orig.0 as u128) + (finality as u128) < (dst.0 as u128)
}

fn rule1(s: &FactStore) -> BTreeSet<ScValidNativeTokenDeposit> {
    let mut out = BTreeSet::new();
    for d in s.sc_token_deposited.iter() {
        for n in s.sc_deposit.iter() {
            if !(n.tx_hash == d.tx_hash && n.amount == d.amount && d.event_index > n.event_index) {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.tx_hash == d.tx_hash
                    && t.from == n.sender
                    && t.value == d.amount
                    && success(t))
                {
                    continue;
                }
                for m in s.token_mapping.iter() {
                    if !(m.orig_chain_id == t.chain_id
                        && m.dst_chain_id == d.dst_chain_id
                        && m.orig_token == d.orig_token
                        && m.dst_token == d.dst_token
                        && m.standard == d.standard)
                    {
                        continue;
                    }
                    for w in s.wrapped_native_token.iter() {
                        if !(w.chain_id == t.chain_id && w.token == d.orig_token) {
                            continue;
                        }
                        for b in s.bridge_controlled_address.iter() {
                            if b.chain_id == t.chain_id && b.address == n.bridge_addr {
                                out.insert(ScValidNativeTokenDeposit {
                                    timestamp: t.timestamp,
                                    tx_hash: d.tx_hash,
                                    deposit_id: d.deposit_id.clone(),
                                    sender: n.sender,
                                    bridge_addr: n.bridge_addr,
                                    beneficiary: d.beneficiary,
                                    dst_token: d.dst_token,
                                    orig_token: d.orig_token,
                                    orig_chain_id: t.chain_id,
                                    dst_chain_id: d.dst_chain_id,
                                    standard: d.standard.clone(),
                                    amount: d.amount,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn rule2(s: &FactStore) -> BTreeSet<ScValidErc20TokenDeposit> {
    let mut out = BTreeSet::new();
    for d in s.sc_token_deposited.iter() {
        for e in s.erc20_transfer.iter() {
            if !(e.tx_hash == d.tx_hash
                && e.token == d.orig_token
                && e.amount == d.amount
                && d.event_index > e.event_index)
            {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.chain_id == e.chain_id
                    && t.tx_hash == d.tx_hash
                    && t.value == Amount::ZERO
                    && success(t))
                {
                    continue;
                }
                for m in s.token_mapping.iter() {
                    if !(m.orig_chain_id == e.chain_id
                        && m.dst_chain_id == d.dst_chain_id
                        && m.orig_token == d.orig_token
                        && m.dst_token == d.dst_token
                        && m.standard == d.standard)
                    {
                        continue;
                    }
                    for b in s.bridge_controlled_address.iter() {
                        if b.chain_id == e.chain_id && b.address == e.to {
                            out.insert(ScValidErc20TokenDeposit {
                                timestamp: t.timestamp,
                                tx_hash: d.tx_hash,
                                deposit_id: d.deposit_id.clone(),
                                sender: t.from,
                                bridge_addr: e.to,
                                beneficiary: d.beneficiary,
                                dst_token: d.dst_token,
                                orig_token: d.orig_token,
                                orig_chain_id: e.chain_id,
                                dst_chain_id: d.dst_chain_id,
                                standard: d.standard.clone(),
                                amount: d.amount,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn rule3(s: &FactStore) -> BTreeSet<TcValidErc20TokenDeposit> {
    let mut out = BTreeSet::new();
    for d in s.tc_token_deposited.iter() {
        for e in s.erc20_transfer.iter() {
            if !(e.tx_hash == d.tx_hash
                && e.token == d.dst_token
                && e.to == d.beneficiary
                && e.amount == d.amount
                && d.event_index > e.event_index)
            {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.chain_id == e.chain_id
                    && t.tx_hash == d.tx_hash
                    && t.value == Amount::ZERO
                    && success(t))
                {
                    continue;
                }
                for b in s.bridge_controlled_address.iter() {
                    if b.chain_id == e.chain_id && b.address == e.from {
                        out.insert(TcValidErc20TokenDeposit {
                            timestamp: t.timestamp,
                            tx_hash: d.tx_hash,
                            deposit_id: d.deposit_id.clone(),
                            beneficiary: d.beneficiary,
                            dst_token: d.dst_token,
                            chain_id: e.chain_id,
                            amount: d.amount,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Arguments of a rule 1/2 (or 5/6) tuple that the cross-chain rule reads:
/// timestamp, tx, id, sender, beneficiary, orig token, dst token, orig chain,
/// dst chain, amount.
type Leg = (
    Timestamp,
    TxHash,
    String,
    Address,
    Address,
    Address,
    Address,
    ChainId,
    ChainId,
    Amount,
);

fn rule4(s: &FactStore) -> BTreeSet<CctxValidDeposit> {
    let mut legs: Vec<Leg> = Vec::new();
    for x in rule2(s) {
        legs.push((
            x.timestamp,
            x.tx_hash,
            x.deposit_id,
            x.sender,
            x.beneficiary,
            x.orig_token,
            x.dst_token,
            x.orig_chain_id,
            x.dst_chain_id,
            x.amount,
        ));
    }
    for x in rule1(s) {
        legs.push((
            x.timestamp,
            x.tx_hash,
            x.deposit_id,
            x.sender,
            x.beneficiary,
            x.orig_token,
            x.dst_token,
            x.orig_chain_id,
            x.dst_chain_id,
            x.amount,
        ));
    }
    let mut out = BTreeSet::new();
    for tc in rule3(s) {
        for (
            orig_ts,
            orig_tx,
            id,
            sender,
            benef,
            orig_token,
            dst_token,
            orig_chain,
            dst_chain,
            amount,
        ) in &legs
        {
            if !(*id == tc.deposit_id
                && *benef == tc.beneficiary
                && *dst_token == tc.dst_token
                && *dst_chain == tc.chain_id
                && *amount == tc.amount)
            {
                continue;
            }
            for f in s.cctx_finality.iter() {
                if f.chain_id == *orig_chain
                    && strictly_after(*orig_ts, f.finality_seconds, tc.timestamp)
                {
                    out.insert(CctxValidDeposit {
                        orig_chain_id: *orig_chain,
                        orig_timestamp: *orig_ts,
                        orig_tx_hash: *orig_tx,
                        dst_chain_id: tc.chain_id,
                        dst_timestamp: tc.timestamp,
                        dst_tx_hash: tc.tx_hash,
                        deposit_id: tc.deposit_id.clone(),
                        orig_token: *orig_token,
                        dst_token: tc.dst_token,
                        sender: *sender,
                        beneficiary: tc.beneficiary,
                        amount: tc.amount,
                    });
                }
            }
        }
    }
    out
}

fn rule5(s: &FactStore) -> BTreeSet<TcValidNativeTokenWithdrawal> {
    let mut out = BTreeSet::new();
    for w in s.tc_token_withdrew.iter() {
        for n in s.tc_withdrawal.iter() {
            if !(n.tx_hash == w.tx_hash && n.amount == w.amount && w.event_index > n.event_index) {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.tx_hash == w.tx_hash
                    && t.from == n.sender
                    && t.value == w.amount
                    && success(t))
                {
                    continue;
                }
                for m in s.token_mapping.iter() {
                    if !(m.orig_chain_id == w.dst_chain_id
                        && m.dst_chain_id == t.chain_id
                        && m.orig_token == w.dst_token
                        && m.dst_token == w.orig_token
                        && m.standard == w.standard)
                    {
                        continue;
                    }
                    for wn in s.wrapped_native_token.iter() {
                        if !(wn.chain_id == t.chain_id && wn.token == w.orig_token) {
                            continue;
                        }
                        for b in s.bridge_controlled_address.iter() {
                            if b.chain_id == t.chain_id && b.address == n.bridge_addr {
                                out.insert(TcValidNativeTokenWithdrawal {
                                    timestamp: t.timestamp,
                                    tx_hash: w.tx_hash,
                                    withdrawal_id: w.withdrawal_id.clone(),
                                    sender: n.sender,
                                    bridge_addr: n.bridge_addr,
                                    beneficiary: w.beneficiary,
                                    orig_token: w.orig_token,
                                    dst_token: w.dst_token,
                                    dst_chain_id: w.dst_chain_id,
                                    orig_chain_id: t.chain_id,
                                    standard: w.standard.clone(),
                                    amount: w.amount,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn rule6(s: &FactStore) -> BTreeSet<TcValidErc20TokenWithdrawal> {
    let mut out = BTreeSet::new();
    for w in s.tc_token_withdrew.iter() {
        for e in s.erc20_transfer.iter() {
            if !(e.tx_hash == w.tx_hash
                && e.token == w.orig_token
                && e.amount == w.amount
                && w.event_index > e.event_index)
            {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.chain_id == e.chain_id
                    && t.tx_hash == w.tx_hash
                    && t.value == Amount::ZERO
                    && success(t))
                {
                    continue;
                }
                for m in s.token_mapping.iter() {
                    if !(m.orig_chain_id == w.dst_chain_id
                        && m.dst_chain_id == e.chain_id
                        && m.orig_token == w.dst_token
                        && m.dst_token == w.orig_token
                        && m.standard == w.standard)
                    {
                        continue;
                    }
                    for b in s.bridge_controlled_address.iter() {
                        if b.chain_id == e.chain_id && b.address == e.to {
                            out.insert(TcValidErc20TokenWithdrawal {
                                timestamp: t.timestamp,
                                tx_hash: w.tx_hash,
                                withdrawal_id: w.withdrawal_id.clone(),
                                sender: t.from,
                                bridge_addr: e.to,
                                beneficiary: w.beneficiary,
                                orig_token: w.orig_token,
                                dst_token: w.dst_token,
                                dst_chain_id: w.dst_chain_id,
                                orig_chain_id: e.chain_id,
                                standard: w.standard.clone(),
                                amount: w.amount,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn rule7(s: &FactStore) -> BTreeSet<ScValidErc20TokenWithdrawal> {
    let mut out = BTreeSet::new();
    for w in s.sc_token_withdrew.iter() {
        // First disjunct: token transfer from the bridge to the beneficiary.
        for e in s.erc20_transfer.iter() {
            if !(e.tx_hash == w.tx_hash
                && e.token == w.dst_token
                && e.to == w.beneficiary
                && e.amount == w.amount
                && w.event_index > e.event_index)
            {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.chain_id == e.chain_id
                    && t.tx_hash == w.tx_hash
                    && t.value == Amount::ZERO
                    && success(t))
                {
                    continue;
                }
                for b in s.bridge_controlled_address.iter() {
                    if b.chain_id == e.chain_id && b.address == e.from {
                        out.insert(ScValidErc20TokenWithdrawal {
                            timestamp: t.timestamp,
                            tx_hash: w.tx_hash,
                            withdrawal_id: w.withdrawal_id.clone(),
                            beneficiary: w.beneficiary,
                            dst_token: w.dst_token,
                            chain_id: t.chain_id,
                            amount: w.amount,
                        });
                    }
                }
            }
        }
        // Second disjunct: native release by the bridge.
        for x in s.sc_withdrawal.iter() {
            if !(x.tx_hash == w.tx_hash
                && x.beneficiary == w.beneficiary
                && x.amount == w.amount
                && w.event_index > x.event_index)
            {
                continue;
            }
            for t in s.transaction.iter() {
                if !(t.tx_hash == w.tx_hash && t.value == Amount::ZERO && success(t)) {
                    continue;
                }
                for b in s.bridge_controlled_address.iter() {
                    if b.chain_id == t.chain_id && b.address == x.bridge_addr {
                        out.insert(ScValidErc20TokenWithdrawal {
                            timestamp: t.timestamp,
                            tx_hash: w.tx_hash,
                            withdrawal_id: w.withdrawal_id.clone(),
                            beneficiary: w.beneficiary,
                            dst_token: w.dst_token,
                            chain_id: t.chain_id,
                            amount: w.amount,
                        });
                    }
                }
            }
        }
    }
    out
}

fn rule8(s: &FactStore) -> BTreeSet<CctxValidWithdrawal> {
    let mut legs: Vec<Leg> = Vec::new();
    for x in rule6(s) {
        legs.push((
            x.timestamp,
            x.tx_hash,
            x.withdrawal_id,
            x.sender,
            x.beneficiary,
            x.orig_token,
            x.dst_token,
            x.orig_chain_id,
            x.dst_chain_id,
            x.amount,
        ));
    }
    for x in rule5(s) {
        legs.push((
            x.timestamp,
            x.tx_hash,
            x.withdrawal_id,
            x.sender,
            x.beneficiary,
            x.orig_token,
            x.dst_token,
            x.orig_chain_id,
            x.dst_chain_id,
            x.amount,
        ));
    }
    let mut out = BTreeSet::new();
    for sc in rule7(s) {
        for (
            orig_ts,
            orig_tx,
            id,
            sender,
            benef,
            orig_token,
            dst_token,
            orig_chain,
            dst_chain,
            amount,
        ) in &legs
        {
            if !(*id == sc.withdrawal_id
                && *benef == sc.beneficiary
                && *dst_token == sc.dst_token
                && *dst_chain == sc.chain_id
                && *amount == sc.amount)
            {
                continue;
            }
            for f in s.cctx_finality.iter() {
                if f.chain_id == *orig_chain
                    && strictly_after(*orig_ts, f.finality_seconds, sc.timestamp)
                {
                    out.insert(CctxValidWithdrawal {
                        orig_chain_id: *orig_chain,
                        orig_timestamp: *orig_ts,
                        orig_tx_hash: *orig_tx,
                        dst_chain_id: sc.chain_id,
                        dst_timestamp: sc.timestamp,
                        dst_tx_hash: sc.tx_hash,
                        withdrawal_id: sc.withdrawal_id.clone(),
                        orig_token: *orig_token,
                        dst_token: sc.dst_token,
                        sender: *sender,
                        beneficiary: sc.beneficiary,
                        amount: sc.amount,
                    });
                }
            }
        }
    }
    out
}

/// Evaluates one rule; only that rule's set is populated in the result.
pub fn brute_force(rule: RuleId, store: &FactStore) -> Result<RuleOutputs, OracleError> {
    guard(store)?;
    let mut out = RuleOutputs::default();
    match rule {
        RuleId::ScValidNativeTokenDeposit => out.rule1 = rule1(store),
        RuleId::ScValidErc20TokenDeposit => out.rule2 = rule2(store),
        RuleId::TcValidErc20TokenDeposit => out.rule3 = rule3(store),
        RuleId::CctxValidDeposit => out.rule4 = rule4(store),
        RuleId::TcValidNativeTokenWithdrawal => out.rule5 = rule5(store),
        RuleId::TcValidErc20TokenWithdrawal => out.rule6 = rule6(store),
        RuleId::ScValidErc20TokenWithdrawal => out.rule7 = rule7(store),
        RuleId::CctxValidWithdrawal => out.rule8 = rule8(store),
    }
    Ok(out)
}

pub fn brute_force_all(store: &FactStore) -> Result<RuleOutputs, OracleError> {
    guard(store)?;
    Ok(RuleOutputs {
        rule1: rule1(store),
        rule2: rule2(store),
        rule3: rule3(store),
        rule4: rule4(store),
        rule5: rule5(store),
        rule6: rule6(store),
        rule7: rule7(store),
        rule8: rule8(store),
    })
}

/// One disagreement between engine and oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub rule: RuleId,
    /// `true` if only the engine derived the row, `false` if only the oracle did.
    pub engine_only: bool,
    pub row: Vec<String>,
}

/// Set difference between engine and oracle output, rule by rule.
pub fn diff(engine: &RuleOutputs, oracle: &RuleOutputs) -> Vec<Divergence> {
    let mut out = Vec::new();
    for rule in RuleId::ALL {
        let e: BTreeSet<Vec<String>> = engine.rows(rule).into_iter().collect();
        let o: BTreeSet<Vec<String>> = oracle.rows(rule).into_iter().collect();
        for row in e.difference(&o) {
            out.push(Divergence {
                rule,
                engine_only: true,
                row: row.clone(),
            });
        }
        for row in o.difference(&e) {
            out.push(Divergence {
                rule,
                engine_only: false,
                row: row.clone(),
            });
        }
    }
    out
}
