//! Hash-join evaluation of the eight rules.
//!
//! Local rules (1-3, 5-7) drive from the bridge event relation and probe the
//! per-transaction indexes; cross-chain rules (4, 8) probe the escrow-side
//! tuples by deposit or withdrawal id. Every conjunct is checked exactly as
//! stated; nothing is inferred from how the facts were produced.

use std::collections::{BTreeSet, HashMap};

use super::tuples::*;
use super::{finality_table, respects_finality};
use crate::facts::*;

/// Rule 1: sc_token_deposited ⋈ sc_deposit ⋈ transaction(value = amount,
/// status 1) ⋈ token_mapping ⋈ wrapped_native_token ⋈
/// bridge_controlled_address, bridge event after the native escrow.
pub fn eval_rule1(store: &FactStore) -> BTreeSet<ScValidNativeTokenDeposit> {
    let mut out = BTreeSet::new();
    for dep in store.sc_token_deposited.iter() {
        for native in store.sc_deposit.by_tx(&dep.tx_hash) {
            if native.amount != dep.amount || dep.event_index <= native.event_index {
                continue;
            }
            for tx in store.transaction.by_tx(&dep.tx_hash) {
                if tx.from != native.sender
                    || tx.value != dep.amount
                    || tx.status != TxStatus::Success
                {
                    continue;
                }
                let chain = tx.chain_id;
                if store.has_mapping(
                    chain,
                    dep.dst_chain_id,
                    dep.orig_token,
                    dep.dst_token,
                    &dep.standard,
                ) && store.is_wrapped_native(chain, dep.orig_token)
                    && store.is_bridge_controlled(chain, native.bridge_addr)
                {
                    out.insert(ScValidNativeTokenDeposit {
                        timestamp: tx.timestamp,
                        tx_hash: dep.tx_hash,
                        deposit_id: dep.deposit_id.clone(),
                        sender: native.sender,
                        bridge_addr: native.bridge_addr,
                        beneficiary: dep.beneficiary,
                        dst_token: dep.dst_token,
                        orig_token: dep.orig_token,
                        orig_chain_id: chain,
                        dst_chain_id: dep.dst_chain_id,
                        standard: dep.standard.clone(),
                        amount: dep.amount,
                    });
                }
            }
        }
    }
    out
}

/// Rule 2: sc_token_deposited ⋈ erc20_transfer(token → bridge) ⋈
/// transaction(value 0, status 1) ⋈ token_mapping ⋈ bridge_controlled_address.
pub fn eval_rule2(store: &FactStore) -> BTreeSet<ScValidErc20TokenDeposit> {
    let mut out = BTreeSet::new();
    for dep in store.sc_token_deposited.iter() {
        for transfer in store.erc20_transfer.by_tx(&dep.tx_hash) {
            if transfer.token != dep.orig_token
                || transfer.amount != dep.amount
                || dep.event_index <= transfer.event_index
            {
                continue;
            }
            let chain = transfer.chain_id;
            if !store.is_bridge_controlled(chain, transfer.to)
                || !store.has_mapping(
                    chain,
                    dep.dst_chain_id,
                    dep.orig_token,
                    dep.dst_token,
                    &dep.standard,
                )
            {
                continue;
            }
            for tx in store.transaction.by_tx(&dep.tx_hash) {
                if tx.chain_id != chain || !tx.value.is_zero() || tx.status != TxStatus::Success {
                    continue;
                }
                out.insert(ScValidErc20TokenDeposit {
                    timestamp: tx.timestamp,
                    tx_hash: dep.tx_hash,
                    deposit_id: dep.deposit_id.clone(),
                    sender: tx.from,
                    bridge_addr: transfer.to,
                    beneficiary: dep.beneficiary,
                    dst_token: dep.dst_token,
                    orig_token: dep.orig_token,
                    orig_chain_id: chain,
                    dst_chain_id: dep.dst_chain_id,
                    standard: dep.standard.clone(),
                    amount: dep.amount,
                });
            }
        }
    }
    out
}

/// Rule 3: tc_token_deposited ⋈ erc20_transfer(bridge → beneficiary) ⋈
/// transaction(value 0, status 1) ⋈ bridge_controlled_address.
pub fn eval_rule3(store: &FactStore) -> BTreeSet<TcValidErc20TokenDeposit> {
    let mut out = BTreeSet::new();
    for dep in store.tc_token_deposited.iter() {
        for transfer in store.erc20_transfer.by_tx(&dep.tx_hash) {
            if transfer.token != dep.dst_token
                || transfer.to != dep.beneficiary
                || transfer.amount != dep.amount
                || dep.event_index <= transfer.event_index
                || !store.is_bridge_controlled(transfer.chain_id, transfer.from)
            {
                continue;
            }
            for tx in store.transaction.by_tx(&dep.tx_hash) {
                if tx.chain_id != transfer.chain_id
                    || !tx.value.is_zero()
                    || tx.status != TxStatus::Success
                {
                    continue;
                }
                out.insert(TcValidErc20TokenDeposit {
                    timestamp: tx.timestamp,
                    tx_hash: dep.tx_hash,
                    deposit_id: dep.deposit_id.clone(),
                    beneficiary: dep.beneficiary,
                    dst_token: dep.dst_token,
                    chain_id: transfer.chain_id,
                    amount: dep.amount,
                });
            }
        }
    }
    out
}

/// Rule 4: rule 3 ⋈ (rule 2 ∨ rule 1) on deposit id, beneficiary,
/// destination token, destination chain and amount, with
/// `orig_timestamp + finality(orig_chain) < dst_timestamp`.
pub fn eval_rule4(
    store: &FactStore,
    native: &BTreeSet<ScValidNativeTokenDeposit>,
    erc20: &BTreeSet<ScValidErc20TokenDeposit>,
    released: &BTreeSet<TcValidErc20TokenDeposit>,
) -> BTreeSet<CctxValidDeposit> {
    let finality = finality_table(store);
    let mut by_id: HashMap<&str, Vec<ScDepositView<'_>>> = HashMap::new();
    for view in erc20
        .iter()
        .map(|t| t.view())
        .chain(native.iter().map(|t| t.view()))
    {
        by_id.entry(view.deposit_id).or_default().push(view);
    }
    let mut out = BTreeSet::new();
    for dst in released {
        let Some(candidates) = by_id.get(dst.deposit_id.as_str()) else {
            continue;
        };
        for orig in candidates {
            if orig.beneficiary != dst.beneficiary
                || orig.dst_token != dst.dst_token
                || orig.dst_chain_id != dst.chain_id
                || orig.amount != dst.amount
            {
                continue;
            }
            let windows = finality
                .get(&orig.orig_chain_id)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            if windows
                .iter()
                .any(|f| respects_finality(orig.timestamp, *f, dst.timestamp))
            {
                out.insert(CctxValidDeposit {
                    orig_chain_id: orig.orig_chain_id,
                    orig_timestamp: orig.timestamp,
                    orig_tx_hash: *orig.tx_hash,
                    dst_chain_id: dst.chain_id,
                    dst_timestamp: dst.timestamp,
                    dst_tx_hash: dst.tx_hash,
                    deposit_id: dst.deposit_id.clone(),
                    orig_token: orig.orig_token,
                    dst_token: dst.dst_token,
                    sender: orig.sender,
                    beneficiary: dst.beneficiary,
                    amount: dst.amount,
                });
            }
        }
    }
    out
}

/// Rule 5: tc_token_withdrew ⋈ tc_withdrawal ⋈ transaction(value = amount,
/// status 1) ⋈ token_mapping (deposit direction) ⋈ wrapped_native_token ⋈
/// bridge_controlled_address.
pub fn eval_rule5(store: &FactStore) -> BTreeSet<TcValidNativeTokenWithdrawal> {
    let mut out = BTreeSet::new();
    for wd in store.tc_token_withdrew.iter() {
        for native in store.tc_withdrawal.by_tx(&wd.tx_hash) {
            if native.amount != wd.amount || wd.event_index <= native.event_index {
                continue;
            }
            for tx in store.transaction.by_tx(&wd.tx_hash) {
                if tx.from != native.sender
                    || tx.value != wd.amount
                    || tx.status != TxStatus::Success
                {
                    continue;
                }
                let chain = tx.chain_id;
                if store.has_mapping(
                    wd.dst_chain_id,
                    chain,
                    wd.dst_token,
                    wd.orig_token,
                    &wd.standard,
                ) && store.is_wrapped_native(chain, wd.orig_token)
                    && store.is_bridge_controlled(chain, native.bridge_addr)
                {
                    out.insert(TcValidNativeTokenWithdrawal {
                        timestamp: tx.timestamp,
                        tx_hash: wd.tx_hash,
                        withdrawal_id: wd.withdrawal_id.clone(),
                        sender: native.sender,
                        bridge_addr: native.bridge_addr,
                        beneficiary: wd.beneficiary,
                        orig_token: wd.orig_token,
                        dst_token: wd.dst_token,
                        dst_chain_id: wd.dst_chain_id,
                        orig_chain_id: chain,
                        standard: wd.standard.clone(),
                        amount: wd.amount,
                    });
                }
            }
        }
    }
    out
}

/// Rule 6: tc_token_withdrew ⋈ erc20_transfer(token → bridge) ⋈
/// transaction(value 0, status 1) ⋈ token_mapping ⋈ bridge_controlled_address.
pub fn eval_rule6(store: &FactStore) -> BTreeSet<TcValidErc20TokenWithdrawal> {
    let mut out = BTreeSet::new();
    for wd in store.tc_token_withdrew.iter() {
        for transfer in store.erc20_transfer.by_tx(&wd.tx_hash) {
            if transfer.token != wd.orig_token
                || transfer.amount != wd.amount
                || wd.event_index <= transfer.event_index
            {
                continue;
            }
            let chain = transfer.chain_id;
            if !store.is_bridge_controlled(chain, transfer.to)
                || !store.has_mapping(
                    wd.dst_chain_id,
                    chain,
                    wd.dst_token,
                    wd.orig_token,
                    &wd.standard,
                )
            {
                continue;
            }
            for tx in store.transaction.by_tx(&wd.tx_hash) {
                if tx.chain_id != chain || !tx.value.is_zero() || tx.status != TxStatus::Success {
                    continue;
                }
                out.insert(TcValidErc20TokenWithdrawal {
                    timestamp: tx.timestamp,
                    tx_hash: wd.tx_hash,
                    withdrawal_id: wd.withdrawal_id.clone(),
                    sender: tx.from,
                    bridge_addr: transfer.to,
                    beneficiary: wd.beneficiary,
                    orig_token: wd.orig_token,
                    dst_token: wd.dst_token,
                    dst_chain_id: wd.dst_chain_id,
                    orig_chain_id: chain,
                    standard: wd.standard.clone(),
                    amount: wd.amount,
                });
            }
        }
    }
    out
}

/// Rule 7: sc_token_withdrew ⋈ (erc20_transfer(bridge → beneficiary) ∨
/// sc_withdrawal) ⋈ transaction(value 0, status 1) ⋈
/// bridge_controlled_address. No token_mapping conjunct.
pub fn eval_rule7(store: &FactStore) -> BTreeSet<ScValidErc20TokenWithdrawal> {
    let mut out = BTreeSet::new();
    let mut emit = |wd: &ScTokenWithdrewFact, tx: &TransactionFact| {
        out.insert(ScValidErc20TokenWithdrawal {
            timestamp: tx.timestamp,
            tx_hash: wd.tx_hash,
            withdrawal_id: wd.withdrawal_id.clone(),
            beneficiary: wd.beneficiary,
            dst_token: wd.dst_token,
            chain_id: tx.chain_id,
            amount: wd.amount,
        });
    };
    let release_tx = |tx: &TransactionFact| tx.value.is_zero() && tx.status == TxStatus::Success;

    for wd in store.sc_token_withdrew.iter() {
        for transfer in store.erc20_transfer.by_tx(&wd.tx_hash) {
            if transfer.token != wd.dst_token
                || transfer.to != wd.beneficiary
                || transfer.amount != wd.amount
                || wd.event_index <= transfer.event_index
                || !store.is_bridge_controlled(transfer.chain_id, transfer.from)
            {
                continue;
            }
            for tx in store.transaction.by_tx(&wd.tx_hash) {
                if tx.chain_id == transfer.chain_id && release_tx(tx) {
                    emit(wd, tx);
                }
            }
        }
        for native in store.sc_withdrawal.by_tx(&wd.tx_hash) {
            if native.beneficiary != wd.beneficiary
                || native.amount != wd.amount
                || wd.event_index <= native.event_index
            {
                continue;
            }
            for tx in store.transaction.by_tx(&wd.tx_hash) {
                if release_tx(tx) && store.is_bridge_controlled(tx.chain_id, native.bridge_addr) {
                    emit(wd, tx);
                }
            }
        }
    }
    out
}

/// Rule 8: rule 7 ⋈ (rule 6 ∨ rule 5) on withdrawal id, beneficiary,
/// destination token, destination chain and amount, with
/// `orig_timestamp + finality(orig_chain) < dst_timestamp`.
pub fn eval_rule8(
    store: &FactStore,
    native: &BTreeSet<TcValidNativeTokenWithdrawal>,
    erc20: &BTreeSet<TcValidErc20TokenWithdrawal>,
    released: &BTreeSet<ScValidErc20TokenWithdrawal>,
) -> BTreeSet<CctxValidWithdrawal> {
    let finality = finality_table(store);
    let mut by_id: HashMap<&str, Vec<TcWithdrawalView<'_>>> = HashMap::new();
    for view in erc20
        .iter()
        .map(|t| t.view())
        .chain(native.iter().map(|t| t.view()))
    {
        by_id.entry(view.withdrawal_id).or_default().push(view);
    }
    let mut out = BTreeSet::new();
    for dst in released {
        let Some(candidates) = by_id.get(dst.withdrawal_id.as_str()) else {
            continue;
        };
        for orig in candidates {
            if orig.beneficiary != dst.beneficiary
                || orig.dst_token != dst.dst_token
                || orig.dst_chain_id != dst.chain_id
                || orig.amount != dst.amount
            {
                continue;
            }
            let windows = finality
                .get(&orig.orig_chain_id)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            if windows
                .iter()
                .any(|f| respects_finality(orig.timestamp, *f, dst.timestamp))
            {
                out.insert(CctxValidWithdrawal {
                    orig_chain_id: orig.orig_chain_id,
                    orig_timestamp: orig.timestamp,
                    orig_tx_hash: *orig.tx_hash,
                    dst_chain_id: dst.chain_id,
                    dst_timestamp: dst.timestamp,
                    dst_tx_hash: dst.tx_hash,
                    withdrawal_id: dst.withdrawal_id.clone(),
                    orig_token: orig.orig_token,
                    dst_token: dst.dst_token,
                    sender: orig.sender,
                    beneficiary: dst.beneficiary,
                    amount: dst.amount,
                });
            }
        }
    }
    out
}
