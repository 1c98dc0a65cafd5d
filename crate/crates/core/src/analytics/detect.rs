//! The detectors. Each is a pure function of the store and/or rule outputs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::anomaly::{Anomaly, AnomalyKind, Severity};
use crate::facts::*;
use crate::rules::*;

/// Amount-matched event lists of one side of one transaction.
#[derive(Default)]
struct Side {
    token: Vec<Amount>,
    bridge: Vec<Amount>,
}

impl Side {
    /// Multiset difference in both directions.
    fn unmatched(&self) -> (Vec<Amount>, Vec<Amount>) {
        let mut token = self.token.clone();
        let mut bridge = self.bridge.clone();
        token.sort_unstable();
        bridge.sort_unstable();
        let (mut i, mut j) = (0, 0);
        let (mut lone_token, mut lone_bridge) = (Vec::new(), Vec::new());
        while i < token.len() && j < bridge.len() {
            match token[i].cmp(&bridge[j]) {
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    lone_token.push(token[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    lone_bridge.push(bridge[j]);
                    j += 1;
                }
            }
        }
        lone_token.extend_from_slice(&token[i..]);
        lone_bridge.extend_from_slice(&bridge[j..]);
        (lone_token, lone_bridge)
    }
}

#[derive(Default)]
struct TxEvents {
    chains: BTreeSet<ChainId>,
    escrow: Side,
    release: Side,
}

fn sum(amounts: &[Amount]) -> Amount {
    amounts
        .iter()
        .fold(Amount::ZERO, |acc, a| acc.saturating_add(*a))
}

/// Per transaction: funds moved into or out of a bridge with no bridge
/// event of the same amount ([`AnomalyKind::SingleTokenEvent`]), and bridge
/// events with no funds of that amount moved ([`AnomalyKind::SingleBridgeEvent`]).
/// At most one of each per transaction, amounts summed.
pub fn local_mismatches(store: &FactStore) -> Vec<Anomaly> {
    let mut txs: BTreeMap<TxHash, TxEvents> = BTreeMap::new();
    for t in store.erc20_transfer.iter() {
        let into = store.is_bridge_controlled(t.chain_id, t.to);
        let out_of = store.is_bridge_controlled(t.chain_id, t.from);
        if into || out_of {
            let e = txs.entry(t.tx_hash).or_default();
            e.chains.insert(t.chain_id);
            if into {
                e.escrow.token.push(t.amount);
            }
            if out_of {
                e.release.token.push(t.amount);
            }
        }
    }
    for f in store.sc_deposit.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .escrow
            .token
            .push(f.amount);
    }
    for f in store.tc_withdrawal.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .escrow
            .token
            .push(f.amount);
    }
    for f in store.sc_withdrawal.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .release
            .token
            .push(f.amount);
    }
    for f in store.sc_token_deposited.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .escrow
            .bridge
            .push(f.amount);
    }
    for f in store.tc_token_withdrew.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .escrow
            .bridge
            .push(f.amount);
    }
    for f in store.tc_token_deposited.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .release
            .bridge
            .push(f.amount);
    }
    for f in store.sc_token_withdrew.iter() {
        txs.entry(f.tx_hash)
            .or_default()
            .release
            .bridge
            .push(f.amount);
    }

    let mut out = Vec::new();
    for (tx, mut ev) in txs {
        ev.chains
            .extend(store.transaction.by_tx(&tx).map(|t| t.chain_id));
        let (esc_token, esc_bridge) = ev.escrow.unmatched();
        let (rel_token, rel_bridge) = ev.release.unmatched();
        let base = |kind, severity| {
            let mut a = Anomaly::new(kind, severity).tx(tx);
            for c in &ev.chains {
                a = a.chain(*c);
            }
            a
        };
        if !esc_token.is_empty() || !rel_token.is_empty() {
            let lone: Vec<Amount> = esc_token.iter().chain(&rel_token).copied().collect();
            out.push(
                base(AnomalyKind::SingleTokenEvent, Severity::Warning)
                    .amount(sum(&lone))
                    .with("escrow_events", esc_token.len())
                    .with("release_events", rel_token.len()),
            );
        }
        if !esc_bridge.is_empty() || !rel_bridge.is_empty() {
            let lone: Vec<Amount> = esc_bridge.iter().chain(&rel_bridge).copied().collect();
            // An unbacked release event can mint or unlock funds.
            let severity = if rel_bridge.is_empty() {
                Severity::Warning
            } else {
                Severity::Critical
            };
            out.push(
                base(AnomalyKind::SingleBridgeEvent, severity)
                    .amount(sum(&lone))
                    .with("escrow_events", esc_bridge.len())
                    .with("release_events", rel_bridge.len()),
            );
        }
    }
    out
}

/// The arguments a cross-chain tuple shares with its escrow-side local
/// tuple: orig chain, orig timestamp, orig tx, dst chain, id, orig token,
/// dst token, sender, beneficiary, amount.
type EscrowKey = (
    ChainId,
    Timestamp,
    TxHash,
    ChainId,
    String,
    Address,
    Address,
    Address,
    Address,
    Amount,
);
/// Every argument of a release-side local tuple: timestamp, tx, id,
/// beneficiary, dst token, chain, amount.
type ReleaseKey = (Timestamp, TxHash, String, Address, Address, ChainId, Amount);

fn deposit_escrow_key(t: &CctxValidDeposit) -> EscrowKey {
    (
        t.orig_chain_id,
        t.orig_timestamp,
        t.orig_tx_hash,
        t.dst_chain_id,
        t.deposit_id.clone(),
        t.orig_token,
        t.dst_token,
        t.sender,
        t.beneficiary,
        t.amount,
    )
}

fn deposit_release_key(t: &CctxValidDeposit) -> ReleaseKey {
    (
        t.dst_timestamp,
        t.dst_tx_hash,
        t.deposit_id.clone(),
        t.beneficiary,
        t.dst_token,
        t.dst_chain_id,
        t.amount,
    )
}

fn withdrawal_escrow_key(t: &CctxValidWithdrawal) -> EscrowKey {
    (
        t.orig_chain_id,
        t.orig_timestamp,
        t.orig_tx_hash,
        t.dst_chain_id,
        t.withdrawal_id.clone(),
        t.orig_token,
        t.dst_token,
        t.sender,
        t.beneficiary,
        t.amount,
    )
}

fn withdrawal_release_key(t: &CctxValidWithdrawal) -> ReleaseKey {
    (
        t.dst_timestamp,
        t.dst_tx_hash,
        t.withdrawal_id.clone(),
        t.beneficiary,
        t.dst_token,
        t.dst_chain_id,
        t.amount,
    )
}

/// One local tuple reduced to what the unmatched detector reports.
struct Local {
    rule: RuleId,
    escrow: EscrowKeyOrRelease,
    chain: ChainId,
    tx: TxHash,
    id: String,
    beneficiary: Address,
    token: Address,
    amount: Amount,
}

enum EscrowKeyOrRelease {
    Escrow(EscrowKey),
    Release(ReleaseKey),
}

macro_rules! escrow_locals {
    ($rule:expr, $set:expr, $id:ident, $token:ident) => {
        $set.iter().map(|t| Local {
            rule: $rule,
            escrow: EscrowKeyOrRelease::Escrow((
                t.orig_chain_id,
                t.timestamp,
                t.tx_hash,
                t.dst_chain_id,
                t.$id.clone(),
                t.orig_token,
                t.dst_token,
                t.sender,
                t.beneficiary,
                t.amount,
            )),
            chain: t.orig_chain_id,
            tx: t.tx_hash,
            id: t.$id.clone(),
            beneficiary: t.beneficiary,
            token: t.$token,
            amount: t.amount,
        })
    };
}

macro_rules! release_locals {
    ($rule:expr, $set:expr, $id:ident) => {
        $set.iter().map(|t| Local {
            rule: $rule,
            escrow: EscrowKeyOrRelease::Release((
                t.timestamp,
                t.tx_hash,
                t.$id.clone(),
                t.beneficiary,
                t.dst_token,
                t.chain_id,
                t.amount,
            )),
            chain: t.chain_id,
            tx: t.tx_hash,
            id: t.$id.clone(),
            beneficiary: t.beneficiary,
            token: t.dst_token,
            amount: t.amount,
        })
    };
}

/// Matched/unmatched split of one local rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Accounting {
    pub total: usize,
    pub matched: usize,
    pub unmatched: usize,
}

/// Local tuples that take part in no cross-chain derivation. Escrow-side
/// leftovers are warnings; release-side leftovers (funds paid out with no
/// escrow) are critical. Also returns the per-rule accounting.
pub fn unmatched_local(out: &RuleOutputs) -> (Vec<Anomaly>, BTreeMap<RuleId, Accounting>) {
    let dep_escrow: HashSet<EscrowKey> = out.rule4.iter().map(deposit_escrow_key).collect();
    let dep_release: HashSet<ReleaseKey> = out.rule4.iter().map(deposit_release_key).collect();
    let wd_escrow: HashSet<EscrowKey> = out.rule8.iter().map(withdrawal_escrow_key).collect();
    let wd_release: HashSet<ReleaseKey> = out.rule8.iter().map(withdrawal_release_key).collect();

    let locals = escrow_locals!(
        RuleId::ScValidNativeTokenDeposit,
        out.rule1,
        deposit_id,
        orig_token
    )
    .chain(escrow_locals!(
        RuleId::ScValidErc20TokenDeposit,
        out.rule2,
        deposit_id,
        orig_token
    ))
    .chain(release_locals!(
        RuleId::TcValidErc20TokenDeposit,
        out.rule3,
        deposit_id
    ))
    .chain(escrow_locals!(
        RuleId::TcValidNativeTokenWithdrawal,
        out.rule5,
        withdrawal_id,
        orig_token
    ))
    .chain(escrow_locals!(
        RuleId::TcValidErc20TokenWithdrawal,
        out.rule6,
        withdrawal_id,
        orig_token
    ))
    .chain(release_locals!(
        RuleId::ScValidErc20TokenWithdrawal,
        out.rule7,
        withdrawal_id
    ));

    let mut anomalies = Vec::new();
    let mut accounting: BTreeMap<RuleId, Accounting> = [1u8, 2, 3, 5, 6, 7]
        .into_iter()
        .map(|n| {
            (
                RuleId::from_number(n).expect("valid rule"),
                Accounting::default(),
            )
        })
        .collect();
    for l in locals {
        let deposit = l.rule.number() <= 3;
        let (matched, side, severity) = match &l.escrow {
            EscrowKeyOrRelease::Escrow(k) => {
                let set = if deposit { &dep_escrow } else { &wd_escrow };
                (set.contains(k), "escrow", Severity::Warning)
            }
            EscrowKeyOrRelease::Release(k) => {
                let set = if deposit { &dep_release } else { &wd_release };
                (set.contains(k), "release", Severity::Critical)
            }
        };
        let acc = accounting.get_mut(&l.rule).expect("local rule");
        acc.total += 1;
        if matched {
            acc.matched += 1;
            continue;
        }
        acc.unmatched += 1;
        let kind = if deposit {
            AnomalyKind::UnmatchedLocalDeposit
        } else {
            AnomalyKind::UnmatchedLocalWithdrawal
        };
        anomalies.push(
            Anomaly::new(kind, severity)
                .chain(l.chain)
                .tx(l.tx)
                .amount(l.amount)
                .with("rule", l.rule.number())
                .with("side", side)
                .with("id", &l.id)
                .with("beneficiary", l.beneficiary)
                .with("token", l.token),
        );
    }
    (anomalies, accounting)
}

/// Escrow leg of a potential CCTX, as far as the cross-chain join sees it.
struct Leg<'a> {
    chain: ChainId,
    dst_chain: ChainId,
    timestamp: Timestamp,
    tx: TxHash,
    id: &'a str,
    beneficiary: Address,
    dst_token: Address,
    amount: Amount,
}

struct Release<'a> {
    chain: ChainId,
    timestamp: Timestamp,
    tx: TxHash,
    id: &'a str,
    beneficiary: Address,
    dst_token: Address,
    amount: Amount,
}

fn violations<'a>(
    windows: &HashMap<ChainId, u64>,
    legs: impl Iterator<Item = Leg<'a>>,
    releases: impl Iterator<Item = Release<'a>>,
    direction: &str,
    out: &mut BTreeSet<Anomaly>,
) {
    let mut by_id: HashMap<&str, Vec<Leg<'a>>> = HashMap::new();
    for leg in legs {
        by_id.entry(leg.id).or_default().push(leg);
    }
    for r in releases {
        for l in by_id.get(r.id).map(Vec::as_slice).unwrap_or(&[]) {
            if l.beneficiary != r.beneficiary
                || l.dst_token != r.dst_token
                || l.dst_chain != r.chain
                || l.amount != r.amount
            {
                continue;
            }
            // Smallest window: if even that one fails, every one fails.
            let Some(window) = windows.get(&l.chain).copied() else {
                continue;
            };
            if respects_finality(l.timestamp, window, r.timestamp) {
                continue;
            }
            let gap = i128::from(r.timestamp.0) - i128::from(l.timestamp.0);
            out.insert(
                Anomaly::new(AnomalyKind::FinalityViolation, Severity::Critical)
                    .chain(l.chain)
                    .chain(r.chain)
                    .tx(l.tx)
                    .tx(r.tx)
                    .amount(r.amount)
                    .with("direction", direction)
                    .with("id", r.id)
                    .with("gap", gap)
                    .with("window", window),
            );
        }
    }
}

/// Escrow/release pairs agreeing on every cross-chain join key whose time
/// gap does not exceed the origin chain's finality window.
pub fn finality_violations(store: &FactStore, out: &RuleOutputs) -> Vec<Anomaly> {
    let mut windows: HashMap<ChainId, u64> = HashMap::new();
    for f in store.cctx_finality.iter() {
        let w = windows.entry(f.chain_id).or_insert(f.finality_seconds);
        *w = (*w).min(f.finality_seconds);
    }
    let mut found = BTreeSet::new();

    macro_rules! leg {
        ($t:expr, $id:ident) => {
            Leg {
                chain: $t.orig_chain_id,
                dst_chain: $t.dst_chain_id,
                timestamp: $t.timestamp,
                tx: $t.tx_hash,
                id: &$t.$id,
                beneficiary: $t.beneficiary,
                dst_token: $t.dst_token,
                amount: $t.amount,
            }
        };
    }
    macro_rules! release {
        ($t:expr, $id:ident) => {
            Release {
                chain: $t.chain_id,
                timestamp: $t.timestamp,
                tx: $t.tx_hash,
                id: &$t.$id,
                beneficiary: $t.beneficiary,
                dst_token: $t.dst_token,
                amount: $t.amount,
            }
        };
    }

    violations(
        &windows,
        out.rule1
            .iter()
            .map(|t| leg!(t, deposit_id))
            .chain(out.rule2.iter().map(|t| leg!(t, deposit_id))),
        out.rule3.iter().map(|t| release!(t, deposit_id)),
        "deposit",
        &mut found,
    );
    violations(
        &windows,
        out.rule5
            .iter()
            .map(|t| leg!(t, withdrawal_id))
            .chain(out.rule6.iter().map(|t| leg!(t, withdrawal_id))),
        out.rule7.iter().map(|t| release!(t, withdrawal_id)),
        "withdrawal",
        &mut found,
    );
    found.into_iter().collect()
}

fn duplicates<'a, T: Record + 'a>(
    store: &FactStore,
    table: &'a Table<T>,
    amount: impl Fn(&T) -> Amount,
    direction: &str,
    out: &mut Vec<Anomaly>,
) {
    let mut ids: Vec<&str> = table
        .id_groups()
        .filter(|(_, n)| *n > 1)
        .map(|(id, _)| id)
        .collect();
    ids.sort_unstable();
    for id in ids {
        let rows: Vec<&T> = table.by_id(id).collect();
        let mut txs: Vec<TxHash> = rows.iter().filter_map(|r| r.tx_hash().copied()).collect();
        txs.sort_unstable();
        txs.dedup();
        let mut a = Anomaly::new(AnomalyKind::DuplicateId, Severity::Critical)
            .amount(
                rows.iter()
                    .fold(Amount::ZERO, |acc, r| acc.saturating_add(amount(r))),
            )
            .with("direction", direction)
            .with("relation", T::RELATION)
            .with("id", id)
            .with("count", rows.len());
        let mut chains: Vec<ChainId> = txs
            .iter()
            .flat_map(|tx| store.transaction.by_tx(tx).map(|t| t.chain_id))
            .collect();
        chains.sort_unstable();
        chains.dedup();
        for c in chains {
            a = a.chain(c);
        }
        for tx in txs {
            a = a.tx(tx);
        }
        out.push(a);
    }
}

/// Ids carried by more than one release-side bridge event (target-chain
/// deposit releases, source-chain withdrawal releases). `count` is the
/// number of events sharing the id.
pub fn duplicate_ids(store: &FactStore) -> Vec<Anomaly> {
    let mut out = Vec::new();
    duplicates(
        store,
        &store.tc_token_deposited,
        |r| r.amount,
        "deposit",
        &mut out,
    );
    duplicates(
        store,
        &store.sc_token_withdrew,
        |r| r.amount,
        "withdrawal",
        &mut out,
    );
    out
}

fn ambiguous<K: Ord, T>(
    set: &BTreeSet<T>,
    key: impl Fn(&T) -> K,
    describe: impl Fn(&T, usize) -> Anomaly,
    out: &mut Vec<Anomaly>,
) {
    let mut groups: BTreeMap<K, Vec<&T>> = BTreeMap::new();
    for t in set {
        groups.entry(key(t)).or_default().push(t);
    }
    for group in groups.values().filter(|g| g.len() > 1) {
        // Set order sorts by the leading fields; the first derivation is
        // taken as the legitimate one.
        for t in &group[1..] {
            out.push(describe(t, group.len()));
        }
    }
}

/// Legs taking part in more than one cross-chain derivation: one anomaly per
/// derivation beyond the earliest.
pub fn ambiguous_matches(out: &RuleOutputs) -> Vec<Anomaly> {
    let mut found = Vec::new();
    let dep = |side: &'static str| {
        move |t: &CctxValidDeposit, n: usize| {
            Anomaly::new(AnomalyKind::AmbiguousMatch, Severity::Warning)
                .chain(t.orig_chain_id)
                .chain(t.dst_chain_id)
                .tx(t.orig_tx_hash)
                .tx(t.dst_tx_hash)
                .amount(t.amount)
                .with("direction", "deposit")
                .with("side", side)
                .with("id", &t.deposit_id)
                .with("derivations", n)
        }
    };
    let wd = |side: &'static str| {
        move |t: &CctxValidWithdrawal, n: usize| {
            Anomaly::new(AnomalyKind::AmbiguousMatch, Severity::Warning)
                .chain(t.orig_chain_id)
                .chain(t.dst_chain_id)
                .tx(t.orig_tx_hash)
                .tx(t.dst_tx_hash)
                .amount(t.amount)
                .with("direction", "withdrawal")
                .with("side", side)
                .with("id", &t.withdrawal_id)
                .with("derivations", n)
        }
    };
    // rule-4/8 tuples order by (orig chain, orig ts, orig tx, dst chain, dst ts, dst tx, ...)
    ambiguous(&out.rule4, deposit_escrow_key, dep("escrow"), &mut found);
    ambiguous(&out.rule4, deposit_release_key, dep("release"), &mut found);
    ambiguous(&out.rule8, withdrawal_escrow_key, wd("escrow"), &mut found);
    ambiguous(
        &out.rule8,
        withdrawal_release_key,
        wd("release"),
        &mut found,
    );
    found
}
