use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::facts::{Amount, ChainId, TxHash};

/// Deviation taxonomy reported by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnomalyKind {
    /// Funds moved into or out of a bridge with no bridge event in the tx.
    SingleTokenEvent,
    /// Bridge event with no matching movement of funds in the tx.
    SingleBridgeEvent,
    /// Valid local deposit leg never correlated into a CCTX.
    UnmatchedLocalDeposit,
    /// Valid local withdrawal leg never correlated into a CCTX.
    UnmatchedLocalWithdrawal,
    /// Legs agree on every key but the release came too early.
    FinalityViolation,
    /// Id released more than once.
    DuplicateId,
    /// A leg taking part in more than one CCTX.
    AmbiguousMatch,
}

impl AnomalyKind {
    pub const ALL: [AnomalyKind; 7] = [
        AnomalyKind::SingleTokenEvent,
        AnomalyKind::SingleBridgeEvent,
        AnomalyKind::UnmatchedLocalDeposit,
        AnomalyKind::UnmatchedLocalWithdrawal,
        AnomalyKind::FinalityViolation,
        AnomalyKind::DuplicateId,
        AnomalyKind::AmbiguousMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnomalyKind::SingleTokenEvent => "SingleTokenEvent",
            AnomalyKind::SingleBridgeEvent => "SingleBridgeEvent",
            AnomalyKind::UnmatchedLocalDeposit => "UnmatchedLocalDeposit",
            AnomalyKind::UnmatchedLocalWithdrawal => "UnmatchedLocalWithdrawal",
            AnomalyKind::FinalityViolation => "FinalityViolation",
            AnomalyKind::DuplicateId => "DuplicateId",
            AnomalyKind::AmbiguousMatch => "AmbiguousMatch",
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnomalyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown anomaly kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    /// May cause loss of funds.
    Critical,
}

/// One finding. Always cites at least one transaction in the store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anomaly {
    pub kind: AnomalyKind,
    pub severity: Severity,
    pub chain_ids: Vec<ChainId>,
    pub tx_hashes: Vec<TxHash>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amount: Option<Amount>,
    pub evidence: BTreeMap<String, String>,
}

impl Anomaly {
    pub fn new(kind: AnomalyKind, severity: Severity) -> Self {
        Self {
            kind,
            severity,
            chain_ids: Vec::new(),
            tx_hashes: Vec::new(),
            amount: None,
            evidence: BTreeMap::new(),
        }
    }

    pub fn chain(mut self, chain: ChainId) -> Self {
        if !self.chain_ids.contains(&chain) {
            self.chain_ids.push(chain);
        }
        self
    }

    pub fn tx(mut self, tx: TxHash) -> Self {
        if !self.tx_hashes.contains(&tx) {
            self.tx_hashes.push(tx);
        }
        self
    }

    pub fn amount(mut self, amount: Amount) -> Self {
        self.amount = Some(amount);
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.evidence.insert(key.to_owned(), value.to_string());
        self
    }
}
