use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::ChainId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("malformed anomaly spec {0:?}: expected kind=count[,kind=count...]")]
    Syntax(String),
    #[error("unknown anomaly kind {0:?}")]
    UnknownKind(String),
    #[error("anomaly kind {0} given twice")]
    Repeated(InjectionKind),
    #[error("{0}")]
    Inconsistent(String),
}

/// The attack shapes the generator can inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionKind {
    /// Release on the source chain with no escrow anywhere.
    ForgedRelease,
    /// One withdrawal id released several times.
    ReplayedId,
    /// Deposit released before the source chain's finality window elapsed.
    FinalityBreak,
    /// Token transfer into a bridge with no bridge event.
    DirectTransfer,
    /// Bridge deposit event with no funds moved.
    OrphanBridgeEvent,
}

impl InjectionKind {
    pub const ALL: [InjectionKind; 5] = [
        InjectionKind::ForgedRelease,
        InjectionKind::ReplayedId,
        InjectionKind::FinalityBreak,
        InjectionKind::DirectTransfer,
        InjectionKind::OrphanBridgeEvent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InjectionKind::ForgedRelease => "forged_release",
            InjectionKind::ReplayedId => "replayed_id",
            InjectionKind::FinalityBreak => "finality_break",
            InjectionKind::DirectTransfer => "direct_transfer",
            InjectionKind::OrphanBridgeEvent => "orphan_bridge_event",
        }
    }
}

impl fmt::Display for InjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InjectionKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ParamError::UnknownKind(s.to_owned()))
    }
}

/// How many releases each replayed withdrawal id gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayShape {
    /// Every replayed id is released exactly `k` times (k ≥ 2).
    PerId(usize),
    /// `n` releases in total, spread as evenly as possible over the
    /// replayed ids; earlier ids take the remainder.
    Total(usize),
}

impl Default for ReplayShape {
    fn default() -> Self {
        ReplayShape::PerId(3)
    }
}

/// Counts per anomaly kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub forged_release: usize,
    pub replayed_id: usize,
    pub finality_break: usize,
    pub direct_transfer: usize,
    pub orphan_bridge_event: usize,
}

impl AnomalySpec {
    pub fn count(&self, kind: InjectionKind) -> usize {
        match kind {
            InjectionKind::ForgedRelease => self.forged_release,
            InjectionKind::ReplayedId => self.replayed_id,
            InjectionKind::FinalityBreak => self.finality_break,
            InjectionKind::DirectTransfer => self.direct_transfer,
            InjectionKind::OrphanBridgeEvent => self.orphan_bridge_event,
        }
    }

    pub fn set(&mut self, kind: InjectionKind, n: usize) {
        *match kind {
            InjectionKind::ForgedRelease => &mut self.forged_release,
            InjectionKind::ReplayedId => &mut self.replayed_id,
            InjectionKind::FinalityBreak => &mut self.finality_break,
            InjectionKind::DirectTransfer => &mut self.direct_transfer,
            InjectionKind::OrphanBridgeEvent => &mut self.orphan_bridge_event,
        } = n;
    }

    pub fn only(kind: InjectionKind, n: usize) -> Self {
        let mut s = Self::default();
        s.set(kind, n);
        s
    }

    pub fn total(&self) -> usize {
        InjectionKind::ALL.iter().map(|k| self.count(*k)).sum()
    }
}

/// `kind=count[,kind=count...]`; the empty string means no anomalies.
impl FromStr for AnomalySpec {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = AnomalySpec::default();
        let mut seen = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (kind, count) = item
                .split_once('=')
                .ok_or_else(|| ParamError::Syntax(s.to_owned()))?;
            let kind: InjectionKind = kind.trim().parse()?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| ParamError::Syntax(s.to_owned()))?;
            if seen.contains(&kind) {
                return Err(ParamError::Repeated(kind));
            }
            seen.push(kind);
            spec.set(kind, count);
        }
        Ok(spec)
    }
}

impl fmt::Display for AnomalySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = InjectionKind::ALL
            .iter()
            .filter(|k| self.count(**k) > 0)
            .map(|k| format!("{}={}", k, self.count(*k)))
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub chain_id: ChainId,
    pub finality_seconds: u64,
    pub block_time: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub seed: u64,
    pub n_deposits: usize,
    pub n_withdrawals: usize,
    /// Where deposits escrow and withdrawals are released.
    pub source: ChainParams,
    pub target: ChainParams,
    /// Token pairs bridged; pair 0 wraps the source native coin, pair 1 the
    /// target native coin, the rest are plain tokens. At least 2.
    pub token_pairs: usize,
    pub anomalies: AnomalySpec,
    pub replay: ReplayShape,
    /// Unix time of the first block on both chains.
    pub start_timestamp: u64,
}

impl ScenarioParams {
    pub fn new(seed: u64, n_deposits: usize, n_withdrawals: usize) -> Self {
        Self {
            seed,
            n_deposits,
            n_withdrawals,
            source: ChainParams {
                chain_id: ChainId::new(1).expect("nonzero"),
                finality_seconds: 1800,
                block_time: 12,
            },
            target: ChainParams {
                chain_id: ChainId::new(100).expect("nonzero"),
                finality_seconds: 45,
                block_time: 3,
            },
            token_pairs: 4,
            anomalies: AnomalySpec::default(),
            replay: ReplayShape::default(),
            start_timestamp: 1_700_000_000,
        }
    }

    pub fn with_anomalies(mut self, anomalies: AnomalySpec) -> Self {
        self.anomalies = anomalies;
        self
    }

    pub fn with_replay(mut self, replay: ReplayShape) -> Self {
        self.replay = replay;
        self
    }

    /// Releases per replayed id, in id order.
    pub fn replay_counts(&self) -> Vec<usize> {
        let ids = self.anomalies.replayed_id;
        match self.replay {
            ReplayShape::PerId(k) => vec![k; ids],
            ReplayShape::Total(n) => (0..ids)
                .map(|i| n / ids + usize::from(i < n % ids))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |msg: String| Err(ParamError::Inconsistent(msg));
        let a = &self.anomalies;
        if self.source.chain_id == self.target.chain_id {
            return bad("source and target chains must differ".into());
        }
        for c in [&self.source, &self.target] {
            if c.finality_seconds == 0 || c.block_time == 0 {
                return bad(format!(
                    "chain {}: finality and block time must be positive",
                    c.chain_id
                ));
            }
        }
        if self.token_pairs < 2 {
            return bad("at least two token pairs are required".into());
        }
        if a.finality_break > self.n_deposits {
            return bad(format!(
                "finality_break={} exceeds {} deposits",
                a.finality_break, self.n_deposits
            ));
        }
        if a.finality_break > 0 && self.source.finality_seconds < 2 {
            return bad(
                "finality_break needs a source finality window of at least 2 seconds".into(),
            );
        }
        if a.replayed_id > self.n_withdrawals {
            return bad(format!(
                "replayed_id={} exceeds {} withdrawals",
                a.replayed_id, self.n_withdrawals
            ));
        }
        if a.replayed_id > 0 {
            match self.replay {
                ReplayShape::PerId(k) if k < 2 => {
                    return bad("a replayed id needs at least 2 releases".into())
                }
                ReplayShape::Total(n) if n < 2 * a.replayed_id => {
                    return bad(format!("{n} releases cannot replay {} ids", a.replayed_id))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
