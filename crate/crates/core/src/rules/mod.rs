//! The cross-chain rules, evaluated over a [`FactStore`] with set semantics.
//!
//! Rules 1-3 cover deposits (source-chain escrow, target-chain release) and
//! rule 4 correlates them; rules 5-8 mirror that for withdrawals. The
//! program is negation-free, so outputs only grow as facts are added.

mod engine;
mod tuples;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::facts::{ChainId, FactStore, Timestamp};

pub use engine::{
    eval_rule1, eval_rule2, eval_rule3, eval_rule4, eval_rule5, eval_rule6, eval_rule7, eval_rule8,
};
pub use tuples::*;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("no cctx_finality fact for referenced chain(s): {}", join_chains(.0))]
    MissingFinality(Vec<ChainId>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn join_chains(chains: &[ChainId]) -> String {
    chains
        .iter()
        .map(ChainId::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// `orig + finality < dst`, evaluated without overflow.
pub fn respects_finality(orig: Timestamp, finality: u64, dst: Timestamp) -> bool {
    u128::from(orig.0) + u128::from(finality) < u128::from(dst.0)
}

pub(crate) fn finality_table(store: &FactStore) -> HashMap<ChainId, Vec<u64>> {
    let mut table: HashMap<ChainId, Vec<u64>> = HashMap::new();
    for f in store.cctx_finality.iter() {
        table
            .entry(f.chain_id)
            .or_default()
            .push(f.finality_seconds);
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    ScValidNativeTokenDeposit,
    ScValidErc20TokenDeposit,
    TcValidErc20TokenDeposit,
    CctxValidDeposit,
    TcValidNativeTokenWithdrawal,
    TcValidErc20TokenWithdrawal,
    ScValidErc20TokenWithdrawal,
    CctxValidWithdrawal,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::ScValidNativeTokenDeposit,
        RuleId::ScValidErc20TokenDeposit,
        RuleId::TcValidErc20TokenDeposit,
        RuleId::CctxValidDeposit,
        RuleId::TcValidNativeTokenWithdrawal,
        RuleId::TcValidErc20TokenWithdrawal,
        RuleId::ScValidErc20TokenWithdrawal,
        RuleId::CctxValidWithdrawal,
    ];

    /// 1-based rule number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<RuleId> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn predicate(self) -> &'static str {
        match self {
            RuleId::ScValidNativeTokenDeposit => ScValidNativeTokenDeposit::PREDICATE,
            RuleId::ScValidErc20TokenDeposit => ScValidErc20TokenDeposit::PREDICATE,
            RuleId::TcValidErc20TokenDeposit => TcValidErc20TokenDeposit::PREDICATE,
            RuleId::CctxValidDeposit => CctxValidDeposit::PREDICATE,
            RuleId::TcValidNativeTokenWithdrawal => TcValidNativeTokenWithdrawal::PREDICATE,
            RuleId::TcValidErc20TokenWithdrawal => TcValidErc20TokenWithdrawal::PREDICATE,
            RuleId::ScValidErc20TokenWithdrawal => ScValidErc20TokenWithdrawal::PREDICATE,
            RuleId::CctxValidWithdrawal => CctxValidWithdrawal::PREDICATE,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} ({})", self.number(), self.predicate())
    }
}

/// Output of all eight rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleOutputs {
    pub rule1: BTreeSet<ScValidNativeTokenDeposit>,
    pub rule2: BTreeSet<ScValidErc20TokenDeposit>,
    pub rule3: BTreeSet<TcValidErc20TokenDeposit>,
    pub rule4: BTreeSet<CctxValidDeposit>,
    pub rule5: BTreeSet<TcValidNativeTokenWithdrawal>,
    pub rule6: BTreeSet<TcValidErc20TokenWithdrawal>,
    pub rule7: BTreeSet<ScValidErc20TokenWithdrawal>,
    pub rule8: BTreeSet<CctxValidWithdrawal>,
}

macro_rules! per_rule {
    ($self:ident, $rule:expr, |$set:ident| $body:expr) => {
        match $rule {
            RuleId::ScValidNativeTokenDeposit => {
                let $set = &$self.rule1;
                $body
            }
            RuleId::ScValidErc20TokenDeposit => {
                let $set = &$self.rule2;
                $body
            }
            RuleId::TcValidErc20TokenDeposit => {
                let $set = &$self.rule3;
                $body
            }
            RuleId::CctxValidDeposit => {
                let $set = &$self.rule4;
                $body
            }
            RuleId::TcValidNativeTokenWithdrawal => {
                let $set = &$self.rule5;
                $body
            }
            RuleId::TcValidErc20TokenWithdrawal => {
                let $set = &$self.rule6;
                $body
            }
            RuleId::ScValidErc20TokenWithdrawal => {
                let $set = &$self.rule7;
                $body
            }
            RuleId::CctxValidWithdrawal => {
                let $set = &$self.rule8;
                $body
            }
        }
    };
}

fn rows_of<T: RuleTuple>(set: &BTreeSet<T>) -> Vec<Vec<String>> {
    set.iter().map(RuleTuple::fields).collect()
}

fn header_of<T: RuleTuple>(_: &BTreeSet<T>) -> &'static [&'static str] {
    T::FIELDS
}

impl RuleOutputs {
    pub fn len(&self, rule: RuleId) -> usize {
        per_rule!(self, rule, |s| s.len())
    }

    /// Field names of the rule's tuples.
    pub fn header(&self, rule: RuleId) -> &'static [&'static str] {
        per_rule!(self, rule, |s| header_of(s))
    }

    /// Canonical text rows, in tuple order.
    pub fn rows(&self, rule: RuleId) -> Vec<Vec<String>> {
        per_rule!(self, rule, |s| rows_of(s))
    }

    /// Writes `<Predicate>.csv` per rule: header row, comma-separated.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<(), RuleError> {
        std::fs::create_dir_all(dir).map_err(|source| RuleError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for rule in RuleId::ALL {
            let path = dir.join(format!("{}.csv", rule.predicate()));
            let csv_err = |source| RuleError::Csv {
                path: path.clone(),
                source,
            };
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(self.header(rule)).map_err(csv_err)?;
            for row in self.rows(rule) {
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush().map_err(|source| RuleError::Io {
                path: path.clone(),
                source,
            })?;
        }
        Ok(())
    }
}

/// Evaluates every rule. Local rules run in parallel, then the two
/// cross-chain rules. Fails if any referenced chain lacks a finality fact.
pub fn eval_all(store: &FactStore) -> Result<RuleOutputs, RuleError> {
    let missing = store.chains_missing_finality();
    if !missing.is_empty() {
        return Err(RuleError::MissingFinality(missing));
    }
    let ((rule1, (rule2, rule3)), (rule5, (rule6, rule7))) = rayon::join(
        || {
            rayon::join(
                || eval_rule1(store),
                || rayon::join(|| eval_rule2(store), || eval_rule3(store)),
            )
        },
        || {
            rayon::join(
                || eval_rule5(store),
                || rayon::join(|| eval_rule6(store), || eval_rule7(store)),
            )
        },
    );
    let (rule4, rule8) = rayon::join(
        || eval_rule4(store, &rule1, &rule2, &rule3),
        || eval_rule8(store, &rule5, &rule6, &rule7),
    );
    Ok(RuleOutputs {
        rule1,
        rule2,
        rule3,
        rule4,
        rule5,
        rule6,
        rule7,
        rule8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finality_is_strict() {
        assert!(!respects_finality(Timestamp(1000), 1800, Timestamp(2800)));
        assert!(respects_finality(Timestamp(1000), 1800, Timestamp(2801)));
        assert!(!respects_finality(
            Timestamp(u64::MAX),
            u64::MAX,
            Timestamp(u64::MAX)
        ));
    }

    #[test]
    fn rule_numbers() {
        for (i, r) in RuleId::ALL.iter().enumerate() {
            assert_eq!(usize::from(r.number()), i + 1);
            assert_eq!(RuleId::from_number(r.number()), Some(*r));
        }
        assert_eq!(RuleId::from_number(0), None);
        assert_eq!(RuleId::from_number(9), None);
    }
}
