use std::collections::HashMap;

use indexmap::IndexSet;

use super::relations::*;
use super::types::{Address, ChainId, TxHash};
use super::FactError;

/// One relation: a deduplicated tuple set with secondary indexes on the
/// transaction hash and the bridge id, where the relation has them.
#[derive(Debug, Clone)]
pub struct Table<T: Record> {
    rows: IndexSet<T>,
    by_tx: HashMap<TxHash, Vec<usize>>,
    by_id: HashMap<String, Vec<usize>>,
}

impl<T: Record> Default for Table<T> {
    fn default() -> Self {
        Self {
            rows: IndexSet::new(),
            by_tx: HashMap::new(),
            by_id: HashMap::new(),
        }
    }
}

impl<T: Record> Table<T> {
    /// Returns `true` when the tuple was not already present.
    pub fn insert(&mut self, row: T) -> bool {
        let tx = row.tx_hash().copied();
        let id = row.bridge_id().map(str::to_owned);
        let (pos, fresh) = self.rows.insert_full(row);
        if fresh {
            if let Some(tx) = tx {
                self.by_tx.entry(tx).or_default().push(pos);
            }
            if let Some(id) = id {
                self.by_id.entry(id).or_default().push(pos);
            }
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &T) -> bool {
        self.rows.contains(row)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.rows.iter()
    }

    /// Rows recorded for transaction `tx`.
    pub fn by_tx<'a>(&'a self, tx: &TxHash) -> impl Iterator<Item = &'a T> + 'a {
        self.lookup(self.by_tx.get(tx))
    }

    /// Rows carrying bridge id `id`.
    pub fn by_id<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a T> + 'a {
        self.lookup(self.by_id.get(id))
    }

    /// Distinct bridge ids and the rows carrying each.
    pub fn id_groups(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.by_id
            .iter()
            .map(|(id, rows)| (id.as_str(), rows.len()))
    }

    fn lookup<'a>(&'a self, slots: Option<&'a Vec<usize>>) -> impl Iterator<Item = &'a T> + 'a {
        slots
            .into_iter()
            .flatten()
            .map(move |pos| self.rows.get_index(*pos).expect("index slot in range"))
    }

    /// Canonical rows, sorted lexicographically.
    pub fn sorted_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self.rows.iter().map(Record::to_row_string).collect();
        rows.sort_unstable();
        rows
    }
}

impl<T: Record> PartialEq for Table<T> {
    fn eq(&self, other: &Self) -> bool {
        // IndexSet equality ignores insertion order.
        self.rows == other.rows
    }
}

impl<T: Record> Eq for Table<T> {}

/// In-memory, append-only collection of all thirteen relations.
///
/// Build it single-threaded; once built it is only read, and `&FactStore`
/// can be shared across evaluator threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactStore {
    pub transaction: Table<TransactionFact>,
    pub erc20_transfer: Table<Erc20TransferFact>,
    pub sc_deposit: Table<ScDepositFact>,
    pub sc_token_deposited: Table<ScTokenDepositedFact>,
    pub tc_token_deposited: Table<TcTokenDepositedFact>,
    pub tc_withdrawal: Table<TcWithdrawalFact>,
    pub tc_token_withdrew: Table<TcTokenWithdrewFact>,
    pub sc_withdrawal: Table<ScWithdrawalFact>,
    pub sc_token_withdrew: Table<ScTokenWithdrewFact>,
    pub bridge_controlled_address: Table<BridgeControlledAddressFact>,
    pub token_mapping: Table<TokenMappingFact>,
    pub wrapped_native_token: Table<WrappedNativeTokenFact>,
    pub cctx_finality: Table<CctxFinalityFact>,
}

macro_rules! dispatch {
    ($self:ident, $relation:expr, |$table:ident| $body:expr) => {
        match $relation {
            Relation::TransactionFact => {
                let $table = &$self.transaction;
                $body
            }
            Relation::Erc20TransferFact => {
                let $table = &$self.erc20_transfer;
                $body
            }
            Relation::ScDepositFact => {
                let $table = &$self.sc_deposit;
                $body
            }
            Relation::ScTokenDepositedFact => {
                let $table = &$self.sc_token_deposited;
                $body
            }
            Relation::TcTokenDepositedFact => {
                let $table = &$self.tc_token_deposited;
                $body
            }
            Relation::TcWithdrawalFact => {
                let $table = &$self.tc_withdrawal;
                $body
            }
            Relation::TcTokenWithdrewFact => {
                let $table = &$self.tc_token_withdrew;
                $body
            }
            Relation::ScWithdrawalFact => {
                let $table = &$self.sc_withdrawal;
                $body
            }
            Relation::ScTokenWithdrewFact => {
                let $table = &$self.sc_token_withdrew;
                $body
            }
            Relation::BridgeControlledAddressFact => {
                let $table = &$self.bridge_controlled_address;
                $body
            }
            Relation::TokenMappingFact => {
                let $table = &$self.token_mapping;
                $body
            }
            Relation::WrappedNativeTokenFact => {
                let $table = &$self.wrapped_native_token;
                $body
            }
            Relation::CctxFinalityFact => {
                let $table = &$self.cctx_finality;
                $body
            }
        }
    };
}

impl FactStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a typed fact. Returns `true` if the tuple was new; identical
    /// tuples collapse.
    pub fn insert(&mut self, fact: impl Into<Fact>) -> bool {
        match fact.into() {
            Fact::TransactionFact(f) => self.transaction.insert(f),
            Fact::Erc20TransferFact(f) => self.erc20_transfer.insert(f),
            Fact::ScDepositFact(f) => self.sc_deposit.insert(f),
            Fact::ScTokenDepositedFact(f) => self.sc_token_deposited.insert(f),
            Fact::TcTokenDepositedFact(f) => self.tc_token_deposited.insert(f),
            Fact::TcWithdrawalFact(f) => self.tc_withdrawal.insert(f),
            Fact::TcTokenWithdrewFact(f) => self.tc_token_withdrew.insert(f),
            Fact::ScWithdrawalFact(f) => self.sc_withdrawal.insert(f),
            Fact::ScTokenWithdrewFact(f) => self.sc_token_withdrew.insert(f),
            Fact::BridgeControlledAddressFact(f) => self.bridge_controlled_address.insert(f),
            Fact::TokenMappingFact(f) => self.token_mapping.insert(f),
            Fact::WrappedNativeTokenFact(f) => self.wrapped_native_token.insert(f),
            Fact::CctxFinalityFact(f) => self.cctx_finality.insert(f),
        }
    }

    /// Parses and inserts one textual row of `relation`.
    pub fn insert_row(&mut self, relation: Relation, columns: &[&str]) -> Result<bool, FactError> {
        Fact::from_row(relation, columns).map(|fact| self.insert(fact))
    }

    pub fn relation_len(&self, relation: Relation) -> usize {
        dispatch!(self, relation, |t| t.len())
    }

    /// Total number of tuples across every relation.
    pub fn len(&self) -> usize {
        Relation::ALL.iter().map(|r| self.relation_len(*r)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sorted_rows(&self, relation: Relation) -> Vec<String> {
        dispatch!(self, relation, |t| t.sorted_rows())
    }

    pub fn is_bridge_controlled(&self, chain_id: ChainId, address: Address) -> bool {
        self.bridge_controlled_address
            .contains(&BridgeControlledAddressFact { chain_id, address })
    }

    pub fn is_wrapped_native(&self, chain_id: ChainId, token: Address) -> bool {
        self.wrapped_native_token
            .contains(&WrappedNativeTokenFact { chain_id, token })
    }

    pub fn has_mapping(
        &self,
        orig_chain_id: ChainId,
        dst_chain_id: ChainId,
        orig_token: Address,
        dst_token: Address,
        standard: &str,
    ) -> bool {
        self.token_mapping.contains(&TokenMappingFact {
            orig_chain_id,
            dst_chain_id,
            orig_token,
            dst_token,
            standard: standard.to_owned(),
        })
    }

    /// Finality windows declared for `chain_id` (normally exactly one).
    pub fn finality(&self, chain_id: ChainId) -> impl Iterator<Item = u64> + '_ {
        self.cctx_finality
            .iter()
            .filter(move |f| f.chain_id == chain_id)
            .map(|f| f.finality_seconds)
    }

    /// Every chain id mentioned by any fact, sorted.
    pub fn referenced_chains(&self) -> Vec<ChainId> {
        let mut chains: Vec<ChainId> = self
            .transaction
            .iter()
            .map(|f| f.chain_id)
            .chain(self.erc20_transfer.iter().map(|f| f.chain_id))
            .chain(self.sc_token_deposited.iter().map(|f| f.dst_chain_id))
            .chain(self.tc_token_withdrew.iter().map(|f| f.dst_chain_id))
            .chain(self.bridge_controlled_address.iter().map(|f| f.chain_id))
            .chain(
                self.token_mapping
                    .iter()
                    .flat_map(|f| [f.orig_chain_id, f.dst_chain_id]),
            )
            .chain(self.wrapped_native_token.iter().map(|f| f.chain_id))
            .chain(self.cctx_finality.iter().map(|f| f.chain_id))
            .collect();
        chains.sort_unstable();
        chains.dedup();
        chains
    }

    /// Referenced chains with no `cctx_finality` fact.
    pub fn chains_missing_finality(&self) -> Vec<ChainId> {
        self.referenced_chains()
            .into_iter()
            .filter(|c| self.finality(*c).next().is_none())
            .collect()
    }
}
