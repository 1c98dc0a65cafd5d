//! The thirteen fact relations.
//!
//! Field order of every struct is the column order of its `.facts` file.

use std::fmt;

use super::types::{Address, Amount, ChainId, Column, EncodingError, Timestamp, TxHash, TxStatus};
use super::FactError;

/// Shared behaviour of every fact relation.
pub trait Record: Sized + Clone + Eq + std::hash::Hash {
    const RELATION: Relation;
    const COLUMNS: &'static [&'static str];

    fn from_row(columns: &[&str]) -> Result<Self, FactError>;

    /// Appends the tab-separated row (no trailing newline).
    fn write_row(&self, out: &mut String);

    /// Transaction the fact belongs to, for event-bearing relations.
    fn tx_hash(&self) -> Option<&TxHash> {
        None
    }

    /// Bridge-assigned deposit or withdrawal id, where the relation has one.
    fn bridge_id(&self) -> Option<&str> {
        None
    }

    fn to_row_string(&self) -> String {
        let mut out = String::new();
        self.write_row(&mut out);
        out
    }
}

fn field<T: Column>(relation: Relation, field: &'static str, text: &str) -> Result<T, FactError> {
    T::decode(text).map_err(|source: EncodingError| FactError::Field {
        relation: relation.name(),
        field,
        source,
    })
}

macro_rules! relations {
    ($(
        $(#[$meta:meta])*
        $name:ident => $rel:literal $(, tx = $tx:ident)? $(, id = $id:ident)? {
            $($field:ident : $ty:ty),+ $(,)?
        }
    )+) => {
        /// Relation names, in canonical order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Relation {
            $($name),+
        }

        impl Relation {
            pub const ALL: &'static [Relation] = &[$(Relation::$name),+];

            /// File stem and Datalog predicate name.
            pub fn name(self) -> &'static str {
                match self {
                    $(Relation::$name => $rel),+
                }
            }

            pub fn columns(self) -> &'static [&'static str] {
                match self {
                    $(Relation::$name => <$name as Record>::COLUMNS),+
                }
            }

            pub fn arity(self) -> usize {
                self.columns().len()
            }

            pub fn from_name(name: &str) -> Option<Relation> {
                match name {
                    $($rel => Some(Relation::$name),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for Relation {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        /// A fact of any relation.
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub enum Fact {
            $($name($name)),+
        }

        impl Fact {
            pub fn relation(&self) -> Relation {
                match self {
                    $(Fact::$name(_) => Relation::$name),+
                }
            }

            pub fn tx_hash(&self) -> Option<&TxHash> {
                match self {
                    $(Fact::$name(f) => f.tx_hash()),+
                }
            }

            pub fn write_row(&self, out: &mut String) {
                match self {
                    $(Fact::$name(f) => f.write_row(out)),+
                }
            }

            /// Parses one row of `relation`.
            pub fn from_row(relation: Relation, columns: &[&str]) -> Result<Fact, FactError> {
                match relation {
                    $(Relation::$name => $name::from_row(columns).map(Fact::$name)),+
                }
            }
        }

        $(
            $(#[$meta])*
            #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
            pub struct $name {
                $(pub $field: $ty),+
            }

            impl From<$name> for Fact {
                fn from(fact: $name) -> Fact {
                    Fact::$name(fact)
                }
            }

            impl Record for $name {
                const RELATION: Relation = Relation::$name;
                const COLUMNS: &'static [&'static str] = &[$(stringify!($field)),+];

                fn from_row(columns: &[&str]) -> Result<Self, FactError> {
                    let expected = Self::COLUMNS.len();
                    if columns.len() != expected {
                        return Err(FactError::Arity {
                            relation: $rel,
                            expected,
                            found: columns.len(),
                        });
                    }
                    let mut it = columns.iter();
                    Ok(Self {
                        $($field: field::<$ty>(Relation::$name, stringify!($field), it.next().unwrap())?),+
                    })
                }

                fn write_row(&self, out: &mut String) {
                    let mut first = true;
                    $(
                        if !first {
                            out.push('\t');
                        }
                        first = false;
                        Column::encode(&self.$field, out);
                    )+
                    let _ = first;
                }

                $(fn tx_hash(&self) -> Option<&TxHash> {
                    Some(&self.$tx)
                })?

                $(fn bridge_id(&self) -> Option<&str> {
                    Some(&self.$id)
                })?
            }
        )+
    };
}

relations! {
    /// A mined transaction. Block number, `to` and gas used are carried but
    /// never constrained by any rule.
    TransactionFact => "transaction", tx = tx_hash {
        timestamp: Timestamp,
        chain_id: ChainId,
        tx_hash: TxHash,
        block_number: u64,
        from: Address,
        to: Address,
        value: Amount,
        status: TxStatus,
        gas_used: u64,
    }

    /// ERC-20 `Transfer` log.
    Erc20TransferFact => "erc20_transfer", tx = tx_hash {
        tx_hash: TxHash,
        chain_id: ChainId,
        event_index: u64,
        token: Address,
        from: Address,
        to: Address,
        amount: Amount,
    }

    /// Native value escrowed into a bridge on the source chain.
    ScDepositFact => "sc_deposit", tx = tx_hash {
        tx_hash: TxHash,
        event_index: u64,
        sender: Address,
        bridge_addr: Address,
        amount: Amount,
    }

    /// Bridge deposit event on the source chain.
    ScTokenDepositedFact => "sc_token_deposited", tx = tx_hash, id = deposit_id {
        tx_hash: TxHash,
        event_index: u64,
        deposit_id: String,
        beneficiary: Address,
        dst_token: Address,
        orig_token: Address,
        dst_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Bridge deposit-release event on the target chain.
    TcTokenDepositedFact => "tc_token_deposited", tx = tx_hash, id = deposit_id {
        tx_hash: TxHash,
        event_index: u64,
        deposit_id: String,
        beneficiary: Address,
        dst_token: Address,
        amount: Amount,
    }

    /// Native value escrowed into a bridge on the target chain.
    TcWithdrawalFact => "tc_withdrawal", tx = tx_hash {
        tx_hash: TxHash,
        event_index: u64,
        sender: Address,
        bridge_addr: Address,
        amount: Amount,
    }

    /// Bridge withdrawal event on the target chain.
    TcTokenWithdrewFact => "tc_token_withdrew", tx = tx_hash, id = withdrawal_id {
        tx_hash: TxHash,
        event_index: u64,
        withdrawal_id: String,
        beneficiary: Address,
        orig_token: Address,
        dst_token: Address,
        dst_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Native value released by a bridge on the source chain.
    ScWithdrawalFact => "sc_withdrawal", tx = tx_hash {
        tx_hash: TxHash,
        event_index: u64,
        bridge_addr: Address,
        beneficiary: Address,
        amount: Amount,
    }

    /// Bridge withdrawal-release event on the source chain.
    ScTokenWithdrewFact => "sc_token_withdrew", tx = tx_hash, id = withdrawal_id {
        tx_hash: TxHash,
        event_index: u64,
        withdrawal_id: String,
        beneficiary: Address,
        dst_token: Address,
        amount: Amount,
    }

    BridgeControlledAddressFact => "bridge_controlled_address" {
        chain_id: ChainId,
        address: Address,
    }

    /// Token pairing, always stated in the deposit direction.
    TokenMappingFact => "token_mapping" {
        orig_chain_id: ChainId,
        dst_chain_id: ChainId,
        orig_token: Address,
        dst_token: Address,
        standard: String,
    }

    WrappedNativeTokenFact => "wrapped_native_token" {
        chain_id: ChainId,
        token: Address,
    }

    /// Seconds that must elapse after a transaction on `chain_id` before
    /// its counterpart on another chain is legitimate.
    CctxFinalityFact => "cctx_finality" {
        chain_id: ChainId,
        finality_seconds: u64,
    }
}
