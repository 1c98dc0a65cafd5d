//! Derived tuple types. Field order is the predicate's argument order.

use crate::facts::{Address, Amount, ChainId, Column, Timestamp, TxHash};

/// Shared behaviour of derived tuples.
pub trait RuleTuple: Ord + Clone {
    const PREDICATE: &'static str;
    const FIELDS: &'static [&'static str];

    /// Canonical text for each field, in argument order.
    fn fields(&self) -> Vec<String>;
}

macro_rules! tuples {
    ($(
        $(#[$meta:meta])*
        $name:ident => $pred:literal { $($field:ident : $ty:ty),+ $(,)? }
    )+) => {$(
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name {
            $(pub $field: $ty),+
        }

        impl RuleTuple for $name {
            const PREDICATE: &'static str = $pred;
            const FIELDS: &'static [&'static str] = &[$(stringify!($field)),+];

            fn fields(&self) -> Vec<String> {
                vec![$({
                    let mut s = String::new();
                    Column::encode(&self.$field, &mut s);
                    s
                }),+]
            }
        }
    )+};
}

tuples! {
    /// Rule 1: native currency escrowed on the source chain.
    ScValidNativeTokenDeposit => "SC_ValidNativeTokenDeposit" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        deposit_id: String,
        sender: Address,
        bridge_addr: Address,
        beneficiary: Address,
        dst_token: Address,
        orig_token: Address,
        orig_chain_id: ChainId,
        dst_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Rule 2: ERC-20 tokens escrowed on the source chain.
    ScValidErc20TokenDeposit => "SC_ValidERC20TokenDeposit" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        deposit_id: String,
        sender: Address,
        bridge_addr: Address,
        beneficiary: Address,
        dst_token: Address,
        orig_token: Address,
        orig_chain_id: ChainId,
        dst_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Rule 3: deposit released on the target chain.
    TcValidErc20TokenDeposit => "TC_ValidERC20TokenDeposit" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        deposit_id: String,
        beneficiary: Address,
        dst_token: Address,
        chain_id: ChainId,
        amount: Amount,
    }

    /// Rule 4: both legs of a deposit, with the finality window respected.
    CctxValidDeposit => "CCTX_ValidDeposit" {
        orig_chain_id: ChainId,
        orig_timestamp: Timestamp,
        orig_tx_hash: TxHash,
        dst_chain_id: ChainId,
        dst_timestamp: Timestamp,
        dst_tx_hash: TxHash,
        deposit_id: String,
        orig_token: Address,
        dst_token: Address,
        sender: Address,
        beneficiary: Address,
        amount: Amount,
    }

    /// Rule 5: native currency escrowed on the target chain.
    TcValidNativeTokenWithdrawal => "TC_ValidNativeTokenWithdrawal" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        withdrawal_id: String,
        sender: Address,
        bridge_addr: Address,
        beneficiary: Address,
        orig_token: Address,
        dst_token: Address,
        dst_chain_id: ChainId,
        orig_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Rule 6: ERC-20 tokens escrowed on the target chain.
    TcValidErc20TokenWithdrawal => "TC_ValidERC20TokenWithdrawal" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        withdrawal_id: String,
        sender: Address,
        bridge_addr: Address,
        beneficiary: Address,
        orig_token: Address,
        dst_token: Address,
        dst_chain_id: ChainId,
        orig_chain_id: ChainId,
        standard: String,
        amount: Amount,
    }

    /// Rule 7: withdrawal released on the source chain.
    ScValidErc20TokenWithdrawal => "SC_ValidERC20TokenWithdrawal" {
        timestamp: Timestamp,
        tx_hash: TxHash,
        withdrawal_id: String,
        beneficiary: Address,
        dst_token: Address,
        chain_id: ChainId,
        amount: Amount,
    }

    /// Rule 8: both legs of a withdrawal, with the finality window respected.
    CctxValidWithdrawal => "CCTX_ValidWithdrawal" {
        orig_chain_id: ChainId,
        orig_timestamp: Timestamp,
        orig_tx_hash: TxHash,
        dst_chain_id: ChainId,
        dst_timestamp: Timestamp,
        dst_tx_hash: TxHash,
        withdrawal_id: String,
        orig_token: Address,
        dst_token: Address,
        sender: Address,
        beneficiary: Address,
        amount: Amount,
    }
}

/// Rules 1 and 2 share a shape; rule 4 reads either through this view.
pub(crate) struct ScDepositView<'a> {
    pub timestamp: Timestamp,
    pub tx_hash: &'a TxHash,
    pub deposit_id: &'a str,
    pub sender: Address,
    pub beneficiary: Address,
    pub dst_token: Address,
    pub orig_token: Address,
    pub orig_chain_id: ChainId,
    pub dst_chain_id: ChainId,
    pub amount: Amount,
}

macro_rules! sc_view {
    ($($ty:ty),+) => {$(
        impl $ty {
            pub(crate) fn view(&self) -> ScDepositView<'_> {
                ScDepositView {
                    timestamp: self.timestamp,
                    tx_hash: &self.tx_hash,
                    deposit_id: &self.deposit_id,
                    sender: self.sender,
                    beneficiary: self.beneficiary,
                    dst_token: self.dst_token,
                    orig_token: self.orig_token,
                    orig_chain_id: self.orig_chain_id,
                    dst_chain_id: self.dst_chain_id,
                    amount: self.amount,
                }
            }
        }
    )+};
}

sc_view!(ScValidNativeTokenDeposit, ScValidErc20TokenDeposit);

/// Rules 5 and 6 share a shape; rule 8 reads either through this view.
pub(crate) struct TcWithdrawalView<'a> {
    pub timestamp: Timestamp,
    pub tx_hash: &'a TxHash,
    pub withdrawal_id: &'a str,
    pub sender: Address,
    pub beneficiary: Address,
    pub orig_token: Address,
    pub dst_token: Address,
    pub dst_chain_id: ChainId,
    pub orig_chain_id: ChainId,
    pub amount: Amount,
}

macro_rules! tc_view {
    ($($ty:ty),+) => {$(
        impl $ty {
            pub(crate) fn view(&self) -> TcWithdrawalView<'_> {
                TcWithdrawalView {
                    timestamp: self.timestamp,
                    tx_hash: &self.tx_hash,
                    withdrawal_id: &self.withdrawal_id,
                    sender: self.sender,
                    beneficiary: self.beneficiary,
                    orig_token: self.orig_token,
                    dst_token: self.dst_token,
                    dst_chain_id: self.dst_chain_id,
                    orig_chain_id: self.orig_chain_id,
                    amount: self.amount,
                }
            }
        }
    )+};
}

tc_view!(TcValidNativeTokenWithdrawal, TcValidErc20TokenWithdrawal);
