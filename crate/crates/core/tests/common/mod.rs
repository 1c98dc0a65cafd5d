//! Hand-built stores shared by the integration tests.
#![allow(dead_code)]

use bridgewatch_core::facts::*;

pub const S: u64 = 1;
pub const T: u64 = 100;

pub fn chain(id: u64) -> ChainId {
    ChainId::new(id).unwrap()
}

/// Readable stand-in addresses: `addr(0xb1)` is `0x00…00b1`.
pub fn addr(tag: u16) -> Address {
    let mut b = [0u8; 20];
    b[18..].copy_from_slice(&tag.to_be_bytes());
    Address::from_bytes(b)
}

pub fn hash(tag: u8) -> TxHash {
    let mut b = [0u8; 32];
    b[31] = tag;
    TxHash::from_bytes(b)
}

pub fn amt(v: u64) -> Amount {
    Amount::from(v)
}

pub const U1: u16 = 0x01;
pub const U2: u16 = 0x02;
pub const B1: u16 = 0xb1;
pub const B2: u16 = 0xb2;
pub const AA: u16 = 0xaa;
pub const BB: u16 = 0xbb;
pub const CC: u16 = 0xcc;
pub const DD: u16 = 0xdd;

pub fn tx(ts: u64, chain_id: u64, h: u8, from: u16, value: u64, ok: bool) -> TransactionFact {
    TransactionFact {
        timestamp: Timestamp(ts),
        chain_id: chain(chain_id),
        tx_hash: hash(h),
        block_number: ts / 12,
        from: addr(from),
        to: addr(0xee),
        value: amt(value),
        status: if ok {
            TxStatus::Success
        } else {
            TxStatus::Reverted
        },
        gas_used: 21_000,
    }
}

/// Chains, bridges and finality windows common to both fixtures.
pub fn statics(store: &mut FactStore) {
    store.insert(CctxFinalityFact {
        chain_id: chain(S),
        finality_seconds: 1800,
    });
    store.insert(CctxFinalityFact {
        chain_id: chain(T),
        finality_seconds: 45,
    });
    store.insert(BridgeControlledAddressFact {
        chain_id: chain(S),
        address: addr(B1),
    });
    store.insert(BridgeControlledAddressFact {
        chain_id: chain(T),
        address: addr(B2),
    });
}

/// Deposit fixture: native escrow of 5 on chain 1 at ts 1000, release of
/// token cc on chain 100 at `release_ts`.
pub struct F1 {
    pub escrow_tx: TransactionFact,
    pub native: ScDepositFact,
    pub bridge: ScTokenDepositedFact,
    pub release_tx: TransactionFact,
    pub transfer: Erc20TransferFact,
    pub release: TcTokenDepositedFact,
}

impl F1 {
    pub fn new(release_ts: u64) -> Self {
        Self {
            escrow_tx: tx(1000, S, 0x01, U1, 5, true),
            native: ScDepositFact {
                tx_hash: hash(0x01),
                event_index: 0,
                sender: addr(U1),
                bridge_addr: addr(B1),
                amount: amt(5),
            },
            bridge: ScTokenDepositedFact {
                tx_hash: hash(0x01),
                event_index: 1,
                deposit_id: "7".into(),
                beneficiary: addr(U2),
                dst_token: addr(CC),
                orig_token: addr(AA),
                dst_chain_id: chain(T),
                standard: "ERC20".into(),
                amount: amt(5),
            },
            release_tx: tx(release_ts, T, 0x02, 0x99, 0, true),
            transfer: Erc20TransferFact {
                tx_hash: hash(0x02),
                chain_id: chain(T),
                event_index: 0,
                token: addr(CC),
                from: addr(B2),
                to: addr(U2),
                amount: amt(5),
            },
            release: TcTokenDepositedFact {
                tx_hash: hash(0x02),
                event_index: 1,
                deposit_id: "7".into(),
                beneficiary: addr(U2),
                dst_token: addr(CC),
                amount: amt(5),
            },
        }
    }

    pub fn insert_static(store: &mut FactStore) {
        store.insert(WrappedNativeTokenFact {
            chain_id: chain(S),
            token: addr(AA),
        });
        store.insert(TokenMappingFact {
            orig_chain_id: chain(S),
            dst_chain_id: chain(T),
            orig_token: addr(AA),
            dst_token: addr(CC),
            standard: "ERC20".into(),
        });
    }

    pub fn insert_escrow(&self, store: &mut FactStore) {
        store.insert(self.escrow_tx.clone());
        store.insert(self.native.clone());
        store.insert(self.bridge.clone());
    }

    pub fn insert_release(&self, store: &mut FactStore) {
        store.insert(self.release_tx.clone());
        store.insert(self.transfer.clone());
        store.insert(self.release.clone());
    }

    pub fn store(&self) -> FactStore {
        let mut s = FactStore::new();
        statics(&mut s);
        Self::insert_static(&mut s);
        self.insert_escrow(&mut s);
        self.insert_release(&mut s);
        s
    }
}

impl Default for F1 {
    fn default() -> Self {
        Self::new(2900)
    }
}

/// Withdrawal fixture: native escrow of 5 on chain 100 at ts 5000 (wrapped
/// native dd there), release on chain 1 at `release_ts` via the bridge's
/// native payout.
pub struct F2 {
    pub escrow_tx: TransactionFact,
    pub native: TcWithdrawalFact,
    pub bridge: TcTokenWithdrewFact,
    pub release_tx: TransactionFact,
    pub payout: ScWithdrawalFact,
    pub release: ScTokenWithdrewFact,
}

impl F2 {
    pub fn new(release_ts: u64) -> Self {
        Self {
            escrow_tx: tx(5000, T, 0x03, U2, 5, true),
            native: TcWithdrawalFact {
                tx_hash: hash(0x03),
                event_index: 0,
                sender: addr(U2),
                bridge_addr: addr(B2),
                amount: amt(5),
            },
            bridge: TcTokenWithdrewFact {
                tx_hash: hash(0x03),
                event_index: 1,
                withdrawal_id: "9".into(),
                beneficiary: addr(U1),
                orig_token: addr(DD),
                dst_token: addr(BB),
                dst_chain_id: chain(S),
                standard: "ERC20".into(),
                amount: amt(5),
            },
            release_tx: tx(release_ts, S, 0x04, 0x98, 0, true),
            payout: ScWithdrawalFact {
                tx_hash: hash(0x04),
                event_index: 0,
                bridge_addr: addr(B1),
                beneficiary: addr(U1),
                amount: amt(5),
            },
            release: ScTokenWithdrewFact {
                tx_hash: hash(0x04),
                event_index: 1,
                withdrawal_id: "9".into(),
                beneficiary: addr(U1),
                dst_token: addr(BB),
                amount: amt(5),
            },
        }
    }

    pub fn insert_static(store: &mut FactStore) {
        store.insert(WrappedNativeTokenFact {
            chain_id: chain(T),
            token: addr(DD),
        });
        store.insert(TokenMappingFact {
            orig_chain_id: chain(S),
            dst_chain_id: chain(T),
            orig_token: addr(BB),
            dst_token: addr(DD),
            standard: "ERC20".into(),
        });
    }

    pub fn insert_escrow(&self, store: &mut FactStore) {
        store.insert(self.escrow_tx.clone());
        store.insert(self.native.clone());
        store.insert(self.bridge.clone());
    }

    pub fn insert_release(&self, store: &mut FactStore) {
        store.insert(self.release_tx.clone());
        store.insert(self.payout.clone());
        store.insert(self.release.clone());
    }

    pub fn store(&self) -> FactStore {
        let mut s = FactStore::new();
        statics(&mut s);
        Self::insert_static(&mut s);
        self.insert_escrow(&mut s);
        self.insert_release(&mut s);
        s
    }
}

impl Default for F2 {
    fn default() -> Self {
        Self::new(5050)
    }
}

/// F1 ∪ F2 with default timestamps.
pub fn f1_f2() -> FactStore {
    let mut s = F1::default().store();
    let f2 = F2::default();
    F2::insert_static(&mut s);
    f2.insert_escrow(&mut s);
    f2.insert_release(&mut s);
    s
}

/// Converts any store into a shuffled insertion order of its facts.
pub fn all_facts(store: &FactStore) -> Vec<Fact> {
    let mut out = Vec::new();
    for &rel in Relation::ALL.iter() {
        let text = store.sorted_rows(rel);
        for line in text {
            let cols: Vec<&str> = line.split('\t').collect();
            out.push(Fact::from_row(rel, &cols).unwrap());
        }
    }
    out
}
