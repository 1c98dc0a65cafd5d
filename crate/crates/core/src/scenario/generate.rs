//! Two-chain bridge traffic as transaction receipts.
//!
//! The bridge contracts emit five events, decoded by [`decoder_config`]:
//!
//! | chain  | event                                                           | relation              |
//! |--------|-----------------------------------------------------------------|-----------------------|
//! | source | `TokenDeposited(uint256 indexed, bytes32, address, address, uint256, bytes32, uint256)` | `sc_token_deposited` |
//! | source | `TokenWithdrawn(uint256 indexed, address indexed, address, uint256)` | `sc_token_withdrew` |
//! | source | `NativeReleased(address indexed, uint256)`                      | `sc_withdrawal`       |
//! | target | `DepositFinalized(uint256 indexed, address indexed, address, uint256)` | `tc_token_deposited` |
//! | target | `WithdrawalInitiated(uint256 indexed, bytes32, address, address, uint256, bytes32, uint256)` | `tc_token_withdrew` |
//!
//! Bridge, token and relayer addresses depend only on the chain ids, so the
//! decoder config is the same for every seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::{ChainParams, InjectionKind, ParamError, ScenarioParams};
use super::rng::SplitMix64;
use crate::analytics::AnomalyKind;
use crate::facts::{Address, Amount, ChainId, FactStore, TxHash};
use crate::ingest::{
    erc20_transfer_topic, event_topic, ingest_receipts, BridgeDecoderConfig, ChainConfig,
    ChainRole, Decoder, EventMapping, FieldKind, FieldPlan, FieldSource, HexBytes, IngestError,
    IngestReport, LogEntry, TokenMappingEntry, TransactionReceipt, Word,
};

pub const TOKEN_DEPOSITED: &str =
    "TokenDeposited(uint256,bytes32,address,address,uint256,bytes32,uint256)";
pub const TOKEN_WITHDRAWN: &str = "TokenWithdrawn(uint256,address,address,uint256)";
pub const NATIVE_RELEASED: &str = "NativeReleased(address,uint256)";
pub const DEPOSIT_FINALIZED: &str = "DepositFinalized(uint256,address,address,uint256)";
pub const WITHDRAWAL_INITIATED: &str =
    "WithdrawalInitiated(uint256,bytes32,address,address,uint256,bytes32,uint256)";

const NATIVE_STANDARD: &str = "NATIVE";
const ERC20_STANDARD: &str = "ERC20";

/// `tag · 000 · chain id (8 bytes) · 000000 · n (2 bytes)`.
fn fixed_address(tag: u8, chain: ChainId, n: u16) -> Address {
    let mut b = [0u8; 20];
    b[0] = tag;
    b[4..12].copy_from_slice(&chain.get().to_be_bytes());
    b[18..].copy_from_slice(&n.to_be_bytes());
    Address::from_bytes(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPair {
    pub source_token: Address,
    pub target_token: Address,
    pub standard: String,
}

/// Fixed contracts of the synthetic bridge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deployment {
    pub source: ChainParams,
    pub target: ChainParams,
    pub source_bridge: Address,
    pub target_bridge: Address,
    /// Sends deposit releases on the target chain.
    pub relayer: Address,
    pub pairs: Vec<TokenPair>,
}

impl Deployment {
    pub fn new(params: &ScenarioParams) -> Self {
        let (s, t) = (params.source.chain_id, params.target.chain_id);
        let pairs = (0..params.token_pairs)
            .map(|i| {
                let n = u16::try_from(i).expect("token pair count fits in u16");
                TokenPair {
                    // pair 0: source wrapped native; pair 1: target wrapped native
                    source_token: fixed_address(if i == 0 { 0x3e } else { 0x70 }, s, n),
                    target_token: fixed_address(if i == 1 { 0x3e } else { 0x70 }, t, n),
                    standard: if i < 2 {
                        NATIVE_STANDARD
                    } else {
                        ERC20_STANDARD
                    }
                    .to_owned(),
                }
            })
            .collect();
        Self {
            source: params.source,
            target: params.target,
            source_bridge: fixed_address(0xb7, s, 0),
            target_bridge: fixed_address(0xb7, t, 0),
            relayer: fixed_address(0x4e, t, 0),
            pairs,
        }
    }

    pub fn source_wrapped_native(&self) -> Address {
        self.pairs[0].source_token
    }

    pub fn target_wrapped_native(&self) -> Address {
        self.pairs[1].target_token
    }
}

fn field(source: FieldSource, kind: FieldKind) -> FieldPlan {
    FieldPlan { source, kind }
}

fn topic(index: usize, kind: FieldKind) -> FieldPlan {
    field(FieldSource::Topic { index }, kind)
}

fn data(word: usize, kind: FieldKind) -> FieldPlan {
    field(FieldSource::Data { word }, kind)
}

fn event(
    name: &str,
    signature: &str,
    chain: ChainId,
    relation: &str,
    fields: Vec<(&str, FieldPlan)>,
) -> EventMapping {
    EventMapping {
        name: name.to_owned(),
        signature: Some(signature.to_owned()),
        topic0: None,
        chain_id: Some(chain),
        relation: relation.to_owned(),
        fields: fields
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect::<BTreeMap<_, _>>(),
    }
}

/// Decoder config for the synthetic bridge.
pub fn decoder_config(d: &Deployment) -> BridgeDecoderConfig {
    use FieldKind::{Address as Addr, Bytes32Text as Text, Uint};
    let (s, t) = (d.source.chain_id, d.target.chain_id);
    BridgeDecoderConfig {
        chains: vec![
            ChainConfig {
                chain_id: s,
                role: ChainRole::Source,
                finality_seconds: d.source.finality_seconds,
                bridge_addresses: vec![d.source_bridge],
                wrapped_native_token: Some(d.source_wrapped_native()),
            },
            ChainConfig {
                chain_id: t,
                role: ChainRole::Target,
                finality_seconds: d.target.finality_seconds,
                bridge_addresses: vec![d.target_bridge],
                wrapped_native_token: Some(d.target_wrapped_native()),
            },
        ],
        token_mappings: d
            .pairs
            .iter()
            .map(|p| TokenMappingEntry {
                orig_chain_id: s,
                dst_chain_id: t,
                orig_token: p.source_token,
                dst_token: p.target_token,
                standard: p.standard.clone(),
            })
            .collect(),
        events: vec![
            event(
                "TokenDeposited",
                TOKEN_DEPOSITED,
                s,
                "sc_token_deposited",
                vec![
                    ("deposit_id", topic(1, Uint)),
                    ("beneficiary", data(0, Addr)),
                    ("dst_token", data(1, Addr)),
                    ("orig_token", data(2, Addr)),
                    ("dst_chain_id", data(3, Uint)),
                    ("standard", data(4, Text)),
                    ("amount", data(5, Uint)),
                ],
            ),
            event(
                "TokenWithdrawn",
                TOKEN_WITHDRAWN,
                s,
                "sc_token_withdrew",
                vec![
                    ("withdrawal_id", topic(1, Uint)),
                    ("beneficiary", topic(2, Addr)),
                    ("dst_token", data(0, Addr)),
                    ("amount", data(1, Uint)),
                ],
            ),
            event(
                "NativeReleased",
                NATIVE_RELEASED,
                s,
                "sc_withdrawal",
                vec![
                    ("bridge_addr", field(FieldSource::LogAddress, Addr)),
                    ("beneficiary", topic(1, Addr)),
                    ("amount", data(0, Uint)),
                ],
            ),
            event(
                "DepositFinalized",
                DEPOSIT_FINALIZED,
                t,
                "tc_token_deposited",
                vec![
                    ("deposit_id", topic(1, Uint)),
                    ("beneficiary", topic(2, Addr)),
                    ("dst_token", data(0, Addr)),
                    ("amount", data(1, Uint)),
                ],
            ),
            event(
                "WithdrawalInitiated",
                WITHDRAWAL_INITIATED,
                t,
                "tc_token_withdrew",
                vec![
                    ("withdrawal_id", topic(1, Uint)),
                    ("beneficiary", data(0, Addr)),
                    ("orig_token", data(1, Addr)),
                    ("dst_token", data(2, Addr)),
                    ("dst_chain_id", data(3, Uint)),
                    ("standard", data(4, Text)),
                    ("amount", data(5, Uint)),
                ],
            ),
        ],
    }
}

/// One injected anomaly and the detector finding it should produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub kind: InjectionKind,
    pub expected: AnomalyKind,
    /// Deposit or withdrawal id involved, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub tx_hashes: Vec<TxHash>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: ScenarioParams,
    pub labels: Vec<Label>,
}

/// A generated scenario: receipts, the config that decodes them, and labels.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub deployment: Deployment,
    pub config: BridgeDecoderConfig,
    pub receipts: Vec<TransactionReceipt>,
    pub ground_truth: GroundTruth,
}

impl Scenario {
    /// Decodes the receipts exactly as `ingest` would.
    pub fn decode(&self) -> Result<(FactStore, IngestReport), IngestError> {
        let decoder = Decoder::new(&self.config)?;
        ingest_receipts(&self.receipts, &decoder)
    }
}

fn uint(v: u64) -> Word {
    Word::from(Amount::from(v))
}

fn id_word(id: &str) -> Word {
    Word::from(id.parse::<Amount>().expect("generated ids are decimal"))
}

fn text(s: &str) -> Word {
    let mut w = [0u8; 32];
    w[..s.len()].copy_from_slice(s.as_bytes());
    Word(w)
}

struct Log {
    address: Address,
    topics: Vec<Word>,
    data: Vec<Word>,
}

fn transfer_log(token: Address, from: Address, to: Address, amount: Amount) -> Log {
    Log {
        address: token,
        topics: vec![erc20_transfer_topic(), from.into(), to.into()],
        data: vec![amount.into()],
    }
}

struct Topics {
    token_deposited: Word,
    token_withdrawn: Word,
    native_released: Word,
    deposit_finalized: Word,
    withdrawal_initiated: Word,
}

/// Per-flow values drawn from the seed stream.
struct Flow {
    id: String,
    pair: usize,
    sender: Address,
    beneficiary: Address,
    amount: Amount,
}

struct Generator<'a> {
    params: &'a ScenarioParams,
    d: Deployment,
    rng: SplitMix64,
    topics: Topics,
    receipts: Vec<TransactionReceipt>,
    horizon: u64,
}

impl Generator<'_> {
    fn address(&mut self) -> Address {
        let mut b = [0u8; 20];
        self.rng.fill(&mut b);
        Address::from_bytes(b)
    }

    fn tx_hash(&mut self) -> TxHash {
        let mut b = [0u8; 32];
        self.rng.fill(&mut b);
        TxHash::from_bytes(b)
    }

    /// Mantissa 1..=9999 times 10^(12..=17): a rough log-uniform spread.
    fn amount(&mut self) -> Amount {
        let mantissa = self.rng.range(1, 9999) as u128;
        let exp = self.rng.range(12, 17) as u32;
        Amount::from_u128(mantissa * 10u128.pow(exp))
    }

    fn flow(&mut self, id: String, pair: usize) -> Flow {
        Flow {
            id,
            pair,
            sender: self.address(),
            beneficiary: self.address(),
            amount: self.amount(),
        }
    }

    /// A block-aligned timestamp somewhere in the scenario's horizon.
    fn escrow_time(&mut self, chain: ChainParams) -> u64 {
        let blocks = (self.horizon / chain.block_time).max(1);
        self.params.start_timestamp + chain.block_time * self.rng.below(blocks)
    }

    fn valid_gap(&mut self, window: u64) -> u64 {
        self.rng.range(window + 1, window + 3600)
    }

    fn push(
        &mut self,
        chain: ChainParams,
        ts: u64,
        from: Address,
        to: Address,
        value: Amount,
        logs: Vec<Log>,
    ) -> TxHash {
        let tx_hash = self.tx_hash();
        let block_number = 1 + (ts - self.params.start_timestamp) / chain.block_time;
        let gas_used = 21_000 + 35_000 * logs.len() as u64;
        let logs = logs
            .into_iter()
            .enumerate()
            .map(|(i, l)| LogEntry {
                address: l.address,
                topics: l.topics,
                data: HexBytes::from_words(&l.data),
                log_index: i as u64,
            })
            .collect();
        self.receipts.push(TransactionReceipt {
            chain_id: chain.chain_id.get(),
            tx_hash,
            block_number,
            block_timestamp: ts,
            from,
            to: Some(to),
            value,
            status: 1,
            gas_used,
            logs,
        });
        tx_hash
    }

    fn token_deposited(&self, f: &Flow) -> Log {
        let p = &self.d.pairs[f.pair];
        Log {
            address: self.d.source_bridge,
            topics: vec![self.topics.token_deposited, id_word(&f.id)],
            data: vec![
                f.beneficiary.into(),
                p.target_token.into(),
                p.source_token.into(),
                uint(self.d.target.chain_id.get()),
                text(&p.standard),
                f.amount.into(),
            ],
        }
    }

    /// Source-chain escrow: native value for pair 0, a token transfer otherwise.
    fn deposit_escrow(&mut self, f: &Flow, ts: u64) -> TxHash {
        let bridge = self.d.source_bridge;
        let event = self.token_deposited(f);
        if f.pair == 0 {
            self.push(self.d.source, ts, f.sender, bridge, f.amount, vec![event])
        } else {
            let token = self.d.pairs[f.pair].source_token;
            let transfer = transfer_log(token, f.sender, bridge, f.amount);
            self.push(
                self.d.source,
                ts,
                f.sender,
                bridge,
                Amount::ZERO,
                vec![transfer, event],
            )
        }
    }

    /// Target-chain release of a deposit by the relayer.
    fn deposit_release(&mut self, f: &Flow, ts: u64) -> TxHash {
        let (bridge, token) = (self.d.target_bridge, self.d.pairs[f.pair].target_token);
        let logs = vec![
            transfer_log(token, bridge, f.beneficiary, f.amount),
            Log {
                address: bridge,
                topics: vec![
                    self.topics.deposit_finalized,
                    id_word(&f.id),
                    f.beneficiary.into(),
                ],
                data: vec![token.into(), f.amount.into()],
            },
        ];
        self.push(
            self.d.target,
            ts,
            self.d.relayer,
            bridge,
            Amount::ZERO,
            logs,
        )
    }

    /// Target-chain escrow: native value for pair 1, a token transfer otherwise.
    fn withdrawal_escrow(&mut self, f: &Flow, ts: u64) -> TxHash {
        let bridge = self.d.target_bridge;
        let p = &self.d.pairs[f.pair];
        let event = Log {
            address: bridge,
            topics: vec![self.topics.withdrawal_initiated, id_word(&f.id)],
            data: vec![
                f.beneficiary.into(),
                p.target_token.into(),
                p.source_token.into(),
                uint(self.d.source.chain_id.get()),
                text(&p.standard),
                f.amount.into(),
            ],
        };
        if f.pair == 1 {
            self.push(self.d.target, ts, f.sender, bridge, f.amount, vec![event])
        } else {
            let transfer = transfer_log(p.target_token, f.sender, bridge, f.amount);
            self.push(
                self.d.target,
                ts,
                f.sender,
                bridge,
                Amount::ZERO,
                vec![transfer, event],
            )
        }
    }

    /// Source-chain release claimed by the beneficiary: a native payout for
    /// pair 0, a token transfer out of the bridge otherwise.
    fn withdrawal_release(&mut self, f: &Flow, ts: u64) -> TxHash {
        let (bridge, token) = (self.d.source_bridge, self.d.pairs[f.pair].source_token);
        let payout = if f.pair == 0 {
            Log {
                address: bridge,
                topics: vec![self.topics.native_released, f.beneficiary.into()],
                data: vec![f.amount.into()],
            }
        } else {
            transfer_log(token, bridge, f.beneficiary, f.amount)
        };
        let event = Log {
            address: bridge,
            topics: vec![
                self.topics.token_withdrawn,
                id_word(&f.id),
                f.beneficiary.into(),
            ],
            data: vec![token.into(), f.amount.into()],
        };
        self.push(
            self.d.source,
            ts,
            f.beneficiary,
            bridge,
            Amount::ZERO,
            vec![payout, event],
        )
    }
}

/// Builds the scenario. Deterministic in `params`.
pub fn generate(params: &ScenarioParams) -> Result<Scenario, ParamError> {
    params.validate()?;
    let d = Deployment::new(params);
    let config = decoder_config(&d);
    let a = params.anomalies;
    let flows = params.n_deposits + params.n_withdrawals + a.total();
    let mut g = Generator {
        params,
        rng: SplitMix64::new(params.seed),
        topics: Topics {
            token_deposited: event_topic(TOKEN_DEPOSITED),
            token_withdrawn: event_topic(TOKEN_WITHDRAWN),
            native_released: event_topic(NATIVE_RELEASED),
            deposit_finalized: event_topic(DEPOSIT_FINALIZED),
            withdrawal_initiated: event_topic(WITHDRAWAL_INITIATED),
        },
        receipts: Vec::with_capacity(2 * flows),
        horizon: (flows as u64).saturating_mul(30).max(3600),
        d,
    };
    let mut labels = Vec::new();
    let pairs = params.token_pairs;

    let broken = g.rng.sample(params.n_deposits, a.finality_break);
    let mut is_broken = vec![false; params.n_deposits];
    for i in &broken {
        is_broken[*i] = true;
    }
    let (s_window, t_window) = (
        params.source.finality_seconds,
        params.target.finality_seconds,
    );
    for (i, &breaks) in is_broken.iter().enumerate() {
        let f = g.flow((i + 1).to_string(), i % pairs);
        let t0 = g.escrow_time(params.source);
        let gap = if breaks {
            g.rng.range(1, s_window - 1)
        } else {
            g.valid_gap(s_window)
        };
        let escrow = g.deposit_escrow(&f, t0);
        let release = g.deposit_release(&f, t0 + gap);
        if breaks {
            labels.push(Label {
                kind: InjectionKind::FinalityBreak,
                expected: AnomalyKind::FinalityViolation,
                id: Some(f.id.clone()),
                tx_hashes: vec![escrow, release],
            });
        }
    }

    let replayed = g.rng.sample(params.n_withdrawals, a.replayed_id);
    let mut releases_for = vec![1usize; params.n_withdrawals];
    for (j, k) in replayed.iter().zip(params.replay_counts()) {
        releases_for[*j] = k;
    }
    for (j, &count) in releases_for.iter().enumerate() {
        let f = g.flow((j + 1).to_string(), j % pairs);
        let t0 = g.escrow_time(params.target);
        let gap = g.valid_gap(t_window);
        g.withdrawal_escrow(&f, t0);
        let mut ts = t0 + gap;
        let mut txs = vec![g.withdrawal_release(&f, ts)];
        for _ in 1..count {
            ts += g.rng.range(1, 600);
            txs.push(g.withdrawal_release(&f, ts));
        }
        if txs.len() > 1 {
            labels.push(Label {
                kind: InjectionKind::ReplayedId,
                expected: AnomalyKind::DuplicateId,
                id: Some(f.id.clone()),
                tx_hashes: txs,
            });
        }
    }

    for n in 0..a.forged_release {
        let f = g.flow((params.n_withdrawals + 1 + n).to_string(), n % pairs);
        let ts = g.escrow_time(params.source);
        let tx = g.withdrawal_release(&f, ts);
        labels.push(Label {
            kind: InjectionKind::ForgedRelease,
            expected: AnomalyKind::UnmatchedLocalWithdrawal,
            id: Some(f.id),
            tx_hashes: vec![tx],
        });
    }

    for n in 0..a.direct_transfer {
        let f = g.flow(String::new(), 1 + n % (pairs - 1));
        let ts = g.escrow_time(params.source);
        let token = g.d.pairs[f.pair].source_token;
        let transfer = transfer_log(token, f.sender, g.d.source_bridge, f.amount);
        let tx = g.push(
            params.source,
            ts,
            f.sender,
            token,
            Amount::ZERO,
            vec![transfer],
        );
        labels.push(Label {
            kind: InjectionKind::DirectTransfer,
            expected: AnomalyKind::SingleTokenEvent,
            id: None,
            tx_hashes: vec![tx],
        });
    }

    for n in 0..a.orphan_bridge_event {
        let f = g.flow((params.n_deposits + 1 + n).to_string(), 1 + n % (pairs - 1));
        let ts = g.escrow_time(params.source);
        let event = g.token_deposited(&f);
        let bridge = g.d.source_bridge;
        let tx = g.push(
            params.source,
            ts,
            f.sender,
            bridge,
            Amount::ZERO,
            vec![event],
        );
        labels.push(Label {
            kind: InjectionKind::OrphanBridgeEvent,
            expected: AnomalyKind::SingleBridgeEvent,
            id: Some(f.id),
            tx_hashes: vec![tx],
        });
    }

    let mut receipts = g.receipts;
    receipts.sort_by(|x, y| {
        (x.block_timestamp, x.chain_id, x.tx_hash).cmp(&(y.block_timestamp, y.chain_id, y.tx_hash))
    });
    Ok(Scenario {
        deployment: g.d,
        config,
        receipts,
        ground_truth: GroundTruth {
            params: params.clone(),
            labels,
        },
    })
}
