//! Bridge decoder configuration.
//!
//! The JSON document (see `docs/decoder-config.md`) declares the chains, the
//! bridge contracts on each, the static facts, and one extraction plan per
//! bridge event. `Decoder::new` validates it and precomputes lookup tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::abi::event_topic;
use super::receipt::Word;
use super::IngestError;
use crate::facts::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainRole {
    /// Where deposits escrow and withdrawals are released.
    Source,
    /// Where deposits are released and withdrawals escrow.
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub chain_id: ChainId,
    pub role: ChainRole,
    pub finality_seconds: u64,
    pub bridge_addresses: Vec<Address>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrapped_native_token: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenMappingEntry {
    pub orig_chain_id: ChainId,
    pub dst_chain_id: ChainId,
    pub orig_token: Address,
    pub dst_token: Address,
    pub standard: String,
}

/// Where a column value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FieldSource {
    Topic { index: usize },
    Data { word: usize },
    LogAddress,
    TxFrom,
    TxTo,
    Constant { value: String },
}

/// How a 32-byte word is rendered into a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Right-aligned 20-byte address; nonzero padding is rejected.
    Address,
    /// Big-endian unsigned integer rendered in base 10.
    #[default]
    Uint,
    /// Right-padded ASCII text (trailing NUL bytes dropped).
    Bytes32Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPlan {
    #[serde(flatten)]
    pub source: FieldSource,
    #[serde(default, rename = "as")]
    pub kind: FieldKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventMapping {
    pub name: String,
    /// Canonical signature; hashed to obtain `topic0` unless given directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic0: Option<Word>,
    /// Only decode this event on one chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_id: Option<ChainId>,
    pub relation: String,
    /// Plans for every column except `tx_hash` and `event_index`.
    pub fields: BTreeMap<String, FieldPlan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeDecoderConfig {
    pub chains: Vec<ChainConfig>,
    #[serde(default)]
    pub token_mappings: Vec<TokenMappingEntry>,
    #[serde(default)]
    pub events: Vec<EventMapping>,
}

impl BridgeDecoderConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| IngestError::Config(format!("{}: {e}", path.display())))
    }

    /// `bridge_controlled_address`, `token_mapping`, `wrapped_native_token`
    /// and `cctx_finality` facts, in declaration order.
    pub fn static_facts(&self) -> Vec<Fact> {
        let mut facts = Vec::new();
        for chain in &self.chains {
            facts.push(
                CctxFinalityFact {
                    chain_id: chain.chain_id,
                    finality_seconds: chain.finality_seconds,
                }
                .into(),
            );
            for address in &chain.bridge_addresses {
                facts.push(
                    BridgeControlledAddressFact {
                        chain_id: chain.chain_id,
                        address: *address,
                    }
                    .into(),
                );
            }
            if let Some(token) = chain.wrapped_native_token {
                facts.push(
                    WrappedNativeTokenFact {
                        chain_id: chain.chain_id,
                        token,
                    }
                    .into(),
                );
            }
        }
        for m in &self.token_mappings {
            facts.push(
                TokenMappingFact {
                    orig_chain_id: m.orig_chain_id,
                    dst_chain_id: m.dst_chain_id,
                    orig_token: m.orig_token,
                    dst_token: m.dst_token,
                    standard: m.standard.clone(),
                }
                .into(),
            );
        }
        facts
    }
}

/// Relations a bridge event may be decoded into. All of them start with
/// `tx_hash, event_index`.
const EVENT_RELATIONS: &[Relation] = &[
    Relation::ScDepositFact,
    Relation::ScTokenDepositedFact,
    Relation::TcTokenDepositedFact,
    Relation::TcWithdrawalFact,
    Relation::TcTokenWithdrewFact,
    Relation::ScWithdrawalFact,
    Relation::ScTokenWithdrewFact,
];

#[derive(Debug, Clone)]
pub(crate) struct CompiledEvent {
    pub name: String,
    pub relation: Relation,
    pub chain_id: Option<ChainId>,
    /// One plan per column after `tx_hash, event_index`.
    pub columns: Vec<FieldPlan>,
}

#[derive(Debug, Clone)]
pub(crate) struct ChainEntry {
    pub role: ChainRole,
    pub bridges: HashSet<Address>,
}

/// Validated, lookup-ready form of a [`BridgeDecoderConfig`].
#[derive(Debug, Clone)]
pub struct Decoder {
    pub(crate) chains: HashMap<ChainId, ChainEntry>,
    pub(crate) events: HashMap<Word, Vec<CompiledEvent>>,
    static_facts: Vec<Fact>,
}

impl Decoder {
    pub fn new(config: &BridgeDecoderConfig) -> Result<Self, IngestError> {
        let bad = |msg: String| Err(IngestError::Config(msg));
        let mut chains = HashMap::new();
        for chain in &config.chains {
            if chain.finality_seconds == 0 {
                return bad(format!(
                    "chain {}: finality_seconds must be > 0",
                    chain.chain_id
                ));
            }
            let entry = ChainEntry {
                role: chain.role,
                bridges: chain.bridge_addresses.iter().copied().collect(),
            };
            if chains.insert(chain.chain_id, entry).is_some() {
                return bad(format!("chain {} declared twice", chain.chain_id));
            }
        }
        for m in &config.token_mappings {
            for c in [m.orig_chain_id, m.dst_chain_id] {
                if !chains.contains_key(&c) {
                    return bad(format!("token mapping references undeclared chain {c}"));
                }
            }
        }

        let mut events: HashMap<Word, Vec<CompiledEvent>> = HashMap::new();
        for ev in &config.events {
            let topic0 = match (&ev.signature, ev.topic0) {
                (Some(sig), None) => event_topic(sig),
                (None, Some(t)) => t,
                (Some(sig), Some(t)) if event_topic(sig) == t => t,
                (Some(_), Some(_)) => {
                    return bad(format!(
                        "event {}: topic0 does not match signature",
                        ev.name
                    ))
                }
                (None, None) => {
                    return bad(format!("event {}: needs signature or topic0", ev.name))
                }
            };
            if let Some(c) = ev.chain_id {
                if !chains.contains_key(&c) {
                    return bad(format!("event {}: undeclared chain {c}", ev.name));
                }
            }
            let relation = match Relation::from_name(&ev.relation) {
                Some(r) if EVENT_RELATIONS.contains(&r) => r,
                _ => {
                    return bad(format!(
                        "event {}: {:?} is not a bridge event relation",
                        ev.name, ev.relation
                    ))
                }
            };
            let wanted = &relation.columns()[2..];
            if let Some(extra) = ev.fields.keys().find(|k| !wanted.contains(&k.as_str())) {
                return bad(format!(
                    "event {}: unknown field {extra:?} for {}",
                    ev.name, relation
                ));
            }
            let mut columns = Vec::with_capacity(wanted.len());
            for col in wanted {
                match ev.fields.get(*col) {
                    Some(plan) => columns.push(plan.clone()),
                    None => return bad(format!("event {}: missing field {col:?}", ev.name)),
                }
            }
            events.entry(topic0).or_default().push(CompiledEvent {
                name: ev.name.clone(),
                relation,
                chain_id: ev.chain_id,
                columns,
            });
        }

        Ok(Self {
            chains,
            events,
            static_facts: config.static_facts(),
        })
    }

    pub fn static_facts(&self) -> &[Fact] {
        &self.static_facts
    }

    pub fn knows_chain(&self, chain_id: ChainId) -> bool {
        self.chains.contains_key(&chain_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(id: u64, role: ChainRole) -> ChainConfig {
        ChainConfig {
            chain_id: ChainId::new(id).unwrap(),
            role,
            finality_seconds: 10,
            bridge_addresses: vec![],
            wrapped_native_token: None,
        }
    }

    fn event(fields: &[(&str, FieldPlan)]) -> EventMapping {
        EventMapping {
            name: "E".into(),
            signature: Some("E(uint256)".into()),
            topic0: None,
            chain_id: None,
            relation: "sc_withdrawal".into(),
            fields: fields
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        }
    }

    fn plan(source: FieldSource, kind: FieldKind) -> FieldPlan {
        FieldPlan { source, kind }
    }

    #[test]
    fn rejects_incomplete_plans() {
        let cfg = BridgeDecoderConfig {
            chains: vec![chain(1, ChainRole::Source)],
            token_mappings: vec![],
            events: vec![event(&[(
                "bridge_addr",
                plan(FieldSource::LogAddress, FieldKind::Address),
            )])],
        };
        let err = Decoder::new(&cfg).unwrap_err().to_string();
        assert!(err.contains("missing field"), "{err}");
    }

    #[test]
    fn rejects_non_event_relation() {
        let mut ev = event(&[]);
        ev.relation = "transaction".into();
        let cfg = BridgeDecoderConfig {
            chains: vec![chain(1, ChainRole::Source)],
            token_mappings: vec![],
            events: vec![ev],
        };
        assert!(Decoder::new(&cfg).is_err());
    }

    #[test]
    fn mapping_chain_must_be_declared() {
        let cfg = BridgeDecoderConfig {
            chains: vec![chain(1, ChainRole::Source)],
            token_mappings: vec![TokenMappingEntry {
                orig_chain_id: ChainId::new(1).unwrap(),
                dst_chain_id: ChainId::new(2).unwrap(),
                orig_token: Address::ZERO,
                dst_token: Address::ZERO,
                standard: "ERC20".into(),
            }],
            events: vec![],
        };
        assert!(Decoder::new(&cfg).is_err());
    }

    #[test]
    fn plan_json_shape() {
        let p: FieldPlan =
            serde_json::from_str(r#"{"source":"data","word":3,"as":"address"}"#).unwrap();
        assert_eq!(p, plan(FieldSource::Data { word: 3 }, FieldKind::Address));
        let p: FieldPlan = serde_json::from_str(r#"{"source":"topic","index":1}"#).unwrap();
        assert_eq!(p.kind, FieldKind::Uint);
    }
}
