//! Receipt decoding: JSONL transaction receipts in, facts out.
//!
//! Bridge-specific knowledge lives entirely in a [`BridgeDecoderConfig`]
//! document, so supporting a new bridge means writing a config, not code.

mod abi;
mod config;
mod decode;
mod receipt;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{FactStore, Relation, TxHash};

pub use abi::{erc20_transfer_topic, event_topic, keccak256, ERC20_TRANSFER_SIGNATURE};
pub use config::{
    BridgeDecoderConfig, ChainConfig, ChainRole, Decoder, EventMapping, FieldKind, FieldPlan,
    FieldSource, TokenMappingEntry,
};
pub use decode::{
    decode_erc20_transfer, decode_receipt, log_event_index, DecodeWarning, DecodedReceipt,
    ReceiptContext, NATIVE_EVENT_INDEX,
};
pub use receipt::{HexBytes, LogEntry, TransactionReceipt, Word};

/// Written next to the `.facts` files by every ingest run.
pub const INGEST_REPORT_FILE: &str = "ingest_report.json";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}:{line}: malformed receipt: {source}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("receipt references unknown chain id {0}")]
    UnknownChain(u64),
    #[error("receipt {tx_hash}: {reason}")]
    Receipt { tx_hash: TxHash, reason: String },
    #[error("invalid decoder config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Summary of one ingest run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub receipts: usize,
    /// Tuples per relation in the resulting store (static facts included).
    pub facts: BTreeMap<String, usize>,
    pub warnings: Vec<IngestWarning>,
}

/// Serialized form of a [`DecodeWarning`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IngestWarning {
    pub chain_id: u64,
    pub tx_hash: String,
    pub log_index: u64,
    pub event: String,
    pub reason: String,
}

impl From<DecodeWarning> for IngestWarning {
    fn from(w: DecodeWarning) -> Self {
        Self {
            chain_id: w.chain_id,
            tx_hash: w.tx_hash.to_string(),
            log_index: w.log_index,
            event: w.event,
            reason: w.reason,
        }
    }
}

impl IngestReport {
    pub fn write_json(&self, path: &Path) -> Result<(), IngestError> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(path, text + "\n").map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| IngestError::Config(format!("{}: {e}", path.display())))
    }
}

/// Decodes receipts in parallel and funnels the facts into one store,
/// together with the decoder's static facts.
pub fn ingest_receipts(
    receipts: &[TransactionReceipt],
    decoder: &Decoder,
) -> Result<(FactStore, IngestReport), IngestError> {
    let decoded: Vec<DecodedReceipt> = receipts
        .par_iter()
        .map(|r| decode_receipt(r, decoder))
        .collect::<Result<_, _>>()?;

    let mut store = FactStore::new();
    for fact in decoder.static_facts() {
        store.insert(fact.clone());
    }
    let mut warnings = Vec::new();
    for d in decoded {
        for fact in d.facts {
            store.insert(fact);
        }
        warnings.extend(d.warnings.into_iter().map(IngestWarning::from));
    }
    let report = IngestReport {
        receipts: receipts.len(),
        facts: fact_counts(&store),
        warnings,
    };
    Ok((store, report))
}

pub fn fact_counts(store: &FactStore) -> BTreeMap<String, usize> {
    Relation::ALL
        .iter()
        .map(|r| (r.name().to_owned(), store.relation_len(*r)))
        .collect()
}

/// Reads one receipt per non-blank line; the first malformed line aborts.
pub fn read_receipts_jsonl(path: &Path) -> Result<Vec<TransactionReceipt>, IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut receipts = Vec::new();
    for (n, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let receipt = serde_json::from_str(&line).map_err(|source| IngestError::Json {
            path: path.to_path_buf(),
            line: n + 1,
            source,
        })?;
        receipts.push(receipt);
    }
    Ok(receipts)
}

pub fn write_receipts_jsonl(
    receipts: &[TransactionReceipt],
    path: &Path,
) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for r in receipts {
        serde_json::to_writer(&mut out, r).expect("receipt serializes");
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads receipts and a decoder config from disk and decodes everything.
pub fn ingest_jsonl(
    receipts_path: &Path,
    config_path: &Path,
) -> Result<(FactStore, IngestReport), IngestError> {
    let config = BridgeDecoderConfig::from_json_file(config_path)?;
    let decoder = Decoder::new(&config)?;
    let receipts = read_receipts_jsonl(receipts_path)?;
    ingest_receipts(&receipts, &decoder)
}
