use serde::Serialize;

use super::abi::erc20_transfer_topic;
use super::config::{ChainRole, CompiledEvent, Decoder, FieldKind, FieldPlan, FieldSource};
use super::receipt::{LogEntry, TransactionReceipt, Word};
use super::IngestError;
use crate::facts::*;

/// Event index of a transaction's native value transfer. Logs are encoded
/// as `logIndex + 1`, so the native escrow orders before every log.
pub const NATIVE_EVENT_INDEX: u64 = 0;

pub fn log_event_index(log_index: u64) -> Option<u64> {
    log_index.checked_add(1)
}

/// A log that matched a known event but could not be turned into a fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DecodeWarning {
    pub chain_id: u64,
    pub tx_hash: TxHash,
    pub log_index: u64,
    pub event: String,
    pub reason: String,
}

/// Identity of the receipt a log belongs to.
#[derive(Debug, Clone, Copy)]
pub struct ReceiptContext<'a> {
    pub chain_id: ChainId,
    pub receipt: &'a TransactionReceipt,
}

impl ReceiptContext<'_> {
    fn warning(&self, log: &LogEntry, event: &str, reason: impl Into<String>) -> DecodeWarning {
        DecodeWarning {
            chain_id: self.chain_id.get(),
            tx_hash: self.receipt.tx_hash,
            log_index: log.log_index,
            event: event.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Decodes an ERC-20 `Transfer` log. `Ok(None)` when `topic0` is some other
/// event; `Err` when the signature matches but the layout does not.
pub fn decode_erc20_transfer(
    log: &LogEntry,
    ctx: &ReceiptContext<'_>,
) -> Result<Option<Erc20TransferFact>, DecodeWarning> {
    if log.topics.first() != Some(&erc20_transfer_topic()) {
        return Ok(None);
    }
    let warn = |reason: &str| ctx.warning(log, "Transfer", reason);
    if log.topics.len() != 3 {
        return Err(warn(&format!(
            "expected 3 topics, found {}",
            log.topics.len()
        )));
    }
    let from = Address::from_word(&log.topics[1].0)
        .ok_or_else(|| warn("`from` topic is not an address"))?;
    let to =
        Address::from_word(&log.topics[2].0).ok_or_else(|| warn("`to` topic is not an address"))?;
    if log.data.0.len() != 32 {
        return Err(warn(&format!(
            "expected 32 data bytes, found {}",
            log.data.0.len()
        )));
    }
    let amount = Amount::from_be_bytes(&log.data.word(0).expect("length checked").0);
    let event_index = log_event_index(log.log_index).ok_or_else(|| warn("log index overflow"))?;
    Ok(Some(Erc20TransferFact {
        tx_hash: ctx.receipt.tx_hash,
        chain_id: ctx.chain_id,
        event_index,
        token: log.address,
        from,
        to,
        amount,
    }))
}

fn render_word(word: &Word, kind: FieldKind) -> Result<String, String> {
    match kind {
        FieldKind::Address => Address::from_word(&word.0)
            .map(|a| a.to_string())
            .ok_or_else(|| format!("{word} is not a 20-byte address")),
        FieldKind::Uint => Ok(Amount::from_be_bytes(&word.0).to_string()),
        FieldKind::Bytes32Text => {
            let end = word.0.iter().rposition(|b| *b != 0).map_or(0, |p| p + 1);
            match std::str::from_utf8(&word.0[..end]) {
                Ok(s) if !s.contains(['\t', '\n', '\r', '\0']) => Ok(s.to_owned()),
                _ => Err(format!("{word} is not printable text")),
            }
        }
    }
}

fn extract(
    plan: &FieldPlan,
    log: &LogEntry,
    receipt: &TransactionReceipt,
) -> Result<String, String> {
    match &plan.source {
        FieldSource::Topic { index } => {
            let word = log
                .topics
                .get(*index)
                .ok_or_else(|| format!("missing topic {index}"))?;
            render_word(word, plan.kind)
        }
        FieldSource::Data { word } => {
            let w = log
                .data
                .word(*word)
                .ok_or_else(|| format!("missing data word {word}"))?;
            render_word(&w, plan.kind)
        }
        FieldSource::LogAddress => Ok(log.address.to_string()),
        FieldSource::TxFrom => Ok(receipt.from.to_string()),
        FieldSource::TxTo => Ok(receipt.to.unwrap_or(Address::ZERO).to_string()),
        FieldSource::Constant { value } => Ok(value.clone()),
    }
}

fn decode_bridge_event(
    event: &CompiledEvent,
    log: &LogEntry,
    ctx: &ReceiptContext<'_>,
) -> Result<Fact, DecodeWarning> {
    let warn = |reason: String| ctx.warning(log, &event.name, reason);
    let event_index =
        log_event_index(log.log_index).ok_or_else(|| warn("log index overflow".into()))?;
    let mut values = Vec::with_capacity(event.columns.len() + 2);
    values.push(ctx.receipt.tx_hash.to_string());
    values.push(event_index.to_string());
    for (plan, column) in event.columns.iter().zip(&event.relation.columns()[2..]) {
        let value = extract(plan, log, ctx.receipt).map_err(|e| warn(format!("{column}: {e}")))?;
        values.push(value);
    }
    let columns: Vec<&str> = values.iter().map(String::as_str).collect();
    Fact::from_row(event.relation, &columns).map_err(|e| warn(e.to_string()))
}

/// Facts and warnings produced by one receipt.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodedReceipt {
    pub facts: Vec<Fact>,
    pub warnings: Vec<DecodeWarning>,
}

/// Turns one receipt into facts: always a `transaction`, one
/// `erc20_transfer` per `Transfer` log, bridge events per the decoder
/// plans, and a native escrow when value lands on a bridge address.
pub fn decode_receipt(
    receipt: &TransactionReceipt,
    decoder: &Decoder,
) -> Result<DecodedReceipt, IngestError> {
    let chain_id =
        ChainId::new(receipt.chain_id).map_err(|_| IngestError::UnknownChain(receipt.chain_id))?;
    let chain = decoder
        .chains
        .get(&chain_id)
        .ok_or(IngestError::UnknownChain(receipt.chain_id))?;
    let status = TxStatus::from_code(receipt.status).map_err(|e| IngestError::Receipt {
        tx_hash: receipt.tx_hash,
        reason: e.to_string(),
    })?;
    let ctx = ReceiptContext { chain_id, receipt };
    let to = receipt.to.unwrap_or(Address::ZERO);

    let mut out = DecodedReceipt::default();
    out.facts.push(
        TransactionFact {
            timestamp: Timestamp(receipt.block_timestamp),
            chain_id,
            tx_hash: receipt.tx_hash,
            block_number: receipt.block_number,
            from: receipt.from,
            to,
            value: receipt.value,
            status,
            gas_used: receipt.gas_used,
        }
        .into(),
    );

    if status == TxStatus::Success && !receipt.value.is_zero() && chain.bridges.contains(&to) {
        let (tx_hash, event_index, sender, bridge_addr, amount) = (
            receipt.tx_hash,
            NATIVE_EVENT_INDEX,
            receipt.from,
            to,
            receipt.value,
        );
        out.facts.push(match chain.role {
            ChainRole::Source => ScDepositFact {
                tx_hash,
                event_index,
                sender,
                bridge_addr,
                amount,
            }
            .into(),
            ChainRole::Target => TcWithdrawalFact {
                tx_hash,
                event_index,
                sender,
                bridge_addr,
                amount,
            }
            .into(),
        });
    }

    for log in &receipt.logs {
        match decode_erc20_transfer(log, &ctx) {
            Ok(Some(fact)) => {
                out.facts.push(fact.into());
                continue;
            }
            Ok(None) => {}
            Err(w) => {
                out.warnings.push(w);
                continue;
            }
        }
        let Some(candidates) = log.topics.first().and_then(|t| decoder.events.get(t)) else {
            continue;
        };
        if !chain.bridges.contains(&log.address) {
            continue;
        }
        for event in candidates
            .iter()
            .filter(|e| e.chain_id.is_none_or(|c| c == chain_id))
        {
            match decode_bridge_event(event, log, &ctx) {
                Ok(fact) => out.facts.push(fact),
                Err(w) => out.warnings.push(w),
            }
        }
    }
    Ok(out)
}
