use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::anomaly::{Anomaly, AnomalyKind};
use super::detect::*;
use super::latency::{latency_stats, LatencyStats, PriceTable, Transfer};
use super::AnalyticsError;
use crate::facts::{load_facts_dir, FactStore, Relation, TxHash};
use crate::ingest::{IngestReport, IngestWarning, INGEST_REPORT_FILE};
use crate::rules::{eval_all, RuleId, RuleOutputs};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub deposits: LatencyStats,
    pub withdrawals: LatencyStats,
}

/// The evaluation report. Maps are ordered, so serializing the same store
/// twice yields identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Tuples per input relation.
    pub facts: BTreeMap<String, usize>,
    /// Tuples per derived predicate.
    pub rules: BTreeMap<String, usize>,
    /// Matched/unmatched split per local predicate.
    pub accounting: BTreeMap<String, Accounting>,
    pub anomaly_counts: BTreeMap<AnomalyKind, usize>,
    pub anomalies: BTreeMap<AnomalyKind, Vec<Anomaly>>,
    pub latency: Latency,
    pub ingest_warnings: Vec<IngestWarning>,
}

impl Report {
    pub fn total_anomalies(&self) -> usize {
        self.anomaly_counts.values().sum()
    }

    pub fn count(&self, kind: AnomalyKind) -> usize {
        self.anomaly_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn rule(&self, rule: RuleId) -> usize {
        self.rules.get(rule.predicate()).copied().unwrap_or(0)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Every detector, in a fixed order.
pub fn detect_all(
    store: &FactStore,
    out: &RuleOutputs,
) -> (Vec<Anomaly>, BTreeMap<RuleId, Accounting>) {
    let ((mismatches, dups), (violations, ambiguous)) = rayon::join(
        || rayon::join(|| local_mismatches(store), || duplicate_ids(store)),
        || {
            rayon::join(
                || finality_violations(store, out),
                || ambiguous_matches(out),
            )
        },
    );
    let (mut unmatched, accounting) = unmatched_local(out);
    let too_early: HashSet<TxHash> = violations
        .iter()
        .flat_map(|a| a.tx_hashes.iter().copied())
        .collect();
    for a in &mut unmatched {
        if a.tx_hashes.iter().any(|t| too_early.contains(t)) {
            a.evidence
                .insert("finality_violation".into(), "true".into());
        }
    }
    let mut all = mismatches;
    all.extend(unmatched);
    all.extend(violations);
    all.extend(dups);
    all.extend(ambiguous);
    (all, accounting)
}

pub fn build_report(
    store: &FactStore,
    out: &RuleOutputs,
    prices: Option<&PriceTable>,
    ingest_warnings: Vec<IngestWarning>,
) -> Report {
    let (found, accounting) = detect_all(store, out);
    let mut anomalies: BTreeMap<AnomalyKind, Vec<Anomaly>> = AnomalyKind::ALL
        .into_iter()
        .map(|k| (k, Vec::new()))
        .collect();
    for a in found {
        anomalies.entry(a.kind).or_default().push(a);
    }
    for list in anomalies.values_mut() {
        list.sort();
    }
    let deposits: Vec<Transfer> = out.rule4.iter().map(Transfer::from).collect();
    let withdrawals: Vec<Transfer> = out.rule8.iter().map(Transfer::from).collect();
    let mut ingest_warnings = ingest_warnings;
    ingest_warnings.sort();
    Report {
        schema_version: SCHEMA_VERSION,
        facts: Relation::ALL
            .iter()
            .map(|r| (r.name().to_owned(), store.relation_len(*r)))
            .collect(),
        rules: RuleId::ALL
            .iter()
            .map(|r| (r.predicate().to_owned(), out.len(*r)))
            .collect(),
        accounting: accounting
            .into_iter()
            .map(|(r, a)| (r.predicate().to_owned(), a))
            .collect(),
        anomaly_counts: anomalies.iter().map(|(k, v)| (*k, v.len())).collect(),
        anomalies,
        latency: Latency {
            deposits: latency_stats(&deposits, prices),
            withdrawals: latency_stats(&withdrawals, prices),
        },
        ingest_warnings,
    }
}

/// Rules plus report in one call.
pub fn evaluate(
    store: &FactStore,
    prices: Option<&PriceTable>,
) -> Result<(RuleOutputs, Report), AnalyticsError> {
    let out = eval_all(store)?;
    let report = build_report(store, &out, prices, Vec::new());
    Ok((out, report))
}

/// Loads a `.facts` directory (and its ingest report, if any) and evaluates it.
pub fn evaluate_facts_dir(
    dir: &Path,
    prices: Option<&PriceTable>,
) -> Result<(FactStore, RuleOutputs, Report), AnalyticsError> {
    let store = load_facts_dir(dir)?;
    let out = eval_all(&store)?;
    let warnings = match read_ingest_report(dir)? {
        Some(r) => r.warnings,
        None => Vec::new(),
    };
    let report = build_report(&store, &out, prices, warnings);
    Ok((store, out, report))
}

fn read_ingest_report(dir: &Path) -> Result<Option<IngestReport>, AnalyticsError> {
    let path = dir.join(INGEST_REPORT_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|source| AnalyticsError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|source| AnalyticsError::Json { path, source })
}
