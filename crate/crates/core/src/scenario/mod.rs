//! Deterministic synthetic bridge traffic with labelled anomalies.

mod describe;
mod generate;
mod params;
mod random;
mod rng;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::facts::{dump_facts_dir, FactError};
use crate::ingest::{write_receipts_jsonl, IngestError, INGEST_REPORT_FILE};

pub use describe::{describe, ExpectedCounts};
pub use generate::{
    decoder_config, generate, Deployment, GroundTruth, Label, Scenario, TokenPair,
    DEPOSIT_FINALIZED, NATIVE_RELEASED, TOKEN_DEPOSITED, TOKEN_WITHDRAWN, WITHDRAWAL_INITIATED,
};
pub use params::{
    AnomalySpec, ChainParams, InjectionKind, ParamError, ReplayShape, ScenarioParams,
};
pub use random::random_store;
pub use rng::SplitMix64;

pub const RECEIPTS_FILE: &str = "receipts.jsonl";
pub const CONFIG_FILE: &str = "decoder_config.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Facts(#[from] FactError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Output format of [`write_scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    /// `receipts.jsonl` plus the decoder config, ready for ingest.
    Receipts,
    /// `.facts` files and the ingest report, as ingest would write them.
    Facts,
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), ScenarioError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the scenario into `dir`, always including `ground_truth.json`.
pub fn write_scenario(scenario: &Scenario, dir: &Path, emit: Emit) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match emit {
        Emit::Receipts => {
            write_receipts_jsonl(&scenario.receipts, &dir.join(RECEIPTS_FILE))?;
            write_json(&scenario.config, &dir.join(CONFIG_FILE))?;
        }
        Emit::Facts => {
            let (store, report) = scenario.decode()?;
            dump_facts_dir(&store, dir)?;
            report.write_json(&dir.join(INGEST_REPORT_FILE))?;
        }
    }
    write_json(&scenario.ground_truth, &dir.join(GROUND_TRUTH_FILE))
}
