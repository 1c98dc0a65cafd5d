//! Typed fact relations, the indexed in-memory store and `.facts` persistence.

mod relations;
mod store;
mod tsv;
mod types;

use std::path::PathBuf;

use thiserror::Error;

pub use relations::*;
pub use store::{FactStore, Table};
pub use tsv::{dump_facts_dir, load_facts_dir, load_relation_text, FACTS_EXTENSION};
pub use types::{Address, Amount, ChainId, Column, EncodingError, Timestamp, TxHash, TxStatus};

#[derive(Debug, Error)]
pub enum FactError {
    #[error("{relation}.{field}: {source}")]
    Field {
        relation: &'static str,
        field: &'static str,
        #[source]
        source: EncodingError,
    },
    #[error("{relation}: expected {expected} columns, found {found}")]
    Arity {
        relation: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<FactError>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
