//! Deviation taxonomy, matched/unmatched accounting and latency statistics.

mod anomaly;
mod detect;
mod latency;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use anomaly::*;
pub use detect::*;
pub use latency::*;
pub use report::*;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Facts(#[from] crate::facts::FactError),
    #[error(transparent)]
    Rules(#[from] crate::rules::RuleError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
