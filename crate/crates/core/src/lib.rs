pub mod analytics;
pub mod facts;
pub mod ingest;
pub mod oracle;
pub mod rules;
pub mod scenario;
