//! Fixtures for the pipeline benchmarks.

use bridgewatch_core::facts::FactStore;
use bridgewatch_core::scenario::{generate, AnomalySpec, ScenarioParams};

/// Decoded scenario with `flows` deposits and as many withdrawals, plus a
/// sprinkling of every anomaly kind.
pub fn scenario_store(seed: u64, flows: usize) -> FactStore {
    let k = (flows / 100).max(1);
    let anomalies = AnomalySpec {
        forged_release: k,
        replayed_id: k,
        finality_break: k,
        direct_transfer: k,
        orphan_bridge_event: k,
    };
    let params = ScenarioParams::new(seed, flows, flows).with_anomalies(anomalies);
    let (store, _) = generate(&params)
        .expect("valid params")
        .decode()
        .expect("generated receipts decode");
    store
}
