//! Adversarial stores for engine/oracle comparison.
//!
//! A small generated scenario is decoded, then grown by mutation: a random
//! existing fact is copied with one column replaced by a value seen elsewhere
//! in the store (same shape) or by a nearby integer. That produces near
//! misses on every join key, shared ids, reordered events and timestamps
//! straddling finality windows.

use std::collections::HashMap;

use super::generate::generate;
use super::params::{AnomalySpec, ScenarioParams};
use super::rng::SplitMix64;
use crate::facts::{CctxFinalityFact, Fact, FactStore, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Shape {
    Address,
    Hash,
    Chain,
    Column(Relation, usize),
}

fn shape(relation: Relation, column: usize, value: &str) -> Shape {
    let name = relation.columns()[column];
    if name.contains("chain_id") {
        Shape::Chain
    } else if value.len() == 42 && value.starts_with("0x") {
        Shape::Address
    } else if value.len() == 66 && value.starts_with("0x") {
        Shape::Hash
    } else {
        Shape::Column(relation, column)
    }
}

fn rows(store: &FactStore) -> Vec<(Relation, Vec<String>)> {
    let mut out = Vec::new();
    for relation in Relation::ALL {
        for row in store.sorted_rows(*relation) {
            out.push((*relation, row.split('\t').map(str::to_owned).collect()));
        }
    }
    out
}

/// A store of roughly `n_facts` facts (never more, unless the base scenario
/// alone is larger). Every referenced chain has a finality fact.
pub fn random_store(seed: u64, n_facts: usize) -> FactStore {
    let mut rng = SplitMix64::new(seed);
    let flows = (n_facts / 14).max(2);
    let n_deposits = rng.range(1, flows as u64 - 1) as usize;
    let n_withdrawals = flows - n_deposits;
    let small = |rng: &mut SplitMix64, cap: usize| rng.range(0, cap.min(2) as u64) as usize;
    let anomalies = AnomalySpec {
        forged_release: small(&mut rng, 2),
        replayed_id: small(&mut rng, n_withdrawals),
        finality_break: small(&mut rng, n_deposits),
        direct_transfer: small(&mut rng, 2),
        orphan_bridge_event: small(&mut rng, 2),
    };
    let mut params =
        ScenarioParams::new(rng.next_u64(), n_deposits, n_withdrawals).with_anomalies(anomalies);
    params.token_pairs = rng.range(2, 4) as usize;
    // Short windows so mutated timestamps often land on both sides.
    params.source.finality_seconds = rng.range(2, 120);
    params.target.finality_seconds = rng.range(2, 60);
    let scenario = generate(&params).expect("random params are valid");
    let (mut store, _) = scenario.decode().expect("generated receipts decode");

    // Occasionally a second, looser window on one chain.
    if rng.below(2) == 0 {
        let chain = if rng.below(2) == 0 {
            params.source
        } else {
            params.target
        };
        store.insert(CctxFinalityFact {
            chain_id: chain.chain_id,
            finality_seconds: chain.finality_seconds / 2,
        });
    }

    let mut facts = rows(&store);
    let mut pools: HashMap<Shape, Vec<String>> = HashMap::new();
    for (relation, cols) in &facts {
        for (i, v) in cols.iter().enumerate() {
            pools
                .entry(shape(*relation, i, v))
                .or_default()
                .push(v.clone());
        }
    }
    let windows = [
        params.source.finality_seconds,
        params.target.finality_seconds,
    ];

    let mut attempts = 0;
    while store.len() < n_facts && attempts < 20 * n_facts {
        attempts += 1;
        let (relation, cols) = facts[rng.below(facts.len() as u64) as usize].clone();
        if matches!(
            relation,
            Relation::CctxFinalityFact | Relation::BridgeControlledAddressFact
        ) {
            continue;
        }
        let c = rng.below(cols.len() as u64) as usize;
        let s = shape(relation, c, &cols[c]);
        let replacement = match (s, cols[c].parse::<u64>()) {
            (Shape::Column(..), Ok(v)) if rng.below(3) > 0 => {
                let w = windows[rng.below(2) as usize];
                let delta = [1, w, w + 1, w.saturating_sub(1)][rng.below(4) as usize];
                if rng.below(2) == 0 {
                    v.saturating_add(delta)
                } else {
                    v.saturating_sub(delta)
                }
                .to_string()
            }
            _ => {
                let pool = &pools[&s];
                pool[rng.below(pool.len() as u64) as usize].clone()
            }
        };
        let mut new = cols.clone();
        new[c] = replacement;
        let refs: Vec<&str> = new.iter().map(String::as_str).collect();
        if let Ok(fact) = Fact::from_row(relation, &refs) {
            if store.insert(fact) {
                facts.push((relation, new));
            }
        }
    }
    store
}
