use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::ScenarioParams;
use crate::analytics::AnomalyKind;
use crate::rules::RuleId;

/// What the detector must report on a generated scenario, derived from the
/// parameters alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    /// Keyed by predicate name.
    pub rules: BTreeMap<String, usize>,
    /// Keyed by anomaly kind; every kind present.
    pub anomalies: BTreeMap<AnomalyKind, usize>,
    /// Source-chain releases whose withdrawal id is released more than once.
    pub replayed_releases: usize,
}

impl ExpectedCounts {
    pub fn rule(&self, rule: RuleId) -> usize {
        self.rules[rule.predicate()]
    }

    pub fn anomaly(&self, kind: AnomalyKind) -> usize {
        self.anomalies[&kind]
    }

    pub fn total_anomalies(&self) -> usize {
        self.anomalies.values().sum()
    }
}

/// `#{ i < n : i mod m = r }`.
fn residues(n: usize, m: usize, r: usize) -> usize {
    if n > r {
        (n - r - 1) / m + 1
    } else {
        0
    }
}

/// Closed-form counts. Assumes `params` validates.
///
/// Deposits on pair 0 escrow native value (rule 1), the rest tokens (rule 2);
/// withdrawals on pair 1 escrow native value (rule 5), the rest tokens
/// (rule 6). A broken-finality deposit leaves both of its legs unmatched.
/// Each replayed id adds `k - 1` releases, each of which correlates with the
/// single escrow, so the escrow is ambiguous `k - 1` times.
pub fn describe(params: &ScenarioParams) -> ExpectedCounts {
    let a = &params.anomalies;
    let (nd, nw, p) = (params.n_deposits, params.n_withdrawals, params.token_pairs);
    let replay = params.replay_counts();
    let extra: usize = replay.iter().map(|k| k - 1).sum();

    let native_deposits = residues(nd, p, 0);
    let native_withdrawals = residues(nw, p, 1);
    let rules = [
        native_deposits,
        nd - native_deposits,
        nd,
        nd - a.finality_break,
        native_withdrawals,
        nw - native_withdrawals,
        nw + extra + a.forged_release,
        nw + extra,
    ];
    let anomalies = [
        (AnomalyKind::SingleTokenEvent, a.direct_transfer),
        (AnomalyKind::SingleBridgeEvent, a.orphan_bridge_event),
        (AnomalyKind::UnmatchedLocalDeposit, 2 * a.finality_break),
        (AnomalyKind::UnmatchedLocalWithdrawal, a.forged_release),
        (AnomalyKind::FinalityViolation, a.finality_break),
        (AnomalyKind::DuplicateId, a.replayed_id),
        (AnomalyKind::AmbiguousMatch, extra),
    ];
    ExpectedCounts {
        rules: RuleId::ALL
            .iter()
            .zip(rules)
            .map(|(r, n)| (r.predicate().to_owned(), n))
            .collect(),
        anomalies: anomalies.into_iter().collect(),
        replayed_releases: replay.iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AnomalySpec, InjectionKind};

    #[test]
    fn residue_counts() {
        assert_eq!(residues(0, 4, 0), 0);
        assert_eq!(residues(1, 4, 0), 1);
        assert_eq!(residues(1, 4, 1), 0);
        assert_eq!(residues(2, 4, 1), 1);
        assert_eq!(residues(10, 4, 0), 3);
        assert_eq!(residues(10, 4, 1), 3);
        assert_eq!(residues(10, 4, 2), 2);
        for n in 0..40 {
            for m in 1..6 {
                for r in 0..m {
                    assert_eq!(residues(n, m, r), (0..n).filter(|i| i % m == r).count());
                }
            }
        }
    }

    #[test]
    fn clean_and_empty() {
        let e = describe(&ScenarioParams::new(0, 10, 5));
        assert_eq!(e.rule(RuleId::CctxValidDeposit), 10);
        assert_eq!(e.rule(RuleId::CctxValidWithdrawal), 5);
        assert_eq!(e.total_anomalies(), 0);
        let e = describe(&ScenarioParams::new(0, 0, 0));
        assert!(e.rules.values().all(|n| *n == 0));
        assert_eq!(e.total_anomalies(), 0);
    }

    #[test]
    fn replay_per_id() {
        let p = ScenarioParams::new(0, 10, 5)
            .with_anomalies(AnomalySpec::only(InjectionKind::ReplayedId, 2));
        let e = describe(&p);
        assert_eq!(e.anomaly(AnomalyKind::DuplicateId), 2);
        assert_eq!(e.rule(RuleId::ScValidErc20TokenWithdrawal), 5 + 2 * (3 - 1));
        assert_eq!(e.anomaly(AnomalyKind::AmbiguousMatch), 4);
        assert_eq!(e.replayed_releases, 6);
    }
}
