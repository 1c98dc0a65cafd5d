//! Latency and value statistics over matched CCTXs.

use std::collections::HashMap;
use std::path::Path;

use primitive_types::U256;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::facts::{Address, Amount, ChainId};
use crate::rules::{CctxValidDeposit, CctxValidWithdrawal};

/// One matched transfer as far as the statistics care.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub orig_chain_id: ChainId,
    pub orig_token: Address,
    pub latency: u64,
    pub amount: Amount,
}

impl From<&CctxValidDeposit> for Transfer {
    fn from(t: &CctxValidDeposit) -> Self {
        Self {
            orig_chain_id: t.orig_chain_id,
            orig_token: t.orig_token,
            latency: t.dst_timestamp.0.saturating_sub(t.orig_timestamp.0),
            amount: t.amount,
        }
    }
}

impl From<&CctxValidWithdrawal> for Transfer {
    fn from(t: &CctxValidWithdrawal) -> Self {
        Self {
            orig_chain_id: t.orig_chain_id,
            orig_token: t.orig_token,
            latency: t.dst_timestamp.0.saturating_sub(t.orig_timestamp.0),
            amount: t.amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceEntry {
    pub chain_id: ChainId,
    pub token: Address,
    pub usd: f64,
    pub decimals: u32,
}

/// Static USD prices, keyed by (chain, token). JSON: an array of
/// `{"chain_id", "token", "usd", "decimals"}` objects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceTable(HashMap<(ChainId, Address), (f64, u32)>);

impl PriceTable {
    pub fn new(entries: impl IntoIterator<Item = PriceEntry>) -> Self {
        Self(
            entries
                .into_iter()
                .map(|e| ((e.chain_id, e.token), (e.usd, e.decimals)))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, AnalyticsError> {
        let text = std::fs::read_to_string(path).map_err(|source| AnalyticsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let entries: Vec<PriceEntry> =
            serde_json::from_str(&text).map_err(|source| AnalyticsError::Json {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(Self::new(entries))
    }

    pub fn usd(&self, chain: ChainId, token: Address, amount: Amount) -> Option<f64> {
        let (price, decimals) = self.0.get(&(chain, token))?;
        Some(amount.to_f64() / 10f64.powi(*decimals as i32) * price)
    }
}

/// Stats of one direction. All `None` when `count` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: usize,
    pub min: Option<u64>,
    pub max: Option<u64>,
    /// Exact mean, rounded half-up to two decimals.
    pub avg: Option<String>,
    /// Population standard deviation, rounded to two decimals.
    pub std: Option<String>,
    /// Lower-middle element for even counts.
    pub median: Option<u64>,
    pub total_value: Amount,
    /// Only with a price table; `None` when no transfer could be priced.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_usd: Option<f64>,
    /// Transfers with no price entry. Only with a price table.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unpriced: Option<usize>,
}

fn hundredths(x: U256) -> String {
    let hundred = U256::from(100u8);
    format!("{}.{:02}", x / hundred, (x % hundred).low_u64())
}

pub fn latency_stats(transfers: &[Transfer], prices: Option<&PriceTable>) -> LatencyStats {
    let total_value = transfers
        .iter()
        .fold(Amount::ZERO, |acc, t| acc.saturating_add(t.amount));
    let (total_usd, unpriced) = match prices {
        None => (None, None),
        Some(table) => {
            let mut sum = None::<f64>;
            let mut missing = 0;
            for t in transfers {
                match table.usd(t.orig_chain_id, t.orig_token, t.amount) {
                    Some(v) => *sum.get_or_insert(0.0) += v,
                    None => missing += 1,
                }
            }
            (sum, Some(missing))
        }
    };
    let n = transfers.len();
    if n == 0 {
        return LatencyStats {
            count: 0,
            min: None,
            max: None,
            avg: None,
            std: None,
            median: None,
            total_value,
            total_usd,
            unpriced,
        };
    }
    let mut xs: Vec<u64> = transfers.iter().map(|t| t.latency).collect();
    xs.sort_unstable();
    let big_n = U256::from(n);
    let sum = xs.iter().fold(U256::zero(), |acc, x| acc + U256::from(*x));
    let sum_sq = xs
        .iter()
        .fold(U256::zero(), |acc, x| acc + U256::from(*x) * U256::from(*x));
    // round(100·sum/n) = floor((200·sum + n) / 2n)
    let avg = (U256::from(200u8) * sum + big_n) / (U256::from(2u8) * big_n);
    // 100·std = sqrt((n·Σx² − (Σx)²) / n²) · 100; take twice that, floored,
    // then halve rounding up.
    let spread = big_n * sum_sq - sum * sum;
    let twice = (U256::from(40_000u32) * spread / (big_n * big_n)).integer_sqrt();
    let std = (twice + U256::one()) / U256::from(2u8);
    LatencyStats {
        count: n,
        min: xs.first().copied(),
        max: xs.last().copied(),
        avg: Some(hundredths(avg)),
        std: Some(hundredths(std)),
        median: Some(xs[(n - 1) / 2]),
        total_value,
        total_usd,
        unpriced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn of(latencies: &[u64]) -> Vec<Transfer> {
        latencies
            .iter()
            .map(|l| Transfer {
                orig_chain_id: ChainId::new(1).unwrap(),
                orig_token: Address::ZERO,
                latency: *l,
                amount: Amount::from_u128(10),
            })
            .collect()
    }

    #[test]
    fn three_latencies() {
        let s = latency_stats(&of(&[600, 100, 200]), None);
        assert_eq!((s.min, s.max, s.median), (Some(100), Some(600), Some(200)));
        assert_eq!(s.avg.as_deref(), Some("300.00"));
        // sqrt(140000 / 3) = 216.0246...
        assert_eq!(s.std.as_deref(), Some("216.02"));
        assert_eq!(s.total_value, Amount::from_u128(30));
    }

    #[test]
    fn single_and_empty() {
        let s = latency_stats(&of(&[45]), None);
        assert_eq!((s.min, s.max, s.median), (Some(45), Some(45), Some(45)));
        assert_eq!(s.avg.as_deref(), Some("45.00"));
        assert_eq!(s.std.as_deref(), Some("0.00"));
        let e = latency_stats(&[], None);
        assert_eq!(e.count, 0);
        assert!(e.min.is_none() && e.avg.is_none() && e.median.is_none());
    }

    #[test]
    fn rounding_and_even_median() {
        // mean 1/3 → 0.33; mean 2/3 → 0.67; mean 0.5 → 0.50
        assert_eq!(
            latency_stats(&of(&[0, 0, 1]), None).avg.as_deref(),
            Some("0.33")
        );
        assert_eq!(
            latency_stats(&of(&[0, 1, 1]), None).avg.as_deref(),
            Some("0.67")
        );
        let s = latency_stats(&of(&[0, 1]), None);
        assert_eq!(s.avg.as_deref(), Some("0.50"));
        assert_eq!(s.std.as_deref(), Some("0.50"));
        assert_eq!(latency_stats(&of(&[4, 1, 3, 2]), None).median, Some(2));
    }

    #[test]
    fn usd_is_best_effort() {
        let table = PriceTable::new([PriceEntry {
            chain_id: ChainId::new(1).unwrap(),
            token: Address::ZERO,
            usd: 2.0,
            decimals: 1,
        }]);
        let s = latency_stats(&of(&[1, 2]), Some(&table));
        assert_eq!(s.total_usd, Some(4.0));
        assert_eq!(s.unpriced, Some(0));
        let empty = PriceTable::default();
        let s = latency_stats(&of(&[1]), Some(&empty));
        assert_eq!((s.total_usd, s.unpriced), (None, Some(1)));
    }
}
