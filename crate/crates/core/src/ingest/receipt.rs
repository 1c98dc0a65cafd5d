//! JSONL receipt schema.
//!
//! Integers are accepted as JSON numbers or `0x` hex quantities; `value` is
//! additionally accepted as a decimal string. Serialization always writes
//! numbers, and `value` as a decimal string.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::facts::{Address, Amount, EncodingError, TxHash};

/// One 32-byte ABI word (a topic or a slice of log data).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub [u8; 32]);

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Word {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Same shape as a transaction hash.
        s.parse::<TxHash>().map(|h| Word(*h.as_bytes()))
    }
}

impl From<Address> for Word {
    fn from(address: Address) -> Self {
        Word(address.to_word())
    }
}

impl From<Amount> for Word {
    fn from(amount: Amount) -> Self {
        Word(amount.to_be_bytes())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(de::Error::custom)
    }
}

/// Arbitrary-length `0x` hex blob.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct HexBytes(pub Vec<u8>);

impl HexBytes {
    pub fn word(&self, index: usize) -> Option<Word> {
        let start = index.checked_mul(32)?;
        let chunk = self.0.get(start..start + 32)?;
        let mut w = [0u8; 32];
        w.copy_from_slice(chunk);
        Some(Word(w))
    }

    pub fn from_words(words: &[Word]) -> Self {
        Self(words.iter().flat_map(|w| w.0).collect())
    }
}

impl fmt::Debug for HexBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(&self.0))
    }
}

impl Serialize for HexBytes {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("0x{}", hex::encode(&self.0)))
    }
}

impl<'de> Deserialize<'de> for HexBytes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let digits = text
            .strip_prefix("0x")
            .ok_or_else(|| de::Error::custom("hex data must be 0x-prefixed"))?;
        hex::decode(digits).map(HexBytes).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogEntry {
    pub address: Address,
    pub topics: Vec<Word>,
    #[serde(default)]
    pub data: HexBytes,
    #[serde(with = "quantity")]
    pub log_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransactionReceipt {
    #[serde(with = "quantity")]
    pub chain_id: u64,
    pub tx_hash: TxHash,
    #[serde(with = "quantity")]
    pub block_number: u64,
    #[serde(with = "quantity")]
    pub block_timestamp: u64,
    pub from: Address,
    /// `None` for contract creation.
    pub to: Option<Address>,
    #[serde(with = "value_quantity")]
    pub value: Amount,
    #[serde(with = "quantity")]
    pub status: u64,
    #[serde(with = "quantity")]
    pub gas_used: u64,
    #[serde(default)]
    pub logs: Vec<LogEntry>,
}

mod quantity {
    use super::*;

    pub fn serialize<S: Serializer>(value: &u64, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(*value)
    }

    struct QuantityVisitor;

    impl Visitor<'_> for QuantityVisitor {
        type Value = u64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an unsigned integer or 0x-prefixed hex quantity")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(|_| E::custom("negative quantity"))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
            match v.strip_prefix("0x") {
                Some(digits) if !digits.is_empty() => {
                    u64::from_str_radix(digits, 16).map_err(E::custom)
                }
                _ => Err(E::custom(format!("invalid hex quantity {v:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<u64, D::Error> {
        deserializer.deserialize_any(QuantityVisitor)
    }
}

mod value_quantity {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Amount, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    struct ValueVisitor;

    impl Visitor<'_> for ValueVisitor {
        type Value = Amount;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a decimal string, 0x hex quantity or unsigned integer")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Amount, E> {
            Ok(Amount::from(v))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Amount, E> {
            if v.starts_with("0x") {
                Amount::from_hex_quantity(v).map_err(E::custom)
            } else {
                v.parse().map_err(E::custom)
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Amount, D::Error> {
        deserializer.deserialize_any(ValueVisitor)
    }
}
