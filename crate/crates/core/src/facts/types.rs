//! Scalar column types shared by every fact relation.
//!
//! Each type has exactly one canonical text form. Parsing accepts a few
//! lenient spellings (upper-case hex, leading zeros on amounts) and always
//! re-renders canonically, so re-canonicalization is a fixed point.

use std::fmt;
use std::str::FromStr;

use primitive_types::U256;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Failure to decode a single column value.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("expected 0x-prefixed hex with {digits} digits, got {value:?}")]
    Hex { digits: usize, value: String },
    #[error("invalid 256-bit decimal amount {0:?}")]
    Amount(String),
    #[error("invalid unsigned integer {0:?}")]
    Integer(String),
    #[error("chain id must be nonzero")]
    ZeroChainId,
    #[error("status must be 0 or 1, got {0:?}")]
    Status(String),
    #[error("text value {0:?} contains a tab or line break")]
    Text(String),
}

fn decode_hex_fixed<const N: usize>(text: &str) -> Result<[u8; N], EncodingError> {
    let err = || EncodingError::Hex {
        digits: N * 2,
        value: text.to_owned(),
    };
    let digits = text.strip_prefix("0x").ok_or_else(err)?;
    if digits.len() != N * 2 {
        return Err(err());
    }
    let mut out = [0u8; N];
    hex::decode_to_slice(digits, &mut out).map_err(|_| err())?;
    Ok(out)
}

fn write_hex(f: &mut fmt::Formatter<'_>, bytes: &[u8]) -> fmt::Result {
    f.write_str("0x")?;
    for b in bytes {
        write!(f, "{b:02x}")?;
    }
    Ok(())
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Network identifier. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainId(u64);

impl ChainId {
    pub fn new(id: u64) -> Result<Self, EncodingError> {
        if id == 0 {
            Err(EncodingError::ZeroChainId)
        } else {
            Ok(Self(id))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ChainId {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(parse_u64(s)?)
    }
}

impl Serialize for ChainId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for ChainId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        ChainId::new(u64::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// 20-byte account or contract address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address([u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0; 20]);

    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Decodes an address right-aligned in a 32-byte word. Returns `None`
    /// when any of the 12 high bytes is nonzero.
    pub fn from_word(word: &[u8; 32]) -> Option<Self> {
        if word[..12].iter().any(|b| *b != 0) {
            return None;
        }
        let mut out = [0u8; 20];
        out.copy_from_slice(&word[12..]);
        Some(Self(out))
    }

    pub fn to_word(&self) -> [u8; 32] {
        let mut word = [0u8; 32];
        word[12..].copy_from_slice(&self.0);
        word
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_hex(f, &self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Address {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_hex_fixed::<20>(s).map(Self)
    }
}

string_serde!(Address);

/// 32-byte transaction hash.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TxHash([u8; 32]);

impl TxHash {
    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Display for TxHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_hex(f, &self.0)
    }
}

impl fmt::Debug for TxHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TxHash {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_hex_fixed::<32>(s).map(Self)
    }
}

string_serde!(TxHash);

/// Unsigned 256-bit token quantity, rendered in base 10.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Amount(U256);

impl Amount {
    pub const ZERO: Amount = Amount(U256::zero());

    pub fn from_u128(value: u128) -> Self {
        Self(U256::from(value))
    }

    pub fn from_be_bytes(bytes: &[u8; 32]) -> Self {
        Self(U256::from_big_endian(bytes))
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_big_endian()
    }

    /// Parses an `0x`-prefixed hexadecimal quantity (as used by JSON-RPC).
    pub fn from_hex_quantity(text: &str) -> Result<Self, EncodingError> {
        let err = || EncodingError::Amount(text.to_owned());
        let digits = text.strip_prefix("0x").ok_or_else(err)?;
        if digits.is_empty() || digits.len() > 64 || !digits.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return Err(err());
        }
        U256::from_str_radix(digits, 16)
            .map(Self)
            .map_err(|_| err())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_add(self, other: Amount) -> Option<Amount> {
        self.0.checked_add(other.0).map(Self)
    }

    pub fn saturating_add(self, other: Amount) -> Amount {
        Self(self.0.saturating_add(other.0))
    }

    /// Lossy conversion used only for USD estimates.
    pub fn to_f64(&self) -> f64 {
        self.0 .0.iter().rev().fold(0.0, |acc, limb| {
            acc * 18_446_744_073_709_551_616.0 + *limb as f64
        })
    }
}

impl From<u64> for Amount {
    fn from(value: u64) -> Self {
        Self(U256::from(value))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Amount {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(EncodingError::Amount(s.to_owned()));
        }
        U256::from_dec_str(s)
            .map(Self)
            .map_err(|_| EncodingError::Amount(s.to_owned()))
    }
}

string_serde!(Amount);

/// Unix epoch seconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Receipt status: `0` reverted, `1` success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TxStatus {
    Reverted,
    Success,
}

impl TxStatus {
    pub fn from_code(code: u64) -> Result<Self, EncodingError> {
        match code {
            0 => Ok(Self::Reverted),
            1 => Ok(Self::Success),
            other => Err(EncodingError::Status(other.to_string())),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Reverted => 0,
            Self::Success => 1,
        }
    }
}

pub(crate) fn parse_u64(s: &str) -> Result<u64, EncodingError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(EncodingError::Integer(s.to_owned()));
    }
    s.parse().map_err(|_| EncodingError::Integer(s.to_owned()))
}

/// A value that occupies one TSV column.
pub trait Column: Sized {
    fn decode(text: &str) -> Result<Self, EncodingError>;
    fn encode(&self, out: &mut String);
}

impl Column for u64 {
    fn decode(text: &str) -> Result<Self, EncodingError> {
        parse_u64(text)
    }

    fn encode(&self, out: &mut String) {
        out.push_str(&self.to_string());
    }
}

impl Column for String {
    fn decode(text: &str) -> Result<Self, EncodingError> {
        if text.contains(['\t', '\n', '\r']) {
            return Err(EncodingError::Text(text.to_owned()));
        }
        Ok(text.to_owned())
    }

    fn encode(&self, out: &mut String) {
        out.push_str(self);
    }
}

impl Column for Timestamp {
    fn decode(text: &str) -> Result<Self, EncodingError> {
        parse_u64(text).map(Timestamp)
    }

    fn encode(&self, out: &mut String) {
        self.0.encode(out);
    }
}

impl Column for TxStatus {
    fn decode(text: &str) -> Result<Self, EncodingError> {
        match text {
            "0" => Ok(Self::Reverted),
            "1" => Ok(Self::Success),
            other => Err(EncodingError::Status(other.to_owned())),
        }
    }

    fn encode(&self, out: &mut String) {
        out.push(if *self == Self::Success { '1' } else { '0' });
    }
}

macro_rules! display_column {
    ($($ty:ty),+) => {$(
        impl Column for $ty {
            fn decode(text: &str) -> Result<Self, EncodingError> {
                text.parse()
            }

            fn encode(&self, out: &mut String) {
                use std::fmt::Write;
                let _ = write!(out, "{self}");
            }
        }
    )+};
}

display_column!(ChainId, Address, TxHash, Amount);
