use std::sync::OnceLock;

use sha3::{Digest, Keccak256};

use super::receipt::Word;

pub const ERC20_TRANSFER_SIGNATURE: &str = "Transfer(address,address,uint256)";

pub fn keccak256(bytes: &[u8]) -> [u8; 32] {
    Keccak256::digest(bytes).into()
}

/// `topic[0]` of an event: the Keccak-256 digest of its canonical signature.
pub fn event_topic(signature: &str) -> Word {
    Word(keccak256(signature.as_bytes()))
}

pub fn erc20_transfer_topic() -> Word {
    static TOPIC: OnceLock<Word> = OnceLock::new();
    *TOPIC.get_or_init(|| event_topic(ERC20_TRANSFER_SIGNATURE))
}
