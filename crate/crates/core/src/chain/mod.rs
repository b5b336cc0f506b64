//! Simplified transaction chain: P2SH-style script construction with
//! verification-key chunking, a linear stack interpreter with a
//! proof-verification opcode, and a miniature UTXO ledger.
//!
//! The goal is to embed a pairing-checked proof of contract execution in a
//! spendable output. The verification key is split into `max_push`-sized
//! chunks whose HASH160 digests are pinned inside a redeem script; the
//! locking script commits to the redeem script P2SH-style; the unlocking
//! script supplies the proof, the io values, the chunks, and the redeem
//! script itself. Signature checking is mocked (pubkey equality) — the
//! protocol logic under test is proof embedding, not signing.
//!
//! Not a goal: real Bitcoin wire compatibility, ECDSA, fees, or blocks.

mod interp;
mod script;
mod tx;

pub use interp::{execute, ExecContext};
pub use script::{
    build_locking_script, build_redeem_script, build_unlocking_script, Item, Opcode, Script,
};
pub use tx::{
    build_funding_tx, build_spending_tx, Ledger, Transaction, TxInput, TxOutput, ONE_BTC,
    SIGHASH_ALL, SIGHASH_SINGLE_ANYONECANPAY,
};

use ripemd::{Digest as _, Ripemd160};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("push of {len} bytes exceeds the {max}-byte limit")]
    PushTooLarge { len: usize, max: usize },
    #[error("script of {len} bytes exceeds the {max}-byte limit")]
    ScriptTooLarge { len: usize, max: usize },
    #[error("stack underflow at {op}")]
    StackUnderflow { op: &'static str },
    #[error("deserialize: {0}")]
    Deserialize(String),
    #[error("unknown utxo {txid}:{index}")]
    UnknownUtxo { txid: String, index: u32 },
}

/// Construction-time size limits. Every script built by this module
/// respects both bounds; oversized data must be re-chunked or the limits
/// raised in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptLimits {
    /// Largest single PUSH payload in bytes.
    pub max_push: usize,
    /// Largest serialized script in bytes.
    pub max_script: usize,
}

impl Default for ScriptLimits {
    fn default() -> Self {
        ScriptLimits { max_push: 520, max_script: 1461 }
    }
}

/// RIPEMD-160 of SHA-256, bit-exact with the Bitcoin convention.
pub fn hash160(data: &[u8]) -> [u8; 20] {
    let sha = Sha256::digest(data);
    let rip = Ripemd160::digest(sha);
    let mut out = [0u8; 20];
    out.copy_from_slice(&rip);
    out
}

/// The verification-key byte stream split into pushable blocks, with the
/// per-chunk digests the redeem script pins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VkChunks {
    pub chunks: Vec<Vec<u8>>,
    pub hashes: Vec<[u8; 20]>,
}

impl VkChunks {
    /// Reassembles the original byte stream.
    pub fn concat(&self) -> Vec<u8> {
        self.chunks.concat()
    }
}

/// Greedy split into ⌈len/max_push⌉ blocks; all but the last are exactly
/// `max_push` bytes. An empty key yields zero chunks (invalid upstream).
pub fn chunk_vk(vk_bytes: &[u8], max_push: usize) -> VkChunks {
    assert!(max_push >= 1, "max_push must be positive");
    let chunks: Vec<Vec<u8>> = vk_bytes.chunks(max_push).map(<[u8]>::to_vec).collect();
    let hashes = chunks.iter().map(|c| hash160(c)).collect();
    VkChunks { chunks, hashes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeSet;

    #[test]
    fn hash160_composes_the_reference_digests() {
        let direct = hash160(b"");
        let composed = Ripemd160::digest(Sha256::digest(b"").as_slice());
        assert_eq!(direct.as_slice(), composed.as_slice());
        assert_eq!(hex::encode(direct), "b472a266d0bd89c13706a4132ccfb16f7c3b9fcb");

        let payload = b"vcontract-vk v1\n";
        assert_eq!(
            hash160(payload).as_slice(),
            Ripemd160::digest(Sha256::digest(payload).as_slice()).as_slice()
        );
    }

    #[test]
    fn digest_is_twenty_bytes() {
        for len in [0usize, 1, 64, 3000] {
            assert_eq!(hash160(&vec![0xabu8; len]).len(), 20);
        }
    }

    #[test]
    fn random_inputs_do_not_collide() {
        let mut rng = StdRng::seed_from_u64(0x160);
        let mut seen: BTreeSet<[u8; 20]> = BTreeSet::new();
        for i in 0..1000u32 {
            let mut data = i.to_be_bytes().to_vec();
            data.extend((0..32).map(|_| rng.random::<u8>()));
            assert!(seen.insert(hash160(&data)), "collision after {i} trials");
        }
    }

    #[test]
    fn three_thousand_bytes_at_520_gives_six_chunks() {
        let vk = vec![7u8; 3000];
        let chunks = chunk_vk(&vk, 520);
        assert_eq!(chunks.chunks.len(), 6);
        assert_eq!(chunks.hashes.len(), 6);
        let lens: Vec<usize> = chunks.chunks.iter().map(Vec::len).collect();
        assert_eq!(lens, [520, 520, 520, 520, 520, 400]);
        assert_eq!(chunks.concat(), vk);
    }

    #[test]
    fn small_key_fits_one_chunk() {
        let vk = b"vcontract-vk v1\n".to_vec();
        let chunks = chunk_vk(&vk, 520);
        assert_eq!(chunks.chunks.len(), 1);
        assert_eq!(chunks.chunks[0], vk);
        assert_eq!(chunks.hashes[0], hash160(&vk));
    }

    #[test]
    fn empty_key_gives_zero_chunks() {
        assert_eq!(chunk_vk(&[], 520).chunks.len(), 0);
    }
}
