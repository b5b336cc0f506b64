//! Script type, binary/text codecs, and the P2SH construction helpers.
//!
//! Binary form, used for hashing and embedding: opcodes are single bytes,
//! every push is `0x4d` + little-endian u16 length + payload. Text form,
//! used in golden files: one item per line, `PUSH <hex>` or the opcode
//! name.

use super::{hash160, ChainError, ScriptLimits, VkChunks};

const PUSH_TAG: u8 = 0x4d;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opcode {
    Hash160,
    Equal,
    EqualVerify,
    CheckSig,
    VerifyPoc,
}

impl Opcode {
    pub fn byte(self) -> u8 {
        match self {
            Opcode::Hash160 => 0xa9,
            Opcode::Equal => 0x87,
            Opcode::EqualVerify => 0x88,
            Opcode::CheckSig => 0xac,
            Opcode::VerifyPoc => 0xb9,
        }
    }

    fn from_byte(b: u8) -> Option<Opcode> {
        Some(match b {
            0xa9 => Opcode::Hash160,
            0x87 => Opcode::Equal,
            0x88 => Opcode::EqualVerify,
            0xac => Opcode::CheckSig,
            0xb9 => Opcode::VerifyPoc,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Opcode::Hash160 => "OP_HASH160",
            Opcode::Equal => "OP_EQUAL",
            Opcode::EqualVerify => "OP_EQUALVERIFY",
            Opcode::CheckSig => "OP_CHECKSIG",
            Opcode::VerifyPoc => "OP_VERIFY_POC",
        }
    }

    fn from_name(name: &str) -> Option<Opcode> {
        Some(match name {
            "OP_HASH160" => Opcode::Hash160,
            "OP_EQUAL" => Opcode::Equal,
            "OP_EQUALVERIFY" => Opcode::EqualVerify,
            "OP_CHECKSIG" => Opcode::CheckSig,
            "OP_VERIFY_POC" => Opcode::VerifyPoc,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Push(Vec<u8>),
    Op(Opcode),
}

/// A linear script: pushes and opcodes, no control flow. Instances built
/// through [`Script::new`] or the chain builders always satisfy the
/// configured push and total-size limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub(crate) items: Vec<Item>,
}

impl Script {
    /// Validates the limits: every push within `max_push` (and the u16
    /// length encoding), total serialized size within `max_script`.
    pub fn new(items: Vec<Item>, limits: &ScriptLimits) -> Result<Script, ChainError> {
        let push_cap = limits.max_push.min(u16::MAX as usize);
        for item in &items {
            if let Item::Push(data) = item {
                if data.len() > push_cap {
                    return Err(ChainError::PushTooLarge { len: data.len(), max: push_cap });
                }
            }
        }
        let script = Script { items };
        let len = script.serialized_len();
        if len > limits.max_script {
            return Err(ChainError::ScriptTooLarge { len, max: limits.max_script });
        }
        Ok(script)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn serialized_len(&self) -> usize {
        self.items
            .iter()
            .map(|item| match item {
                Item::Push(data) => 3 + data.len(),
                Item::Op(_) => 1,
            })
            .sum()
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        for item in &self.items {
            match item {
                Item::Push(data) => {
                    out.push(PUSH_TAG);
                    out.extend((data.len() as u16).to_le_bytes());
                    out.extend_from_slice(data);
                }
                Item::Op(op) => out.push(op.byte()),
            }
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Script, ChainError> {
        let mut items = Vec::new();
        let mut at = 0usize;
        while at < bytes.len() {
            let b = bytes[at];
            at += 1;
            if b == PUSH_TAG {
                let end = at + 2;
                if end > bytes.len() {
                    return Err(ChainError::Deserialize("truncated push length".into()));
                }
                let len = u16::from_le_bytes([bytes[at], bytes[at + 1]]) as usize;
                at = end;
                if at + len > bytes.len() {
                    return Err(ChainError::Deserialize("truncated push payload".into()));
                }
                items.push(Item::Push(bytes[at..at + len].to_vec()));
                at += len;
            } else if let Some(op) = Opcode::from_byte(b) {
                items.push(Item::Op(op));
            } else {
                return Err(ChainError::Deserialize(format!("unknown script byte 0x{b:02x}")));
            }
        }
        Ok(Script { items })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match item {
                Item::Push(data) if data.is_empty() => out.push_str("PUSH\n"),
                Item::Push(data) => {
                    out.push_str(&format!("PUSH {}\n", hex::encode(data)));
                }
                Item::Op(op) => {
                    out.push_str(op.name());
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Script, ChainError> {
        let mut items = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("PUSH") {
                let data = hex::decode(rest.trim())
                    .map_err(|e| ChainError::Deserialize(format!("push hex: {e}")))?;
                items.push(Item::Push(data));
            } else if let Some(op) = Opcode::from_name(line) {
                items.push(Item::Op(op));
            } else {
                return Err(ChainError::Deserialize(format!("unknown script line {line:?}")));
            }
        }
        Ok(Script { items })
    }
}

/// Redeem script pinning every chunk digest: per chunk, in reverse stack
/// order, `OP_HASH160 PUSH(H(V_Ki)) OP_EQUALVERIFY`; then the worker
/// pubkey gate and the proof-verification opcode. With one chunk this is
/// the single-hash layout `OP_HASH160 <H(VK)> OP_EQUALVERIFY <pubkey>
/// OP_CHECKSIG OP_VERIFY_POC`.
pub fn build_redeem_script(
    chunks: &VkChunks,
    worker_pubkey: &[u8],
    limits: &ScriptLimits,
) -> Result<Script, ChainError> {
    assert!(!chunks.chunks.is_empty(), "cannot commit to an empty verification key");
    let mut items = Vec::with_capacity(3 * chunks.hashes.len() + 3);
    for hash in chunks.hashes.iter().rev() {
        items.push(Item::Op(Opcode::Hash160));
        items.push(Item::Push(hash.to_vec()));
        items.push(Item::Op(Opcode::EqualVerify));
    }
    items.push(Item::Push(worker_pubkey.to_vec()));
    items.push(Item::Op(Opcode::CheckSig));
    items.push(Item::Op(Opcode::VerifyPoc));
    Script::new(items, limits)
}

/// The P2SH lock: `OP_HASH160 PUSH(hash160(serialize(redeem))) OP_EQUAL`.
/// Constant-size regardless of the redeem script.
pub fn build_locking_script(redeem: &Script) -> Script {
    Script {
        items: vec![
            Item::Op(Opcode::Hash160),
            Item::Push(hash160(&redeem.serialize()).to_vec()),
            Item::Op(Opcode::Equal),
        ],
    }
}

/// The data pushes satisfying the lock: proof serialization, x values,
/// y values (8-byte big-endian each), the VK chunks in order, then the
/// serialized redeem script.
pub fn build_unlocking_script(
    proof_text: &str,
    io_x: &[u64],
    io_y: &[u64],
    chunks: &VkChunks,
    redeem: &Script,
    limits: &ScriptLimits,
) -> Result<Script, ChainError> {
    let mut items = vec![Item::Push(proof_text.as_bytes().to_vec())];
    for &x in io_x {
        items.push(Item::Push(x.to_be_bytes().to_vec()));
    }
    for &y in io_y {
        items.push(Item::Push(y.to_be_bytes().to_vec()));
    }
    for chunk in &chunks.chunks {
        items.push(Item::Push(chunk.clone()));
    }
    items.push(Item::Push(redeem.serialize()));
    Script::new(items, limits)
}

/// The redeem hash committed by a P2SH locking script, if the script has
/// exactly that shape.
pub(crate) fn p2sh_hash(locking: &Script) -> Option<&[u8]> {
    match locking.items() {
        [Item::Op(Opcode::Hash160), Item::Push(h), Item::Op(Opcode::Equal)] if h.len() == 20 => {
            Some(h)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::chunk_vk;
    use super::*;

    const PUBKEY: &[u8] = b"worker-pubkey-0001";

    #[test]
    fn single_chunk_redeem_matches_the_one_hash_layout() {
        let chunks = chunk_vk(b"vk bytes", 520);
        let redeem = build_redeem_script(&chunks, PUBKEY, &ScriptLimits::default()).unwrap();
        assert_eq!(
            redeem.items(),
            [
                Item::Op(Opcode::Hash160),
                Item::Push(hash160(b"vk bytes").to_vec()),
                Item::Op(Opcode::EqualVerify),
                Item::Push(PUBKEY.to_vec()),
                Item::Op(Opcode::CheckSig),
                Item::Op(Opcode::VerifyPoc),
            ]
        );
    }

    #[test]
    fn multi_chunk_redeem_checks_hashes_in_reverse_stack_order() {
        let vk = vec![9u8; 25];
        let chunks = chunk_vk(&vk, 10);
        assert_eq!(chunks.chunks.len(), 3);
        let redeem = build_redeem_script(&chunks, PUBKEY, &ScriptLimits::default()).unwrap();
        assert_eq!(redeem.items().len(), 3 * 3 + 3);
        // The unlocking script pushes chunks 1..3, so chunk 3 is on top and
        // must be hashed first.
        assert_eq!(redeem.items()[1], Item::Push(chunks.hashes[2].to_vec()));
        assert_eq!(redeem.items()[4], Item::Push(chunks.hashes[1].to_vec()));
        assert_eq!(redeem.items()[7], Item::Push(chunks.hashes[0].to_vec()));
    }

    #[test]
    fn locking_script_is_the_constant_size_p2sh_pattern() {
        let small = build_redeem_script(&chunk_vk(b"a", 520), PUBKEY, &ScriptLimits::default())
            .unwrap();
        let large =
            build_redeem_script(&chunk_vk(&vec![1u8; 900], 100), PUBKEY, &ScriptLimits::default())
                .unwrap();
        let lock_small = build_locking_script(&small);
        let lock_large = build_locking_script(&large);
        assert_eq!(lock_small.items().len(), 3);
        assert_eq!(lock_small.serialized_len(), lock_large.serialized_len());
        assert_ne!(lock_small, lock_large, "distinct redeems give distinct locks");
        assert!(p2sh_hash(&lock_small).is_some());
    }

    #[test]
    fn unlocking_layout_is_proof_x_y_chunks_redeem() {
        let chunks = chunk_vk(b"the verification key", 520);
        let limits = ScriptLimits::default();
        let redeem = build_redeem_script(&chunks, PUBKEY, &limits).unwrap();
        let unlock =
            build_unlocking_script("proof text", &[2, 3], &[5], &chunks, &redeem, &limits)
                .unwrap();
        let expect = [
            Item::Push(b"proof text".to_vec()),
            Item::Push(2u64.to_be_bytes().to_vec()),
            Item::Push(3u64.to_be_bytes().to_vec()),
            Item::Push(5u64.to_be_bytes().to_vec()),
            Item::Push(b"the verification key".to_vec()),
            Item::Push(redeem.serialize()),
        ];
        assert_eq!(unlock.items(), expect);
    }

    #[test]
    fn no_inputs_omits_the_x_block() {
        let chunks = chunk_vk(b"vk", 520);
        let limits = ScriptLimits::default();
        let redeem = build_redeem_script(&chunks, PUBKEY, &limits).unwrap();
        let unlock = build_unlocking_script("p", &[], &[7], &chunks, &redeem, &limits).unwrap();
        assert_eq!(unlock.items()[1], Item::Push(7u64.to_be_bytes().to_vec()));
    }

    #[test]
    fn limits_are_enforced_at_construction() {
        let limits = ScriptLimits { max_push: 8, max_script: 64 };
        let oversized = Script::new(vec![Item::Push(vec![0; 9])], &limits);
        assert_eq!(oversized, Err(ChainError::PushTooLarge { len: 9, max: 8 }));

        let chunks = chunk_vk(&vec![1u8; 64], 8);
        let too_long =
            build_redeem_script(&chunks, PUBKEY, &ScriptLimits { max_push: 520, max_script: 64 });
        assert!(matches!(too_long, Err(ChainError::ScriptTooLarge { .. })));

        let tight = ScriptLimits { max_push: 4, max_script: 1461 };
        let redeem = build_redeem_script(&chunk_vk(b"vk", 520), PUBKEY, &ScriptLimits::default())
            .unwrap();
        let over_push =
            build_unlocking_script("proof", &[], &[], &chunk_vk(b"vk", 520), &redeem, &tight);
        assert_eq!(over_push, Err(ChainError::PushTooLarge { len: 5, max: 4 }));
    }

    #[test]
    fn binary_serialization_round_trips() {
        let chunks = chunk_vk(&vec![3u8; 50], 16);
        let limits = ScriptLimits::default();
        let redeem = build_redeem_script(&chunks, PUBKEY, &limits).unwrap();
        let unlock = build_unlocking_script("p", &[1], &[2], &chunks, &redeem, &limits).unwrap();
        for script in [&redeem, &unlock, &build_locking_script(&redeem)] {
            let bytes = script.serialize();
            assert_eq!(bytes.len(), script.serialized_len());
            assert_eq!(&Script::parse(&bytes).unwrap(), script);
        }
    }

    #[test]
    fn parse_rejects_malformed_bytes() {
        assert!(matches!(Script::parse(&[0xff]), Err(ChainError::Deserialize(_))));
        assert!(matches!(Script::parse(&[0x4d, 5]), Err(ChainError::Deserialize(_))));
        assert!(matches!(Script::parse(&[0x4d, 5, 0, 1, 2]), Err(ChainError::Deserialize(_))));
    }

    #[test]
    fn text_form_round_trips_and_is_stable() {
        let limits = ScriptLimits::default();
        let script = Script::new(
            vec![
                Item::Op(Opcode::Hash160),
                Item::Push(vec![0xde, 0xad]),
                Item::Op(Opcode::EqualVerify),
                Item::Push(vec![]),
                Item::Op(Opcode::VerifyPoc),
            ],
            &limits,
        )
        .unwrap();
        let text = script.to_text();
        assert_eq!(text, "OP_HASH160\nPUSH dead\nOP_EQUALVERIFY\nPUSH\nOP_VERIFY_POC\n");
        assert_eq!(Script::from_text(&text).unwrap(), script);
        assert!(Script::from_text("OP_NOPE").is_err());
    }
}
