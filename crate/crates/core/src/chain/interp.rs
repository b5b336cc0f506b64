//! Stack interpreter: linear execution, no jumps, P2SH semantics, and the
//! `OP_VERIFY_POC` pairing-check opcode.
//!
//! `execute` runs the unlocking script (its pushes build the stack), then
//! the locking script. When the locking script is the P2SH pattern and
//! accepts, the top push is deserialized as the redeem script and executed
//! against the remaining stack — so redeem execution is reachable only
//! when `hash160(pushed redeem)` equals the committed hash.
//!
//! `OP_VERIFY_POC` reassembles the verification key from the chunk
//! preimages that the redeem script's `OP_HASH160` gates consumed earlier
//! in the same run, then pops the io values and the proof push,
//! deserializes both, and invokes the pairing verifier. Content-level
//! failures (bad encodings, malformed elements, rejected pairings) make
//! the script evaluate to false rather than erroring: past the hash
//! gates, those bytes are adversary-controlled inputs.

use super::script::p2sh_hash;
use super::{hash160, ChainError, Item, Opcode, Script};
use crate::crypto::{io_vector, parse_proof, parse_vk, verify, BilinearBackend};

/// Everything the interpreter needs beyond the scripts: the pairing
/// backend for `OP_VERIFY_POC` and the pubkey that the mocked
/// `OP_CHECKSIG` accepts.
#[derive(Debug, Clone, Copy)]
pub struct ExecContext<'a, B: BilinearBackend> {
    pub backend: &'a B,
    pub worker_pubkey: &'a [u8],
}

/// Runs unlocking then locking with P2SH semantics. `Ok(true)` iff every
/// VERIFY-style gate passed and the final stack top is truthy; recoverable
/// validation failures (hash mismatches, rejected proofs, wrong pubkey)
/// are `Ok(false)`.
pub fn execute<B: BilinearBackend>(
    unlocking: &Script,
    locking: &Script,
    ctx: &ExecContext<'_, B>,
) -> Result<bool, ChainError> {
    let mut run = Run::default();
    if !run.items(unlocking.items(), ctx)? {
        return Ok(false);
    }
    let after_unlock = run.stack.clone();
    if !run.items(locking.items(), ctx)? || !truthy_top(&run.stack) {
        return Ok(false);
    }
    if p2sh_hash(locking).is_some() {
        let mut redeem_run = Run { stack: after_unlock, hashed: Vec::new() };
        let redeem_bytes = redeem_run
            .stack
            .pop()
            .ok_or(ChainError::StackUnderflow { op: "P2SH redeem" })?;
        let redeem = Script::parse(&redeem_bytes)?;
        if !redeem_run.items(redeem.items(), ctx)? {
            return Ok(false);
        }
        return Ok(truthy_top(&redeem_run.stack));
    }
    Ok(true)
}

fn truthy(value: &[u8]) -> bool {
    value.iter().any(|&b| b != 0)
}

fn truthy_top(stack: &[Vec<u8>]) -> bool {
    stack.last().is_some_and(|top| truthy(top))
}

#[derive(Default)]
struct Run {
    stack: Vec<Vec<u8>>,
    /// Preimages consumed by OP_HASH160 in this run, in pop order. The
    /// redeem script's hash gates leave the verified VK chunks here.
    hashed: Vec<Vec<u8>>,
}

impl Run {
    fn pop(&mut self, op: &'static str) -> Result<Vec<u8>, ChainError> {
        self.stack.pop().ok_or(ChainError::StackUnderflow { op })
    }

    /// Executes items in order. `Ok(false)` means a VERIFY-style gate
    /// failed and the script is rejected.
    fn items<B: BilinearBackend>(
        &mut self,
        items: &[Item],
        ctx: &ExecContext<'_, B>,
    ) -> Result<bool, ChainError> {
        for item in items {
            match item {
                Item::Push(data) => self.stack.push(data.clone()),
                Item::Op(Opcode::Hash160) => {
                    let preimage = self.pop("OP_HASH160")?;
                    self.stack.push(hash160(&preimage).to_vec());
                    self.hashed.push(preimage);
                }
                Item::Op(Opcode::Equal) => {
                    let a = self.pop("OP_EQUAL")?;
                    let b = self.pop("OP_EQUAL")?;
                    self.stack.push(if a == b { vec![1] } else { vec![] });
                }
                Item::Op(Opcode::EqualVerify) => {
                    let a = self.pop("OP_EQUALVERIFY")?;
                    let b = self.pop("OP_EQUALVERIFY")?;
                    if a != b {
                        return Ok(false);
                    }
                }
                Item::Op(Opcode::CheckSig) => {
                    let pubkey = self.pop("OP_CHECKSIG")?;
                    if pubkey != ctx.worker_pubkey {
                        return Ok(false);
                    }
                }
                Item::Op(Opcode::VerifyPoc) => {
                    let accepted = self.verify_poc(ctx)?;
                    self.stack.push(if accepted { vec![1] } else { vec![] });
                }
            }
        }
        Ok(true)
    }

    fn verify_poc<B: BilinearBackend>(
        &mut self,
        ctx: &ExecContext<'_, B>,
    ) -> Result<bool, ChainError> {
        // Chunks were popped top-first, i.e. in reverse push order.
        let vk_bytes: Vec<u8> =
            self.hashed.iter().rev().flat_map(|c| c.iter().copied()).collect();
        let Ok(vk_text) = String::from_utf8(vk_bytes) else { return Ok(false) };
        let Ok(vk) = parse_vk(ctx.backend, &vk_text) else { return Ok(false) };

        let n_values = vk.v_p_io.len().saturating_sub(1);
        if self.stack.len() < n_values + 1 {
            return Err(ChainError::StackUnderflow { op: "OP_VERIFY_POC" });
        }
        let mut values = Vec::with_capacity(n_values);
        for _ in 0..n_values {
            let item = self.pop("OP_VERIFY_POC")?;
            let Ok(raw) = <[u8; 8]>::try_from(item.as_slice()) else { return Ok(false) };
            values.push(u64::from_be_bytes(raw));
        }
        values.reverse();

        let proof_push = self.pop("OP_VERIFY_POC")?;
        let Ok(proof_text) = String::from_utf8(proof_push) else { return Ok(false) };
        let Ok(proof) = parse_proof(ctx.backend, &proof_text) else { return Ok(false) };
        let Ok(io) = io_vector(vk.v_p_io.len(), &values, &[]) else { return Ok(false) };
        Ok(verify(&vk, &io, &proof, ctx.backend).unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        build_locking_script, build_redeem_script, build_unlocking_script, chunk_vk,
        ScriptLimits, VkChunks,
    };
    use super::*;
    use crate::circuit::lower;
    use crate::crypto::mock::{mock_backend, MockBackend};
    use crate::crypto::{keygen, prove, serialize_proof, serialize_vk};
    use crate::field::DEFAULT_MODULUS;
    use crate::frontend::{compile_str, FlattenConfig};
    use crate::qap::{build_qap, witness};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    const PUBKEY: &[u8] = b"worker-pubkey-0001";

    struct Fixture {
        backend: MockBackend,
        vk_text: String,
        proof_text: String,
        io_x: Vec<u64>,
        io_y: Vec<u64>,
    }

    /// Sum contract proved on inputs (2, 3): the canonical happy path.
    fn fixture() -> Fixture {
        let src = "struct in_T { unsigned int i1; unsigned int i2; };\n\
                   struct out_T { unsigned int o; };\n\
                   void contract(struct in_T *in, struct out_T *out) {\n\
                       out->o = in->i1 + in->i2;\n\
                   }\n";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(8)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(0xc4a1);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[2, 3]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let proof = prove(&ek, &q, &a, &backend).unwrap();
        Fixture {
            vk_text: serialize_vk(&backend, &vk),
            proof_text: serialize_proof(&backend, &proof),
            io_x: vec![2, 3],
            io_y: c.outputs_of(&asg),
            backend,
        }
    }

    struct Spend {
        unlock: Script,
        lock: Script,
    }

    fn spend(f: &Fixture, max_push: usize) -> (Spend, VkChunks) {
        let limits = ScriptLimits { max_push, max_script: 4096 };
        let chunks = chunk_vk(f.vk_text.as_bytes(), limits.max_push);
        let redeem = build_redeem_script(&chunks, PUBKEY, &limits).unwrap();
        let unlock =
            build_unlocking_script(&f.proof_text, &f.io_x, &f.io_y, &chunks, &redeem, &limits)
                .unwrap();
        (Spend { unlock, lock: build_locking_script(&redeem) }, chunks)
    }

    fn ctx(f: &Fixture) -> ExecContext<'_, MockBackend> {
        ExecContext { backend: &f.backend, worker_pubkey: PUBKEY }
    }

    #[test]
    fn honest_single_chunk_spend_is_accepted() {
        let f = fixture();
        let (s, chunks) = spend(&f, 2048);
        assert_eq!(chunks.chunks.len(), 1);
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(true));
    }

    #[test]
    fn honest_multi_chunk_spend_is_accepted() {
        let f = fixture();
        let (s, chunks) = spend(&f, 150);
        assert!(chunks.chunks.len() > 1, "key must spread over several chunks");
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(true));
    }

    #[test]
    fn corrupted_chunk_fails_the_hash_gate() {
        let f = fixture();
        let (mut s, chunks) = spend(&f, 150);
        // Chunk pushes sit between the io values and the final redeem push.
        let chunk_at = s.unlock.items.len() - 1 - chunks.chunks.len();
        let Item::Push(data) = &mut s.unlock.items[chunk_at] else { panic!("push expected") };
        data[3] ^= 0x40;
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(false));
    }

    #[test]
    fn tampered_proof_push_is_rejected() {
        let f = fixture();
        let (mut s, _) = spend(&f, 2048);
        let Item::Push(data) = &mut s.unlock.items[0] else { panic!("push expected") };
        let at = data.len() / 2;
        data[at] = data[at].wrapping_add(1);
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(false));
    }

    #[test]
    fn tampered_io_push_is_rejected() {
        let f = fixture();
        let (mut s, _) = spend(&f, 2048);
        let Item::Push(data) = &mut s.unlock.items[1] else { panic!("push expected") };
        data[7] ^= 1; // turns x1 = 2 into 3
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(false));
    }

    #[test]
    fn substituted_redeem_never_reaches_verification() {
        let f = fixture();
        let (mut s, chunks) = spend(&f, 2048);
        // A redeem script that skips the pairing check entirely.
        let forged = build_redeem_script(&chunks, PUBKEY, &ScriptLimits::default())
            .unwrap()
            .serialize()[..4]
            .to_vec();
        let last = s.unlock.items.len() - 1;
        s.unlock.items[last] = Item::Push(forged);
        assert_eq!(execute(&s.unlock, &s.lock, &ctx(&f)), Ok(false));
    }

    #[test]
    fn unexpected_worker_pubkey_is_rejected() {
        let f = fixture();
        let (s, _) = spend(&f, 2048);
        let other = ExecContext { backend: &f.backend, worker_pubkey: b"someone else".as_slice() };
        assert_eq!(execute(&s.unlock, &s.lock, &other), Ok(false));
    }

    #[test]
    fn missing_pushes_underflow() {
        let f = fixture();
        let (s, _) = spend(&f, 2048);
        let empty = Script { items: vec![] };
        assert_eq!(
            execute(&empty, &s.lock, &ctx(&f)),
            Err(ChainError::StackUnderflow { op: "OP_HASH160" })
        );
    }

    #[test]
    fn non_p2sh_scripts_run_directly() {
        let f = fixture();
        let limits = ScriptLimits::default();
        let unlock = Script::new(
            vec![Item::Push(vec![1, 2]), Item::Push(vec![1, 2])],
            &limits,
        )
        .unwrap();
        let lock = Script::new(vec![Item::Op(Opcode::Equal)], &limits).unwrap();
        assert_eq!(execute(&unlock, &lock, &ctx(&f)), Ok(true));

        let unlock_ne = Script::new(
            vec![Item::Push(vec![1, 2]), Item::Push(vec![3])],
            &limits,
        )
        .unwrap();
        assert_eq!(execute(&unlock_ne, &lock, &ctx(&f)), Ok(false));
    }

    #[test]
    fn equalverify_failure_is_a_clean_reject() {
        let f = fixture();
        let limits = ScriptLimits::default();
        let unlock = Script::new(
            vec![Item::Push(vec![1]), Item::Push(vec![2]), Item::Push(vec![1])],
            &limits,
        )
        .unwrap();
        let lock = Script::new(vec![Item::Op(Opcode::EqualVerify)], &limits).unwrap();
        assert_eq!(execute(&unlock, &lock, &ctx(&f)), Ok(false));
    }
}
