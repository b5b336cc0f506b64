//! Arithmetic stand-in for a pairing-friendly curve.
//!
//! All three groups are the integers modulo a prime r under addition; a
//! group element k·G is literally the residue k·g. The pairing is plain
//! multiplication, which is bilinear by distributivity. This makes every
//! protocol equation checkable while being INSECURE by construction:
//! discrete logarithms are a single division, so the secret point s can be
//! read straight out of any key. Use it to exercise the protocol and the
//! serialization formats, never to protect anything.

use super::{BilinearBackend, CryptoError};
use crate::field::Field;

#[derive(Debug, Clone, Copy)]
pub struct MockBackend {
    field: Field,
    p_gen: u64,
    q_gen: u64,
}

/// A mock backend of order `r` with unit generators.
pub fn mock_backend(r: u64) -> Result<MockBackend, CryptoError> {
    MockBackend::with_generators(r, 1, 1)
}

impl MockBackend {
    /// A mock backend of order `r` with chosen nonzero generators. Distinct
    /// generators make accidental dependence on "element == scalar" visible.
    pub fn with_generators(r: u64, p_gen: u64, q_gen: u64) -> Result<Self, CryptoError> {
        let field = Field::new(r).map_err(|_| CryptoError::NotPrime(r))?;
        if p_gen == 0 || q_gen == 0 || p_gen >= r || q_gen >= r {
            return Err(CryptoError::Parse(format!(
                "generators must be nonzero residues mod {r}"
            )));
        }
        Ok(MockBackend { field, p_gen, q_gen })
    }
}

impl BilinearBackend for MockBackend {
    type G1 = u64;
    type G2 = u64;
    type Gt = u64;

    fn order(&self) -> u64 {
        self.field.modulus()
    }

    fn g1_generator(&self) -> u64 {
        self.p_gen
    }

    fn g2_generator(&self) -> u64 {
        self.q_gen
    }

    fn g1_identity(&self) -> u64 {
        0
    }

    fn g2_identity(&self) -> u64 {
        0
    }

    fn g1_add(&self, a: u64, b: u64) -> u64 {
        self.field.add(a, b)
    }

    fn g2_add(&self, a: u64, b: u64) -> u64 {
        self.field.add(a, b)
    }

    fn g1_scale(&self, k: u64, a: u64) -> u64 {
        self.field.mul(self.field.reduce(k), a)
    }

    fn g2_scale(&self, k: u64, a: u64) -> u64 {
        self.field.mul(self.field.reduce(k), a)
    }

    fn pair(&self, a: u64, b: u64) -> u64 {
        self.field.mul(a, b)
    }

    fn gt_combine(&self, a: u64, b: u64) -> u64 {
        self.field.add(a, b)
    }

    fn gt_identity(&self) -> u64 {
        0
    }

    fn g1_valid(&self, a: u64) -> bool {
        a < self.field.modulus()
    }

    fn g2_valid(&self, a: u64) -> bool {
        a < self.field.modulus()
    }

    fn g1_encode(&self, a: u64) -> Vec<u8> {
        a.to_be_bytes().to_vec()
    }

    fn g2_encode(&self, a: u64) -> Vec<u8> {
        a.to_be_bytes().to_vec()
    }

    fn g1_decode(&self, bytes: &[u8]) -> Option<u64> {
        let raw = u64::from_be_bytes(bytes.try_into().ok()?);
        self.g1_valid(raw).then_some(raw)
    }

    fn g2_decode(&self, bytes: &[u8]) -> Option<u64> {
        self.g1_decode(bytes)
    }
}
