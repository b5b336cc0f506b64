//! Key generation, proving, and pairing-based verification over an abstract
//! bilinear-group backend.
//!
//! The protocol encodes the QAP polynomial families at a secret point s as
//! group elements: the evaluation key carries per-variable v_i(s)·P, w_i(s)·Q,
//! y_i(s)·P plus the powers s^i·Q, and the verification key the public-slot
//! subset together with t(s)·P. A proof is the internal-variable part of each
//! sum plus H = h(s)·Q; verifiers rebuild the public part from the claimed io
//! values and check e(V, W) = e(Y, Q) · e(t(s)P, H).
//!
//! No blinding or consistency terms are added: this is the bare divisibility
//! check, sound against the tamper models exercised here but not against
//! adaptive provers.

pub mod mock;

pub use mock::{mock_backend, MockBackend};

use crate::field::Field;
use crate::qap::{compute_p, divide_by_t, Qap, QapError};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("backend scalar order {backend} differs from QAP field {qap}")]
    ScalarFieldMismatch { backend: u64, qap: u64 },
    #[error("expected {expected} elements, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("witness rejected: {0}")]
    InvalidWitness(String),
    #[error("proof element is not a valid group member")]
    MalformedProof,
    #[error("malformed key or proof text: {0}")]
    Parse(String),
}

/// Abstract bilinear groups (G1, G2, GT) of prime order with a pairing.
///
/// Backends are stateless after construction. Encoding hooks define the
/// bit-exact byte form used by the text serializations (and hashed by the
/// chain layer), so two backends of the same order with the same encodings
/// produce interchangeable artifacts.
pub trait BilinearBackend {
    type G1: Copy + Eq + std::fmt::Debug;
    type G2: Copy + Eq + std::fmt::Debug;
    type Gt: Copy + Eq + std::fmt::Debug;

    /// Prime order r of all three groups (and of the scalar field).
    fn order(&self) -> u64;
    /// Generator P of G1.
    fn g1_generator(&self) -> Self::G1;
    /// Generator Q of G2.
    fn g2_generator(&self) -> Self::G2;
    fn g1_identity(&self) -> Self::G1;
    fn g2_identity(&self) -> Self::G2;
    fn g1_add(&self, a: Self::G1, b: Self::G1) -> Self::G1;
    fn g2_add(&self, a: Self::G2, b: Self::G2) -> Self::G2;
    fn g1_scale(&self, k: u64, a: Self::G1) -> Self::G1;
    fn g2_scale(&self, k: u64, a: Self::G2) -> Self::G2;
    fn pair(&self, a: Self::G1, b: Self::G2) -> Self::Gt;
    /// The target-group product combining two pairing results.
    fn gt_combine(&self, a: Self::Gt, b: Self::Gt) -> Self::Gt;
    fn gt_identity(&self) -> Self::Gt;
    fn g1_valid(&self, a: Self::G1) -> bool;
    fn g2_valid(&self, a: Self::G2) -> bool;
    fn g1_encode(&self, a: Self::G1) -> Vec<u8>;
    fn g2_encode(&self, a: Self::G2) -> Vec<u8>;
    fn g1_decode(&self, bytes: &[u8]) -> Option<Self::G1>;
    fn g2_decode(&self, bytes: &[u8]) -> Option<Self::G2>;
}

/// Prover-side key material: one encoded polynomial evaluation per variable,
/// plus the powers of s needed to assemble h(s)·Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationKey<G1, G2> {
    pub v_p: Vec<G1>,
    pub w_q: Vec<G2>,
    pub y_p: Vec<G1>,
    pub s_q_powers: Vec<G2>,
}

/// Verifier-side key material: encodings for the public slots only, the
/// target evaluation t(s)·P, and the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationKey<G1, G2> {
    pub v_p_io: Vec<G1>,
    pub w_q_io: Vec<G2>,
    pub y_p_io: Vec<G1>,
    pub t_p: G1,
    pub p: G1,
    pub q: G2,
}

/// The published proof: internal-variable sums and H = h(s)·Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proof<G1, G2> {
    pub v_mid: G1,
    pub w_mid: G2,
    pub y_mid: G1,
    pub h: G2,
}

/// Samples the secret point and encodes the QAP into key material.
///
/// The secret s is resampled until t(s) ≠ 0 and returned only so tests can
/// cross-check key contents; it is never part of either key.
pub fn keygen<B: BilinearBackend>(
    q: &Qap,
    backend: &B,
    rng: &mut impl Rng,
) -> Result<(EvaluationKey<B::G1, B::G2>, VerificationKey<B::G1, B::G2>, u64), CryptoError> {
    if backend.order() != q.field.modulus() {
        return Err(CryptoError::ScalarFieldMismatch {
            backend: backend.order(),
            qap: q.field.modulus(),
        });
    }
    let s = loop {
        let s = rng.random_range(0..backend.order());
        if q.t.eval(s) != 0 {
            break s;
        }
    };
    let p = backend.g1_generator();
    let qq = backend.g2_generator();
    let ek = EvaluationKey {
        v_p: q.v.iter().map(|poly| backend.g1_scale(poly.eval(s), p)).collect(),
        w_q: q.w.iter().map(|poly| backend.g2_scale(poly.eval(s), qq)).collect(),
        y_p: q.y.iter().map(|poly| backend.g1_scale(poly.eval(s), p)).collect(),
        s_q_powers: {
            let mut powers = Vec::with_capacity(q.d + 1);
            let mut power = 1u64;
            for _ in 0..=q.d {
                powers.push(backend.g2_scale(power, qq));
                power = q.field.mul(power, s);
            }
            powers
        },
    };
    let vk = VerificationKey {
        v_p_io: ek.v_p[..q.n_io].to_vec(),
        w_q_io: ek.w_q[..q.n_io].to_vec(),
        y_p_io: ek.y_p[..q.n_io].to_vec(),
        t_p: backend.g1_scale(q.t.eval(s), p),
        p,
        q: qq,
    };
    Ok((ek, vk, s))
}

/// Builds a proof from a full witness vector.
///
/// Only the evaluation key and the witness enter the group computations;
/// h comes from the exact division p/t, so an inconsistent witness is
/// rejected rather than proven.
pub fn prove<B: BilinearBackend>(
    ek: &EvaluationKey<B::G1, B::G2>,
    q: &Qap,
    a: &[u64],
    backend: &B,
) -> Result<Proof<B::G1, B::G2>, CryptoError> {
    if a.len() != q.k || ek.v_p.len() != q.k {
        return Err(CryptoError::DimensionMismatch {
            expected: q.k,
            got: if a.len() != q.k { a.len() } else { ek.v_p.len() },
        });
    }
    let p = compute_p(q, a).map_err(|e| CryptoError::InvalidWitness(e.to_string()))?;
    let h = match divide_by_t(&p, &q.t) {
        Ok(h) => h,
        Err(e @ QapError::NotDivisible { .. }) => {
            return Err(CryptoError::InvalidWitness(e.to_string()))
        }
        Err(e) => return Err(CryptoError::InvalidWitness(e.to_string())),
    };
    if h.coeffs().len() > ek.s_q_powers.len() {
        return Err(CryptoError::DimensionMismatch {
            expected: ek.s_q_powers.len(),
            got: h.coeffs().len(),
        });
    }

    let mut v_mid = backend.g1_identity();
    let mut w_mid = backend.g2_identity();
    let mut y_mid = backend.g1_identity();
    for i in q.n_io..q.k {
        let ai = q.field.reduce(a[i]);
        if ai == 0 {
            continue;
        }
        v_mid = backend.g1_add(v_mid, backend.g1_scale(ai, ek.v_p[i]));
        w_mid = backend.g2_add(w_mid, backend.g2_scale(ai, ek.w_q[i]));
        y_mid = backend.g1_add(y_mid, backend.g1_scale(ai, ek.y_p[i]));
    }
    let mut h_enc = backend.g2_identity();
    for (i, &hi) in h.coeffs().iter().enumerate() {
        if hi != 0 {
            h_enc = backend.g2_add(h_enc, backend.g2_scale(hi, ek.s_q_powers[i]));
        }
    }
    Ok(Proof { v_mid, w_mid, y_mid, h: h_enc })
}

/// Pairing check: rebuilds the public parts of V, W, Y from the claimed io
/// values and accepts iff e(V, W) == e(Y, Q) · e(t(s)P, H).
pub fn verify<B: BilinearBackend>(
    vk: &VerificationKey<B::G1, B::G2>,
    io: &[u64],
    proof: &Proof<B::G1, B::G2>,
    backend: &B,
) -> Result<bool, CryptoError> {
    if io.len() != vk.v_p_io.len() {
        return Err(CryptoError::DimensionMismatch {
            expected: vk.v_p_io.len(),
            got: io.len(),
        });
    }
    if !backend.g1_valid(proof.v_mid)
        || !backend.g2_valid(proof.w_mid)
        || !backend.g1_valid(proof.y_mid)
        || !backend.g2_valid(proof.h)
    {
        return Err(CryptoError::MalformedProof);
    }
    let field = Field::new(backend.order()).map_err(|_| CryptoError::NotPrime(backend.order()))?;
    let mut v = proof.v_mid;
    let mut w = proof.w_mid;
    let mut y = proof.y_mid;
    for (i, &raw) in io.iter().enumerate() {
        let ai = field.reduce(raw);
        if ai == 0 {
            continue;
        }
        v = backend.g1_add(v, backend.g1_scale(ai, vk.v_p_io[i]));
        w = backend.g2_add(w, backend.g2_scale(ai, vk.w_q_io[i]));
        y = backend.g1_add(y, backend.g1_scale(ai, vk.y_p_io[i]));
    }
    let lhs = backend.pair(v, w);
    let rhs = backend.gt_combine(backend.pair(y, vk.q), backend.pair(vk.t_p, proof.h));
    Ok(lhs == rhs)
}

/// The io vector a verifier binds for a circuit with `inputs` and `outputs`:
/// inputs, then outputs, then — iff the public region has one extra slot —
/// the constant 1.
pub fn io_vector(n_io: usize, inputs: &[u64], outputs: &[u64]) -> Result<Vec<u64>, CryptoError> {
    let mut io = Vec::with_capacity(n_io);
    io.extend_from_slice(inputs);
    io.extend_from_slice(outputs);
    if io.len() + 1 == n_io {
        io.push(1);
    }
    if io.len() != n_io {
        return Err(CryptoError::DimensionMismatch { expected: n_io, got: io.len() });
    }
    Ok(io)
}

fn hex_line(label: &str, bytes: &[u8]) -> String {
    format!("{label} {}\n", hex::encode(bytes))
}

/// Renders an evaluation key in the versioned text form (one labeled group
/// element per line, lowercase hex).
pub fn serialize_ek<B: BilinearBackend>(
    backend: &B,
    ek: &EvaluationKey<B::G1, B::G2>,
) -> String {
    let mut out = String::from("vcontract-ek v1\n");
    for &e in &ek.v_p {
        out.push_str(&hex_line("vp", &backend.g1_encode(e)));
    }
    for &e in &ek.w_q {
        out.push_str(&hex_line("wq", &backend.g2_encode(e)));
    }
    for &e in &ek.y_p {
        out.push_str(&hex_line("yp", &backend.g1_encode(e)));
    }
    for &e in &ek.s_q_powers {
        out.push_str(&hex_line("sq", &backend.g2_encode(e)));
    }
    out
}

/// Renders a verification key. This exact byte stream is what the chain
/// layer chunks and hashes, so the format is append-only versioned.
pub fn serialize_vk<B: BilinearBackend>(
    backend: &B,
    vk: &VerificationKey<B::G1, B::G2>,
) -> String {
    let mut out = String::from("vcontract-vk v1\n");
    for &e in &vk.v_p_io {
        out.push_str(&hex_line("vp", &backend.g1_encode(e)));
    }
    for &e in &vk.w_q_io {
        out.push_str(&hex_line("wq", &backend.g2_encode(e)));
    }
    for &e in &vk.y_p_io {
        out.push_str(&hex_line("yp", &backend.g1_encode(e)));
    }
    out.push_str(&hex_line("tp", &backend.g1_encode(vk.t_p)));
    out.push_str(&hex_line("p", &backend.g1_encode(vk.p)));
    out.push_str(&hex_line("q", &backend.g2_encode(vk.q)));
    out
}

/// Renders a proof.
pub fn serialize_proof<B: BilinearBackend>(
    backend: &B,
    proof: &Proof<B::G1, B::G2>,
) -> String {
    let mut out = String::from("vcontract-proof v1\n");
    out.push_str(&hex_line("vmid", &backend.g1_encode(proof.v_mid)));
    out.push_str(&hex_line("wmid", &backend.g2_encode(proof.w_mid)));
    out.push_str(&hex_line("ymid", &backend.g1_encode(proof.y_mid)));
    out.push_str(&hex_line("h", &backend.g2_encode(proof.h)));
    out
}

struct Lines<'t> {
    rows: Vec<(&'t str, Vec<u8>)>,
}

fn decode_lines<'t>(text: &'t str, magic: &str) -> Result<Lines<'t>, CryptoError> {
    let bad = |msg: String| CryptoError::Parse(msg);
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(magic) {
        return Err(bad(format!("expected header \"{magic}\"")));
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines.enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (label, value) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("line {}: expected \"label hex\"", idx + 2)))?;
        let bytes = hex::decode(value.trim())
            .map_err(|_| bad(format!("line {}: invalid hex", idx + 2)))?;
        rows.push((label, bytes));
    }
    Ok(Lines { rows })
}

impl<'t> Lines<'t> {
    fn take_g1<B: BilinearBackend>(
        &mut self,
        backend: &B,
        label: &str,
    ) -> Result<Vec<B::G1>, CryptoError> {
        self.take(label, |bytes| backend.g1_decode(bytes))
    }

    fn take_g2<B: BilinearBackend>(
        &mut self,
        backend: &B,
        label: &str,
    ) -> Result<Vec<B::G2>, CryptoError> {
        self.take(label, |bytes| backend.g2_decode(bytes))
    }

    fn take<T>(
        &mut self,
        label: &str,
        decode: impl Fn(&[u8]) -> Option<T>,
    ) -> Result<Vec<T>, CryptoError> {
        let mut out = Vec::new();
        let mut rest = Vec::new();
        for (l, bytes) in self.rows.drain(..) {
            if l == label {
                let e = decode(&bytes).ok_or_else(|| {
                    CryptoError::Parse(format!("\"{label}\" element is not a group member"))
                })?;
                out.push(e);
            } else {
                rest.push((l, bytes));
            }
        }
        self.rows = rest;
        Ok(out)
    }

    fn finish(self) -> Result<(), CryptoError> {
        match self.rows.first() {
            None => Ok(()),
            Some((label, _)) => {
                Err(CryptoError::Parse(format!("unexpected row \"{label}\"")))
            }
        }
    }
}

fn exactly_one<T>(mut v: Vec<T>, label: &str) -> Result<T, CryptoError> {
    if v.len() != 1 {
        return Err(CryptoError::Parse(format!(
            "expected exactly one \"{label}\" row, found {}",
            v.len()
        )));
    }
    Ok(v.pop().unwrap())
}

/// Parses the text produced by [`serialize_ek`].
pub fn parse_ek<B: BilinearBackend>(
    backend: &B,
    text: &str,
) -> Result<EvaluationKey<B::G1, B::G2>, CryptoError> {
    let mut lines = decode_lines(text, "vcontract-ek v1")?;
    let ek = EvaluationKey {
        v_p: lines.take_g1(backend, "vp")?,
        w_q: lines.take_g2(backend, "wq")?,
        y_p: lines.take_g1(backend, "yp")?,
        s_q_powers: lines.take_g2(backend, "sq")?,
    };
    lines.finish()?;
    if ek.w_q.len() != ek.v_p.len() || ek.y_p.len() != ek.v_p.len() || ek.s_q_powers.is_empty() {
        return Err(CryptoError::Parse("inconsistent evaluation key sizes".into()));
    }
    Ok(ek)
}

/// Parses the text produced by [`serialize_vk`].
pub fn parse_vk<B: BilinearBackend>(
    backend: &B,
    text: &str,
) -> Result<VerificationKey<B::G1, B::G2>, CryptoError> {
    let mut lines = decode_lines(text, "vcontract-vk v1")?;
    let vk = VerificationKey {
        v_p_io: lines.take_g1(backend, "vp")?,
        w_q_io: lines.take_g2(backend, "wq")?,
        y_p_io: lines.take_g1(backend, "yp")?,
        t_p: exactly_one(lines.take_g1(backend, "tp")?, "tp")?,
        p: exactly_one(lines.take_g1(backend, "p")?, "p")?,
        q: exactly_one(lines.take_g2(backend, "q")?, "q")?,
    };
    lines.finish()?;
    if vk.w_q_io.len() != vk.v_p_io.len() || vk.y_p_io.len() != vk.v_p_io.len() {
        return Err(CryptoError::Parse("inconsistent verification key sizes".into()));
    }
    Ok(vk)
}

/// Parses the text produced by [`serialize_proof`].
pub fn parse_proof<B: BilinearBackend>(
    backend: &B,
    text: &str,
) -> Result<Proof<B::G1, B::G2>, CryptoError> {
    let mut lines = decode_lines(text, "vcontract-proof v1")?;
    let proof = Proof {
        v_mid: exactly_one(lines.take_g1(backend, "vmid")?, "vmid")?,
        w_mid: exactly_one(lines.take_g2(backend, "wmid")?, "wmid")?,
        y_mid: exactly_one(lines.take_g1(backend, "ymid")?, "ymid")?,
        h: exactly_one(lines.take_g2(backend, "h")?, "h")?,
    };
    lines.finish()?;
    Ok(proof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{lower, Gate, GateKind};
    use crate::field::DEFAULT_MODULUS;
    use crate::frontend::{compile_str, FlattenConfig};
    use crate::qap::{build_qap, witness};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn single_mul_qap() -> (crate::circuit::Circuit, Qap) {
        let c = crate::circuit::Circuit {
            bit_width: 4,
            field: Field::new(DEFAULT_MODULUS).unwrap(),
            num_wires: 3,
            gates: vec![Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![2] }],
            input_wires: vec![0, 1],
            output_wires: vec![2],
        };
        let q = build_qap(&c).unwrap();
        (c, q)
    }

    fn listing_qap() -> (crate::circuit::Circuit, Qap) {
        let src = "\
struct in_T { unsigned int i1; unsigned int i2; };
struct out_T { unsigned int o; };
void contract(struct in_T *in, struct out_T *out) {
  out->o = in->i1 + in->i2;
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(8)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        (c, q)
    }

    #[test]
    fn keygen_size_laws_and_secret() {
        let (_, q) = single_mul_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let (ek, vk, s) = keygen(&q, &backend, &mut rng).unwrap();
        assert_eq!(ek.v_p.len(), q.k);
        assert_eq!(ek.w_q.len(), q.k);
        assert_eq!(ek.y_p.len(), q.k);
        assert_eq!(ek.s_q_powers.len(), q.d + 1);
        assert_eq!(vk.v_p_io.len(), q.n_io);
        assert_ne!(q.t.eval(s), 0, "t(s) must be nonzero");
    }

    #[test]
    fn mock_key_entries_are_polynomial_evaluations() {
        let (_, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let (ek, vk, s) = keygen(&q, &backend, &mut rng).unwrap();
        for (i, poly) in q.v.iter().enumerate() {
            assert_eq!(ek.v_p[i], poly.eval(s), "vP[{i}] is v_i(s) under the unit generator");
        }
        assert_eq!(vk.t_p, q.t.eval(s));
        assert_eq!(ek.s_q_powers[2], q.field.mul(s, s));
    }

    #[test]
    fn prove_verify_completeness() {
        let (c, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        for (i1, i2) in [(0u64, 0u64), (2, 3), (255, 255), (17, 200)] {
            let asg = c.evaluate(&[i1, i2]).unwrap();
            let a = witness(&c, &asg).unwrap();
            let proof = prove(&ek, &q, &a, &backend).unwrap();
            let io = io_vector(q.n_io, &[i1, i2], &[(i1 + i2) & 0xff]).unwrap();
            assert!(verify(&vk, &io, &proof, &backend).unwrap(), "inputs {i1},{i2}");
        }
    }

    #[test]
    fn tampered_io_and_proof_rejected() {
        let (c, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[2, 3]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let proof = prove(&ek, &q, &a, &backend).unwrap();
        let io = io_vector(q.n_io, &[2, 3], &[5]).unwrap();
        assert!(verify(&vk, &io, &proof, &backend).unwrap());

        let bad_io = io_vector(q.n_io, &[2, 3], &[6]).unwrap();
        assert!(!verify(&vk, &bad_io, &proof, &backend).unwrap());

        let mut state = 99u64;
        for trial in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let delta = 1 + state % (DEFAULT_MODULUS - 1);
            let mut bad = proof;
            match trial % 4 {
                0 => bad.v_mid = q.field.add(bad.v_mid, delta),
                1 => bad.w_mid = q.field.add(bad.w_mid, delta),
                2 => bad.y_mid = q.field.add(bad.y_mid, delta),
                _ => bad.h = q.field.add(bad.h, delta),
            }
            assert!(!verify(&vk, &io, &bad, &backend).unwrap(), "trial {trial}");
        }
    }

    #[test]
    fn inconsistent_witness_cannot_be_proven() {
        let (c, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let (ek, _, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[10, 20]).unwrap();
        let mut a = witness(&c, &asg).unwrap();
        a[q.n_io] = q.field.add(a[q.n_io], 1);
        assert!(matches!(
            prove(&ek, &q, &a, &backend),
            Err(CryptoError::InvalidWitness(_))
        ));
    }

    #[test]
    fn zero_internal_region_gives_identity_mid() {
        let (c, q) = single_mul_qap();
        assert_eq!(q.n_io, q.k, "single gate: all variables public");
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[2, 3]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let proof = prove(&ek, &q, &a, &backend).unwrap();
        assert_eq!(proof.v_mid, backend.g1_identity());
        assert_eq!(proof.w_mid, backend.g2_identity());
        let io = io_vector(q.n_io, &[2, 3], &[6]).unwrap();
        assert!(verify(&vk, &io, &proof, &backend).unwrap());
    }

    #[test]
    fn backend_substitutability() {
        // A backend with non-unit generators must accept the same pipeline.
        let (c, q) = listing_qap();
        let backend = MockBackend::with_generators(DEFAULT_MODULUS, 7, 11).unwrap();
        let mut rng = StdRng::seed_from_u64(13);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[100, 27]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let proof = prove(&ek, &q, &a, &backend).unwrap();
        let io = io_vector(q.n_io, &[100, 27], &[127]).unwrap();
        assert!(verify(&vk, &io, &proof, &backend).unwrap());
        let bad_io = io_vector(q.n_io, &[100, 27], &[128]).unwrap();
        assert!(!verify(&vk, &bad_io, &proof, &backend).unwrap());
    }

    #[test]
    fn malformed_proof_elements_are_reported() {
        let (c, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(17);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let asg = c.evaluate(&[1, 2]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let mut proof = prove(&ek, &q, &a, &backend).unwrap();
        proof.h = u64::MAX;
        let io = io_vector(q.n_io, &[1, 2], &[3]).unwrap();
        assert_eq!(
            verify(&vk, &io, &proof, &backend),
            Err(CryptoError::MalformedProof)
        );
    }

    #[test]
    fn serialization_round_trips() {
        let (_, q) = listing_qap();
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        let mut rng = StdRng::seed_from_u64(23);
        let (ek, vk, _) = keygen(&q, &backend, &mut rng).unwrap();
        let ek_text = serialize_ek(&backend, &ek);
        let vk_text = serialize_vk(&backend, &vk);
        assert_eq!(parse_ek(&backend, &ek_text).unwrap(), ek);
        assert_eq!(parse_vk(&backend, &vk_text).unwrap(), vk);
        assert!(ek_text.starts_with("vcontract-ek v1\n"));
        assert!(vk_text.starts_with("vcontract-vk v1\n"));

        let c = listing_qap().0;
        let asg = c.evaluate(&[9, 9]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let proof = prove(&ek, &q, &a, &backend).unwrap();
        let proof_text = serialize_proof(&backend, &proof);
        assert_eq!(parse_proof(&backend, &proof_text).unwrap(), proof);
        // Lowercase hex, one labeled element per line.
        for line in proof_text.lines().skip(1) {
            let (_, value) = line.split_once(' ').unwrap();
            assert!(value.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        }
    }

    #[test]
    fn parse_rejects_malformed_text() {
        let backend = mock_backend(DEFAULT_MODULUS).unwrap();
        for text in [
            "not-a-key\n",
            "vcontract-proof v1\nvmid zz\n",
            "vcontract-proof v1\nvmid 0000000000000001\n",
            "vcontract-proof v1\nvmid 0000000000000001\nwmid 0000000000000001\nymid 0000000000000001\nh 0000000000000001\nextra 00\n",
        ] {
            assert!(
                matches!(parse_proof(&backend, text), Err(CryptoError::Parse(_))),
                "{text:?}"
            );
        }
        // An element at or above the group order is not a member.
        let too_big = format!("vcontract-proof v1\nvmid {}\n", hex::encode(u64::MAX.to_be_bytes()));
        assert!(matches!(
            parse_proof(&backend, &too_big),
            Err(CryptoError::Parse(_))
        ));
    }

    #[test]
    fn io_vector_appends_constant_slot() {
        assert_eq!(io_vector(4, &[2, 3], &[5]).unwrap(), vec![2, 3, 5, 1]);
        assert_eq!(io_vector(3, &[2, 3], &[5]).unwrap(), vec![2, 3, 5]);
        assert!(io_vector(6, &[2, 3], &[5]).is_err());
    }

    #[test]
    fn keygen_requires_matching_field() {
        let (_, q) = single_mul_qap();
        let backend = mock_backend(13).unwrap();
        let mut rng = StdRng::seed_from_u64(29);
        assert!(matches!(
            keygen(&q, &backend, &mut rng),
            Err(CryptoError::ScalarFieldMismatch { .. })
        ));
    }
}
