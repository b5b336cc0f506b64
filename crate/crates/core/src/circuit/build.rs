//! Lowering a [`FlatProgram`] to an arithmetic circuit.
//!
//! Every flat wire maps to a circuit wire holding its two's-complement bit
//! pattern as a field element. The builder tracks an exact upper bound for
//! each wire's honest value; a result is renormalized to `n` bits (EXPAND of
//! the low bits + COMPRESS) only when its bound reaches `2^n`, and any bound
//! reaching the field modulus is a hard error, so no honest evaluation ever
//! wraps around the field.
//!
//! Boolean machinery avoids large constants: NOT(x) is the low bit of x+1,
//! so logic lanes keep narrow widths and stay eligible for minimization.

use std::collections::{BTreeMap, BTreeSet};

use super::{Circuit, CircuitError, Gate, GateKind, WireId};
use crate::field::Field;
use crate::frontend::{FlatOp, FlatProgram};
use crate::twos;

/// Lowers a flat program to a circuit over the field of size `modulus`.
pub fn lower(prog: &FlatProgram, modulus: u64) -> Result<Circuit, CircuitError> {
    let field = Field::new(modulus)?;
    let n = prog.bit_width;
    if (1u128 << (2 * n)) >= modulus as u128 {
        return Err(CircuitError::FieldTooSmall { bit_width: n, modulus });
    }
    let signs = prog
        .wire_signs()
        .map_err(|e| CircuitError::Invalid(format!("flat program: {e}")))?;
    if prog.inputs.is_empty() {
        return Err(CircuitError::NoInputWire);
    }

    let mut b = Builder {
        field,
        n,
        num_wires: 0,
        gates: Vec::new(),
        width: Vec::new(),
        hi: Vec::new(),
        zero: 0,
        one: 0,
        consts: BTreeMap::new(),
        expand_cache: BTreeMap::new(),
        compress_cache: BTreeMap::new(),
        not_cache: BTreeMap::new(),
    };

    let mut map: BTreeMap<&str, WireId> = BTreeMap::new();
    let mut input_wires = Vec::new();
    for var in &prog.inputs {
        let w = b.fresh_input();
        map.insert(&var.name, w);
        input_wires.push(w);
    }
    b.synthesize_zero_one(input_wires[0])?;

    let bools = flat_bools(prog);
    for e in &prog.exprs {
        let get = |name: &str| map[name];
        let is_bool = |name: &str| bools.contains(name);
        let wire = match &e.op {
            FlatOp::Add(x, y) => {
                let s = b.push1(GateKind::Add, vec![get(x), get(y)])?;
                b.truncate(s)?
            }
            FlatOp::Sub(x, y) => b.sub_mod(get(x), get(y))?,
            FlatOp::Mul(x, y) => {
                let p = b.push1(GateKind::Mul, vec![get(x), get(y)])?;
                b.truncate(p)?
            }
            FlatOp::MulConst(x, c) => {
                let pattern = twos::mask(n, *c as u64);
                match pattern {
                    0 => b.zero,
                    1 => get(x),
                    _ => {
                        let p = b.mul_const(get(x), pattern)?;
                        b.truncate(p)?
                    }
                }
            }
            FlatOp::And(x, y) if is_bool(x) && is_bool(y) => b.bool_and(get(x), get(y))?,
            FlatOp::Or(x, y) if is_bool(x) && is_bool(y) => b.bool_or(get(x), get(y))?,
            FlatOp::Xor(x, y) if is_bool(x) && is_bool(y) => b.bool_xor(get(x), get(y))?,
            FlatOp::And(x, y) | FlatOp::Or(x, y) | FlatOp::Xor(x, y) => {
                let xb = b.bits_n(get(x))?;
                let yb = b.bits_n(get(y))?;
                let mut bits = Vec::with_capacity(n as usize);
                for (&xi, &yi) in xb.iter().zip(&yb) {
                    bits.push(match &e.op {
                        FlatOp::And(..) => b.bool_and(xi, yi)?,
                        FlatOp::Or(..) => b.bool_or(xi, yi)?,
                        _ => b.bool_xor(xi, yi)?,
                    });
                }
                b.compress(bits)?
            }
            FlatOp::Not(x) => {
                let xb = b.bits_n(get(x))?;
                let mut bits = Vec::with_capacity(n as usize);
                for &xi in &xb {
                    bits.push(b.bool_not(xi)?);
                }
                b.compress(bits)?
            }
            FlatOp::ShlConst(x, k) => {
                let p = b.mul_const(get(x), 1u64 << k)?;
                b.truncate(p)?
            }
            FlatOp::ShrConst(x, k) => {
                let bits = b.bits_n(get(x))?;
                let low = b.compress(bits[*k as usize..].to_vec())?;
                if signs[x.as_str()] {
                    // Arithmetic shift: replicate the sign bit into the top.
                    let sign = bits[n as usize - 1];
                    let pattern = ((1u64 << k) - 1) << (n - k);
                    let hi = b.mul_const(sign, pattern)?;
                    b.push1(GateKind::Add, vec![low, hi])?
                } else {
                    low
                }
            }
            FlatOp::Lt(x, y) => b.order_cmp(get(x), get(y), signed_cmp(&signs, x, y), false)?,
            FlatOp::Gt(x, y) => b.order_cmp(get(y), get(x), signed_cmp(&signs, x, y), false)?,
            FlatOp::Le(x, y) => b.order_cmp(get(x), get(y), signed_cmp(&signs, x, y), true)?,
            FlatOp::Ge(x, y) => b.order_cmp(get(y), get(x), signed_cmp(&signs, x, y), true)?,
            FlatOp::Eq(x, y) => b.eq_gadget(get(x), get(y))?,
            FlatOp::Neq(x, y) => {
                let eq = b.eq_gadget(get(x), get(y))?;
                b.bool_not(eq)?
            }
            FlatOp::Mux(c, x, y) => {
                let cond = if is_bool(c) {
                    get(c)
                } else {
                    // C semantics select on "condition != 0".
                    let bits = b.bits_n(get(c))?;
                    let iz = b.all_zero(&bits)?;
                    b.bool_not(iz)?
                };
                // cond·x + (1−cond)·y, realized as y + cond·(x−y mod 2^n).
                let d = b.sub_mod(get(x), get(y))?;
                let cd = b.push1(GateKind::Mul, vec![cond, d])?;
                let s = b.push1(GateKind::Add, vec![get(y), cd])?;
                b.truncate(s)?
            }
            FlatOp::Const(c, _) => b.const_wire(twos::mask(n, *c as u64))?,
            FlatOp::Copy(x) => get(x),
        };
        map.insert(&e.dest, wire);
    }

    let output_wires = prog.outputs.iter().map(|v| map[v.name.as_str()]).collect();
    let circuit = Circuit {
        bit_width: n,
        field,
        num_wires: b.num_wires,
        gates: b.gates,
        input_wires,
        output_wires,
    };
    debug_assert_eq!(circuit.validate(), Ok(()));
    Ok(circuit)
}

fn signed_cmp(signs: &BTreeMap<String, bool>, x: &str, y: &str) -> bool {
    signs[x] && signs[y]
}

/// Flat wires that provably carry only 0 or 1 — eligible for one-gate
/// Boolean gadgets instead of full bit decomposition.
fn flat_bools(prog: &FlatProgram) -> BTreeSet<String> {
    let mut bools: BTreeSet<String> = BTreeSet::new();
    for e in &prog.exprs {
        let is = match &e.op {
            FlatOp::Lt(..)
            | FlatOp::Gt(..)
            | FlatOp::Le(..)
            | FlatOp::Ge(..)
            | FlatOp::Eq(..)
            | FlatOp::Neq(..) => true,
            FlatOp::Const(c, _) => *c == 0 || *c == 1,
            FlatOp::And(a, b) | FlatOp::Or(a, b) | FlatOp::Xor(a, b) => {
                bools.contains(a) && bools.contains(b)
            }
            FlatOp::Mux(_, a, b) => bools.contains(a) && bools.contains(b),
            FlatOp::Copy(a) => bools.contains(a),
            _ => false,
        };
        if is {
            bools.insert(e.dest.clone());
        }
    }
    bools
}

struct Builder {
    field: Field,
    n: u32,
    num_wires: usize,
    gates: Vec<Gate>,
    width: Vec<u32>,
    hi: Vec<u128>,
    zero: WireId,
    one: WireId,
    consts: BTreeMap<u64, WireId>,
    expand_cache: BTreeMap<(WireId, Vec<u32>), Vec<WireId>>,
    compress_cache: BTreeMap<Vec<WireId>, WireId>,
    not_cache: BTreeMap<WireId, WireId>,
}

impl Builder {
    fn fresh_input(&mut self) -> WireId {
        let id = self.num_wires;
        self.num_wires += 1;
        self.width.push(self.n);
        self.hi.push((1u128 << self.n) - 1);
        id
    }

    /// Appends a gate, allocating output wires and maintaining the declared
    /// widths and exact value bounds. A bound reaching the modulus means the
    /// field cannot carry the intermediate value exactly.
    fn push(&mut self, kind: GateKind, inputs: Vec<WireId>) -> Result<Vec<WireId>, CircuitError> {
        let cap = 64u32.min(64 - self.field.modulus().leading_zeros());
        let (widths, his): (Vec<u32>, Vec<u128>) = match &kind {
            GateKind::Add => {
                let w = (self.width[inputs[0]].max(self.width[inputs[1]]) + 1).min(cap);
                (vec![w], vec![self.hi[inputs[0]] + self.hi[inputs[1]]])
            }
            GateKind::Mul => {
                let w = (self.width[inputs[0]] + self.width[inputs[1]]).min(cap);
                (vec![w], vec![self.hi[inputs[0]] * self.hi[inputs[1]]])
            }
            GateKind::MulConst(c) => {
                let w = (self.width[inputs[0]] + (64 - c.leading_zeros())).min(cap);
                (vec![w], vec![self.hi[inputs[0]] * *c as u128])
            }
            GateKind::Expand(positions) => {
                (vec![1; positions.len()], vec![1; positions.len()])
            }
            GateKind::Compress => {
                let k = inputs.len() as u32;
                (vec![k], vec![(1u128 << k) - 1])
            }
            GateKind::Zero => (vec![1], vec![0]),
            GateKind::One => (vec![1], vec![1]),
        };
        for &h in &his {
            if h >= self.field.modulus() as u128 {
                return Err(CircuitError::FieldTooSmall {
                    bit_width: self.n,
                    modulus: self.field.modulus(),
                });
            }
        }
        let outs: Vec<WireId> = (0..widths.len()).map(|i| self.num_wires + i).collect();
        self.num_wires += outs.len();
        self.width.extend(widths);
        self.hi.extend(his);
        self.gates.push(Gate { kind, inputs, outputs: outs.clone() });
        Ok(outs)
    }

    fn push1(&mut self, kind: GateKind, inputs: Vec<WireId>) -> Result<WireId, CircuitError> {
        Ok(self.push(kind, inputs)?[0])
    }

    fn mul_const(&mut self, a: WireId, c: u64) -> Result<WireId, CircuitError> {
        self.push1(GateKind::MulConst(self.field.reduce(c)), vec![a])
    }

    fn synthesize_zero_one(&mut self, any_input: WireId) -> Result<(), CircuitError> {
        self.zero = self.push1(GateKind::Zero, vec![any_input])?;
        self.one = self.push1(GateKind::One, vec![self.zero])?;
        Ok(())
    }

    /// A wire holding the constant `pattern`, built once per circuit:
    /// 0 and 1 are always present, further constants hang off the one-wire.
    fn const_wire(&mut self, pattern: u64) -> Result<WireId, CircuitError> {
        match pattern {
            0 => Ok(self.zero),
            1 => Ok(self.one),
            c => {
                if let Some(&w) = self.consts.get(&c) {
                    return Ok(w);
                }
                let w = self.mul_const(self.one, c)?;
                self.consts.insert(c, w);
                Ok(w)
            }
        }
    }

    fn expand(&mut self, a: WireId, positions: Vec<u32>) -> Result<Vec<WireId>, CircuitError> {
        let key = (a, positions.clone());
        if let Some(bits) = self.expand_cache.get(&key) {
            return Ok(bits.clone());
        }
        let bits = self.push(GateKind::Expand(positions), vec![a])?;
        self.expand_cache.insert(key, bits.clone());
        Ok(bits)
    }

    fn compress(&mut self, bits: Vec<WireId>) -> Result<WireId, CircuitError> {
        if let Some(&w) = self.compress_cache.get(&bits) {
            return Ok(w);
        }
        let w = self.push1(GateKind::Compress, bits.clone())?;
        self.compress_cache.insert(bits, w);
        Ok(w)
    }

    /// All `n` bits of a value wire, least significant first. Positions past
    /// the wire's declared width are provably zero and map to the zero wire.
    fn bits_n(&mut self, a: WireId) -> Result<Vec<WireId>, CircuitError> {
        debug_assert!(self.hi[a] < (1u128 << self.n));
        let w = self.width[a].min(self.n);
        let mut bits = self.expand(a, (0..w).collect())?;
        bits.resize(self.n as usize, self.zero);
        Ok(bits)
    }

    /// Renormalizes to the low `n` bits when the value bound requires it.
    fn truncate(&mut self, a: WireId) -> Result<WireId, CircuitError> {
        if self.hi[a] < (1u128 << self.n) {
            return Ok(a);
        }
        let bits = self.expand(a, (0..self.n).collect())?;
        self.compress(bits)
    }

    /// (x − y) mod 2^n: x + y·(2^n − 1) leaves the low n bits equal to the
    /// difference (the borrow lands at bit n and above), then renormalize.
    fn sub_mod(&mut self, x: WireId, y: WireId) -> Result<WireId, CircuitError> {
        let neg = self.mul_const(y, (1u64 << self.n) - 1)?;
        let s = self.push1(GateKind::Add, vec![x, neg])?;
        self.truncate(s)
    }

    /// NOT on a {0,1} wire: 1−a, realized as the low bit of a + 1 so the
    /// result is itself a declared 1-bit wire.
    fn bool_not(&mut self, a: WireId) -> Result<WireId, CircuitError> {
        if a == self.zero {
            return Ok(self.one);
        }
        if a == self.one {
            return Ok(self.zero);
        }
        if let Some(&w) = self.not_cache.get(&a) {
            return Ok(w);
        }
        let inc = self.push1(GateKind::Add, vec![a, self.one])?;
        let w = self.expand(inc, vec![0])?[0];
        self.not_cache.insert(a, w);
        Ok(w)
    }

    /// AND on {0,1} wires: the product.
    fn bool_and(&mut self, a: WireId, b: WireId) -> Result<WireId, CircuitError> {
        if a == self.zero || b == self.zero {
            return Ok(self.zero);
        }
        if a == self.one {
            return Ok(b);
        }
        if b == self.one {
            return Ok(a);
        }
        self.push1(GateKind::Mul, vec![a, b])
    }

    /// OR on {0,1} wires: 1 − (1−a)(1−b).
    fn bool_or(&mut self, a: WireId, b: WireId) -> Result<WireId, CircuitError> {
        if a == self.one || b == self.one {
            return Ok(self.one);
        }
        if a == self.zero {
            return Ok(b);
        }
        if b == self.zero {
            return Ok(a);
        }
        let na = self.bool_not(a)?;
        let nb = self.bool_not(b)?;
        let m = self.push1(GateKind::Mul, vec![na, nb])?;
        self.bool_not(m)
    }

    /// XOR on {0,1} wires: (1−a)b + (1−b)a.
    fn bool_xor(&mut self, a: WireId, b: WireId) -> Result<WireId, CircuitError> {
        if a == self.zero {
            return Ok(b);
        }
        if b == self.zero {
            return Ok(a);
        }
        if a == self.one {
            return self.bool_not(b);
        }
        if b == self.one {
            return self.bool_not(a);
        }
        let na = self.bool_not(a)?;
        let nb = self.bool_not(b)?;
        let m1 = self.push1(GateKind::Mul, vec![na, b])?;
        let m2 = self.push1(GateKind::Mul, vec![nb, a])?;
        self.push1(GateKind::Add, vec![m1, m2])
    }

    /// 1 iff every bit wire is 0: the product of the bit negations.
    fn all_zero(&mut self, bits: &[WireId]) -> Result<WireId, CircuitError> {
        let mut acc = self.one;
        for &b in bits {
            let nb = self.bool_not(b)?;
            acc = self.bool_and(acc, nb)?;
        }
        Ok(acc)
    }

    /// Widens a comparison operand to m = n+1 bits. Unsigned values already
    /// fit; signed patterns get the sign bit replicated at position n. Wires
    /// provably too narrow to carry a sign bit pass through unchanged.
    fn extend(&mut self, a: WireId, signed: bool) -> Result<WireId, CircuitError> {
        if !signed || self.hi[a] < (1u128 << (self.n - 1)) {
            return Ok(a);
        }
        let sign = self.expand(a, vec![self.n - 1])?[0];
        let hi = self.mul_const(sign, 1u64 << self.n)?;
        self.push1(GateKind::Add, vec![a, hi])
    }

    /// x < y (or x ≤ y with `or_equal`) on n-bit operands: form the m-bit
    /// difference (m = n+1, always representable) and pick off its sign bit
    /// with an EXPAND that keeps only the bits the gadget needs.
    fn order_cmp(
        &mut self,
        x: WireId,
        y: WireId,
        signed: bool,
        or_equal: bool,
    ) -> Result<WireId, CircuitError> {
        let m = self.n + 1;
        let xe = self.extend(x, signed)?;
        let ye = self.extend(y, signed)?;
        let neg = self.mul_const(ye, (1u64 << m) - 1)?;
        let diff = self.push1(GateKind::Add, vec![xe, neg])?;
        if !or_equal {
            return Ok(self.expand(diff, vec![m - 1])?[0]);
        }
        let bits = self.expand(diff, (0..m).collect())?;
        let lt = bits[m as usize - 1];
        let eq = self.all_zero(&bits)?;
        self.bool_or(lt, eq)
    }

    /// x == y: all low n bits of the difference are zero.
    fn eq_gadget(&mut self, x: WireId, y: WireId) -> Result<WireId, CircuitError> {
        let neg = self.mul_const(y, (1u64 << self.n) - 1)?;
        let diff = self.push1(GateKind::Add, vec![x, neg])?;
        let bits = self.expand(diff, (0..self.n).collect())?;
        self.all_zero(&bits)
    }
}
