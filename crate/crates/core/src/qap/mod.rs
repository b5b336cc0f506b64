//! Quadratic arithmetic programs: polynomial families encoding a circuit.
//!
//! A circuit with d multiplication constraints becomes three families of
//! polynomials v, w, y over shared roots 1..d, one polynomial per variable,
//! plus the vanishing target t(x) = Π(x−r). A witness vector a is valid iff
//! t divides p(x) = (Σa·v)(Σa·w) − (Σa·y).
//!
//! Variable layout: circuit inputs first, then one slot per circuit output,
//! then — when any constraint needs a constant — a trailing one-slot that
//! verifiers bind to 1. Remaining variables (multiplication outputs,
//! expansion bits including non-retained high bits) are internal. Linear
//! gates never allocate variables: ADD, MUL-CONST and COMPRESS fold into the
//! linear combinations feeding multiplication constraints, ZERO folds to the
//! empty combination, ONE to the one-slot.

mod poly;

pub use poly::{interpolate, lagrange_basis, FieldPoly};

use std::collections::BTreeMap;

use crate::circuit::{Assignment, Circuit, GateKind, WireId};
use crate::field::Field;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QapError {
    #[error("duplicate interpolation abscissa {0}")]
    DuplicateAbscissa(u64),
    #[error("polynomial division by zero")]
    DivisionByZeroPoly,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("circuit yields no multiplication constraints")]
    NoMultiplicationGates,
    #[error("witness inconsistent with the circuit: {0}")]
    InconsistentAssignment(String),
    #[error("expected {expected} elements, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("p(x) is not divisible by t(x); remainder coefficients {remainder:?}")]
    NotDivisible { remainder: Vec<u64> },
    #[error("malformed QAP text: {0}")]
    Parse(String),
}

/// A quadratic arithmetic program over a prime field.
///
/// Variables 0..n_io are public (inputs, outputs, optional one-slot); the
/// rest are internal. All polynomial degrees are at most d−1 except t,
/// which is monic of degree d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qap {
    pub field: Field,
    pub v: Vec<FieldPoly>,
    pub w: Vec<FieldPoly>,
    pub y: Vec<FieldPoly>,
    pub t: FieldPoly,
    pub roots: Vec<u64>,
    pub n_io: usize,
    pub k: usize,
    pub d: usize,
}

/// Where a variable's witness value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarSource {
    /// The value of a circuit wire.
    Wire(WireId),
    /// Bit `pos` of a wire's value (expansion bits not kept as wires).
    BitOf(WireId, u32),
    /// The constant 1.
    One,
}

/// Linear combination of variables (by handle) with field coefficients.
type Combo = BTreeMap<usize, u64>;

struct Layout {
    handles: Vec<VarSource>,
    /// (v, w, y) rows over handles; one multiplication constraint each.
    constraints: Vec<[Combo; 3]>,
    /// Handles in variable order, public slots first.
    order: Vec<usize>,
    n_io: usize,
}

struct LayoutBuilder {
    field: Field,
    handles: Vec<VarSource>,
    constraints: Vec<[Combo; 3]>,
    one: Option<usize>,
}

impl LayoutBuilder {
    fn alloc(&mut self, src: VarSource) -> usize {
        self.handles.push(src);
        self.handles.len() - 1
    }

    fn one_handle(&mut self) -> usize {
        match self.one {
            Some(h) => h,
            None => {
                let h = self.alloc(VarSource::One);
                self.one = Some(h);
                h
            }
        }
    }

    fn merge(&self, a: &Combo, b: &Combo) -> Combo {
        let mut out = a.clone();
        for (&h, &c) in b {
            let sum = self.field.add(*out.get(&h).unwrap_or(&0), c);
            if sum == 0 {
                out.remove(&h);
            } else {
                out.insert(h, sum);
            }
        }
        out
    }

    fn scale(&self, a: &Combo, c: u64) -> Combo {
        let c = self.field.reduce(c);
        if c == 0 {
            return Combo::new();
        }
        a.iter().map(|(&h, &x)| (h, self.field.mul(x, c))).collect()
    }
}

fn unit(h: usize) -> Combo {
    BTreeMap::from([(h, 1)])
}

fn layout(c: &Circuit) -> Result<Layout, QapError> {
    c.validate().map_err(|e| QapError::InvalidCircuit(e.to_string()))?;
    let widths = c.widths();
    let mut b = LayoutBuilder {
        field: c.field,
        handles: Vec::new(),
        constraints: Vec::new(),
        one: None,
    };
    let f = b.field;

    let mut combos: Vec<Combo> = vec![Combo::new(); c.num_wires];
    let mut inputs = Vec::new();
    for &wire in &c.input_wires {
        let h = b.alloc(VarSource::Wire(wire));
        combos[wire] = unit(h);
        inputs.push(h);
    }

    for g in &c.gates {
        match &g.kind {
            GateKind::Add => {
                combos[g.outputs[0]] = b.merge(&combos[g.inputs[0]], &combos[g.inputs[1]]);
            }
            GateKind::MulConst(c) => {
                combos[g.outputs[0]] = b.scale(&combos[g.inputs[0]], *c);
            }
            GateKind::Compress => {
                let mut acc = Combo::new();
                for (i, &bit) in g.inputs.iter().enumerate() {
                    let weight = f.pow(2, i as u64);
                    acc = b.merge(&acc, &b.scale(&combos[bit], weight));
                }
                combos[g.outputs[0]] = acc;
            }
            GateKind::Zero => {
                combos[g.outputs[0]] = Combo::new();
            }
            GateKind::One => {
                let h = b.one_handle();
                combos[g.outputs[0]] = unit(h);
            }
            GateKind::Mul => {
                let h = b.alloc(VarSource::Wire(g.outputs[0]));
                let row = [
                    combos[g.inputs[0]].clone(),
                    combos[g.inputs[1]].clone(),
                    unit(h),
                ];
                b.constraints.push(row);
                combos[g.outputs[0]] = unit(h);
            }
            GateKind::Expand(positions) => {
                let src = g.inputs[0];
                let w = widths[src];
                // One variable per bit of the source: retained positions use
                // the produced wires, the rest become internal phantom bits.
                let mut bit_handles: BTreeMap<u32, usize> = BTreeMap::new();
                for (i, &pos) in positions.iter().enumerate() {
                    let h = b.alloc(VarSource::Wire(g.outputs[i]));
                    combos[g.outputs[i]] = unit(h);
                    bit_handles.insert(pos, h);
                }
                for pos in 0..w {
                    if !bit_handles.contains_key(&pos) {
                        bit_handles.insert(pos, b.alloc(VarSource::BitOf(src, pos)));
                    }
                }
                // a·(a−1) = 0 per bit, then the recomposition ties the bits
                // back to the source combination.
                let one = b.one_handle();
                for (_, &h) in &bit_handles {
                    let mut w_row = unit(h);
                    w_row.insert(one, f.neg(1));
                    b.constraints.push([unit(h), w_row, Combo::new()]);
                }
                let mut recomp = Combo::new();
                for (&pos, &h) in &bit_handles {
                    let weight = f.pow(2, pos as u64);
                    recomp = b.merge(&recomp, &b.scale(&unit(h), weight));
                }
                b.constraints.push([recomp, unit(one), combos[src].clone()]);
            }
        }
    }

    // Public slots: inputs, then one slot per output. An output whose
    // combination is exactly one unclaimed variable promotes that variable
    // into the slot; anything else gets a fresh variable and a binding
    // constraint (out-combination · 1 = variable).
    let mut io = inputs;
    let mut claimed: std::collections::BTreeSet<usize> = io.iter().copied().collect();
    if let Some(h) = b.one {
        claimed.insert(h);
    }
    for &wire in &c.output_wires {
        let combo = &combos[wire];
        let reusable = match combo.iter().next() {
            Some((&h, &1)) if combo.len() == 1 => (!claimed.contains(&h)).then_some(h),
            _ => None,
        };
        let h = match reusable {
            Some(h) => h,
            None => {
                let h = b.alloc(VarSource::Wire(wire));
                let one = b.one_handle();
                b.constraints.push([combo.clone(), unit(one), unit(h)]);
                h
            }
        };
        io.push(h);
        claimed.insert(h);
    }
    if let Some(h) = b.one {
        io.push(h);
    }

    if b.constraints.is_empty() {
        return Err(QapError::NoMultiplicationGates);
    }

    let n_io = io.len();
    let mut order = io;
    let mut placed = vec![false; b.handles.len()];
    for &h in &order {
        placed[h] = true;
    }
    for h in 0..b.handles.len() {
        if !placed[h] {
            order.push(h);
        }
    }
    Ok(Layout {
        handles: b.handles,
        constraints: b.constraints,
        order,
        n_io,
    })
}

/// Builds the QAP of a circuit: roots 1..d (one per multiplication
/// constraint, in constraint order), t as their monic vanishing polynomial,
/// and v/w/y by interpolation over the constraint coefficient tables.
pub fn build_qap(c: &Circuit) -> Result<Qap, QapError> {
    let lay = layout(c)?;
    let f = c.field;
    let d = lay.constraints.len();
    let k = lay.order.len();
    let roots: Vec<u64> = (1..=d as u64).collect();
    let basis = lagrange_basis(f, &roots)?;

    let mut index_of = vec![usize::MAX; lay.handles.len()];
    for (i, &h) in lay.order.iter().enumerate() {
        index_of[h] = i;
    }

    let mut families = [
        vec![FieldPoly::zero(f); k],
        vec![FieldPoly::zero(f); k],
        vec![FieldPoly::zero(f); k],
    ];
    for (j, row) in lay.constraints.iter().enumerate() {
        for (family, combo) in families.iter_mut().zip(row) {
            for (&h, &coeff) in combo {
                let i = index_of[h];
                family[i] = family[i].add(&basis[j].scale(coeff));
            }
        }
    }
    let [v, w, y] = families;

    Ok(Qap {
        field: f,
        v,
        w,
        y,
        t: FieldPoly::vanishing(f, &roots),
        roots,
        n_io: lay.n_io,
        k,
        d,
    })
}

/// Extracts the witness vector from a circuit assignment, ordered to match
/// [`build_qap`]'s variable layout (public slots first).
pub fn witness(c: &Circuit, asg: &Assignment) -> Result<Vec<u64>, QapError> {
    c.validate_assignment(asg)
        .map_err(|e| QapError::InconsistentAssignment(e.to_string()))?;
    let lay = layout(c)?;
    Ok(lay
        .order
        .iter()
        .map(|&h| match lay.handles[h] {
            VarSource::Wire(w) => asg.value(w),
            VarSource::BitOf(w, pos) => (asg.value(w) >> pos) & 1,
            VarSource::One => 1,
        })
        .collect())
}

/// p(x) = (Σ a_i·v_i)(Σ a_i·w_i) − (Σ a_i·y_i).
pub fn compute_p(q: &Qap, a: &[u64]) -> Result<FieldPoly, QapError> {
    if a.len() != q.k {
        return Err(QapError::DimensionMismatch { expected: q.k, got: a.len() });
    }
    let f = q.field;
    let sum = |family: &[FieldPoly]| {
        family
            .iter()
            .zip(a)
            .filter(|(_, &ai)| f.reduce(ai) != 0)
            .fold(FieldPoly::zero(f), |acc, (p, &ai)| acc.add(&p.scale(ai)))
    };
    let vs = sum(&q.v);
    let ws = sum(&q.w);
    let ys = sum(&q.y);
    Ok(vs.mul(&ws).sub(&ys))
}

/// h = p / t, succeeding only on exact division.
pub fn divide_by_t(p: &FieldPoly, t: &FieldPoly) -> Result<FieldPoly, QapError> {
    let (h, r) = p.divide(t)?;
    if r.is_zero() {
        Ok(h)
    } else {
        Err(QapError::NotDivisible { remainder: r.coeffs().to_vec() })
    }
}

/// Renders a QAP as line-oriented text: header (p, k, d, n_io, roots), the
/// target polynomial, then one coefficient row per variable and family.
pub fn serialize(q: &Qap) -> String {
    let nums = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    out.push_str(&format!("p {}\n", q.field.modulus()));
    out.push_str(&format!("k {}\n", q.k));
    out.push_str(&format!("d {}\n", q.d));
    out.push_str(&format!("n_io {}\n", q.n_io));
    out.push_str(&format!("roots {}\n", nums(&q.roots)));
    out.push_str(&format!("t {}\n", nums(q.t.coeffs())));
    for (name, family) in [("v", &q.v), ("w", &q.w), ("y", &q.y)] {
        for (i, poly) in family.iter().enumerate() {
            let coeffs = nums(poly.coeffs());
            if coeffs.is_empty() {
                out.push_str(&format!("{name} {i}\n"));
            } else {
                out.push_str(&format!("{name} {i} {coeffs}\n"));
            }
        }
    }
    out
}

/// Parses the text produced by [`serialize`].
pub fn parse(text: &str) -> Result<Qap, QapError> {
    let bad = |msg: String| QapError::Parse(msg);
    let mut header: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    let mut rows: BTreeMap<&str, Vec<(usize, Vec<u64>)>> =
        BTreeMap::from([("v", Vec::new()), ("w", Vec::new()), ("y", Vec::new())]);
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap();
        let nums: Vec<u64> = toks
            .map(|t| t.parse().map_err(|_| bad(format!("line {}: bad number \"{t}\"", idx + 1))))
            .collect::<Result<_, _>>()?;
        match key {
            "p" | "k" | "d" | "n_io" | "roots" | "t" => {
                header.insert(key, nums);
            }
            "v" | "w" | "y" => {
                if nums.is_empty() {
                    return Err(bad(format!("line {}: missing variable index", idx + 1)));
                }
                let family = rows.get_mut(key).unwrap();
                family.push((nums[0] as usize, nums[1..].to_vec()));
            }
            other => return Err(bad(format!("line {}: unknown row \"{other}\"", idx + 1))),
        }
    }
    let scalar = |key: &str| -> Result<u64, QapError> {
        match header.get(key).map(Vec::as_slice) {
            Some([x]) => Ok(*x),
            _ => Err(bad(format!("missing or malformed \"{key}\" header"))),
        }
    };
    let field = Field::new(scalar("p")?).map_err(|e| bad(e.to_string()))?;
    let k = scalar("k")? as usize;
    let d = scalar("d")? as usize;
    let n_io = scalar("n_io")? as usize;
    let roots = header.remove("roots").ok_or_else(|| bad("missing roots".into()))?;
    let t = FieldPoly::new(field, header.remove("t").ok_or_else(|| bad("missing t".into()))?);
    if roots.len() != d {
        return Err(bad(format!("expected {d} roots, found {}", roots.len())));
    }
    let mut families = Vec::new();
    for name in ["v", "w", "y"] {
        let mut family = vec![FieldPoly::zero(field); k];
        let entries = rows.remove(name).unwrap();
        if entries.len() != k {
            return Err(bad(format!("expected {k} \"{name}\" rows, found {}", entries.len())));
        }
        for (i, coeffs) in entries {
            if i >= k {
                return Err(bad(format!("\"{name}\" row index {i} out of range")));
            }
            family[i] = FieldPoly::new(field, coeffs);
        }
        families.push(family);
    }
    let y = families.pop().unwrap();
    let w = families.pop().unwrap();
    let v = families.pop().unwrap();
    Ok(Qap { field, v, w, y, t, roots, n_io, k, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{lower, Gate};
    use crate::field::DEFAULT_MODULUS;
    use crate::frontend::{compile_str, FlattenConfig};

    fn hand_circuit(gates: Vec<Gate>, n_in: usize, outputs: Vec<WireId>) -> Circuit {
        let num_wires = n_in + gates.iter().map(|g| g.outputs.len()).sum::<usize>();
        let c = Circuit {
            bit_width: 4,
            field: Field::new(DEFAULT_MODULUS).unwrap(),
            num_wires,
            gates,
            input_wires: (0..n_in).collect(),
            output_wires: outputs,
        };
        c.validate().unwrap();
        c
    }

    #[test]
    fn single_mul_gate_construction() {
        let c = hand_circuit(
            vec![Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![2] }],
            2,
            vec![2],
        );
        let q = build_qap(&c).unwrap();
        assert_eq!((q.k, q.d, q.n_io), (3, 1, 3));
        assert_eq!(q.roots, vec![1]);
        // t = x − 1.
        assert_eq!(q.t.coeffs(), &[DEFAULT_MODULUS - 1, 1]);
        // Constant polynomials: v picks the left input, w the right, y the
        // output, everything else identically zero.
        assert_eq!(q.v[0].coeffs(), &[1]);
        assert_eq!(q.w[1].coeffs(), &[1]);
        assert_eq!(q.y[2].coeffs(), &[1]);
        for i in 0..3 {
            assert_eq!(q.v[i].is_zero(), i != 0);
            assert_eq!(q.w[i].is_zero(), i != 1);
            assert_eq!(q.y[i].is_zero(), i != 2);
        }

        let asg = c.evaluate(&[5, 3]).unwrap();
        let a = witness(&c, &asg).unwrap();
        assert_eq!(a, vec![5, 3, 15]);
        let p = compute_p(&q, &a).unwrap();
        assert!(p.is_zero());
        assert!(divide_by_t(&p, &q.t).unwrap().is_zero());
    }

    #[test]
    fn two_mul_gates_vanishing_polynomial() {
        let c = hand_circuit(
            vec![
                Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![3] },
                Gate { kind: GateKind::Mul, inputs: vec![3, 2], outputs: vec![4] },
            ],
            3,
            vec![4],
        );
        let q = build_qap(&c).unwrap();
        assert_eq!(q.roots, vec![1, 2]);
        // t = (x−1)(x−2) = x² − 3x + 2.
        assert_eq!(q.t.coeffs(), &[2, DEFAULT_MODULUS - 3, 1]);
        assert_eq!((q.k, q.n_io), (5, 4));
    }

    #[test]
    fn add_folds_into_left_combination() {
        let c = hand_circuit(
            vec![
                Gate { kind: GateKind::Add, inputs: vec![0, 1], outputs: vec![3] },
                Gate { kind: GateKind::Mul, inputs: vec![3, 2], outputs: vec![4] },
            ],
            3,
            vec![4],
        );
        let q = build_qap(&c).unwrap();
        assert_eq!(q.d, 1);
        assert_eq!(q.v[0].eval(1), 1, "left wire a participates");
        assert_eq!(q.v[1].eval(1), 1, "left wire b participates");
        assert_eq!(q.v[2].eval(1), 0);
        assert_eq!(q.w[2].eval(1), 1, "right wire c participates");
    }

    #[test]
    fn listing_witness_has_io_first() {
        let src = "\
struct in_T { unsigned int i1; unsigned int i2; };
struct out_T { unsigned int o; };
void contract(struct in_T *in, struct out_T *out) {
  out->o = in->i1 + in->i2;
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(16)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        let asg = c.evaluate(&[2, 3]).unwrap();
        let a = witness(&c, &asg).unwrap();
        assert_eq!(&a[..3], &[2, 3, 5], "inputs then outputs lead the vector");
        assert_eq!(a[3], 1, "the one-slot closes the public region");
        assert_eq!(q.n_io, 4);
        assert_eq!(a.len(), q.k);
        let p = compute_p(&q, &a).unwrap();
        divide_by_t(&p, &q.t).unwrap();
    }

    #[test]
    fn degenerate_passthrough_gets_binding_constraint() {
        let c = hand_circuit(vec![], 1, vec![0]);
        let q = build_qap(&c).unwrap();
        assert_eq!((q.d, q.k, q.n_io), (1, 3, 3), "output wrapped in out·1 constraint");
        let asg = c.evaluate(&[7]).unwrap();
        let a = witness(&c, &asg).unwrap();
        assert_eq!(a, vec![7, 7, 1]);
        let p = compute_p(&q, &a).unwrap();
        assert!(divide_by_t(&p, &q.t).is_ok());
    }

    #[test]
    fn no_multiplication_gates_error() {
        let c = hand_circuit(vec![], 1, vec![]);
        assert_eq!(build_qap(&c).unwrap_err(), QapError::NoMultiplicationGates);
    }

    #[test]
    fn tampered_assignment_is_rejected() {
        let c = hand_circuit(
            vec![Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![2] }],
            2,
            vec![2],
        );
        let mut asg = c.evaluate(&[2, 3]).unwrap();
        asg.values[2] = 7;
        assert!(matches!(
            witness(&c, &asg),
            Err(QapError::InconsistentAssignment(_))
        ));
    }

    #[test]
    fn divisibility_dichotomy_under_perturbation() {
        let src = "\
struct in_T { unsigned int a; unsigned int b; };
struct out_T { unsigned int r; };
void contract(struct in_T *in, struct out_T *out) {
  out->r = in->a < in->b ? in->a ^ in->b : in->a - in->b;
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(4)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        let asg = c.evaluate(&[6, 11]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let p = compute_p(&q, &a).unwrap();
        let h = divide_by_t(&p, &q.t).unwrap();
        // Valid witness: p = h·t exactly, and p vanishes on every root.
        for &r in &q.roots {
            assert_eq!(p.eval(r), 0);
        }
        assert_eq!(p, h.mul(&q.t));

        // Any single-coordinate perturbation must break divisibility.
        let mut state = 0x2545f4914f6cdd1du64;
        for i in 0..a.len() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let delta = 1 + state % (DEFAULT_MODULUS - 1);
            let mut bad = a.clone();
            bad[i] = q.field.add(bad[i], delta);
            let p_bad = compute_p(&q, &bad).unwrap();
            assert!(
                matches!(divide_by_t(&p_bad, &q.t), Err(QapError::NotDivisible { .. })),
                "perturbing variable {i} went undetected"
            );
        }
    }

    #[test]
    fn identity_holds_at_random_points() {
        let src = "\
struct in_T { int a; int b; };
struct out_T { int r; };
void contract(struct in_T *in, struct out_T *out) {
  out->r = (in->a * in->b) >> 2;
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(6)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        let asg = c.evaluate(&[21, 45]).unwrap();
        let a = witness(&c, &asg).unwrap();
        let p = compute_p(&q, &a).unwrap();
        let h = divide_by_t(&p, &q.t).unwrap();
        let mut s = 987654321u64;
        for _ in 0..100 {
            s = s.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            let x = q.field.reduce(s);
            assert_eq!(p.eval(x), q.field.mul(h.eval(x), q.t.eval(x)));
        }
    }

    #[test]
    fn degrees_respect_bounds() {
        let src = "\
struct in_T { unsigned int a; unsigned int b; };
struct out_T { unsigned int r; };
void contract(struct in_T *in, struct out_T *out) {
  out->r = (in->a & in->b) + (in->a | in->b);
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(4)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        assert_eq!(q.t.degree(), Some(q.d));
        for &r in &q.roots {
            assert_eq!(q.t.eval(r), 0);
        }
        for family in [&q.v, &q.w, &q.y] {
            assert_eq!(family.len(), q.k);
            for poly in family {
                assert!(poly.degree().unwrap_or(0) < q.d);
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let src = "\
struct in_T { unsigned int a; };
struct out_T { unsigned int r; };
void contract(struct in_T *in, struct out_T *out) { out->r = in->a * 3 + 1; }
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(8)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q1 = build_qap(&c).unwrap();
        let q2 = build_qap(&c).unwrap();
        assert_eq!(q1, q2);
        assert_eq!(serialize(&q1), serialize(&q2));
    }

    #[test]
    fn serialization_round_trip() {
        let c = hand_circuit(
            vec![
                Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![2] },
                Gate { kind: GateKind::Mul, inputs: vec![2, 2], outputs: vec![3] },
            ],
            2,
            vec![3],
        );
        let q = build_qap(&c).unwrap();
        let text = serialize(&q);
        assert_eq!(parse(&text).unwrap(), q);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p 2305843009213693951"));
        assert_eq!(lines.next(), Some("k 4"));
        assert_eq!(lines.next(), Some("d 2"));
        assert_eq!(lines.next(), Some("n_io 3"));
        assert_eq!(lines.next(), Some("roots 1 2"));
    }

    #[test]
    fn parse_rejects_malformed_text() {
        let bads = [
            "k 3\nd 1\nn_io 3\nroots 1\nt 1\n",                  // missing p
            "p 13\nk 1\nd 2\nn_io 1\nroots 1\nt 0 1\nv 0\nw 0\ny 0\n", // root count
            "p 13\nk 2\nd 1\nn_io 1\nroots 1\nt 0 1\nv 0\nw 0\ny 0\n", // row count
            "p 13\nk 1\nd 1\nn_io 1\nroots 1\nt 0 1\nv x\nw 0\ny 0\n", // bad number
        ];
        for text in bads {
            assert!(matches!(parse(text), Err(QapError::Parse(_))), "{text:?}");
        }
    }

    #[test]
    fn division_remainder_reported() {
        let f13 = Field::new(13).unwrap();
        // x² + 1 divided by x − 1 leaves remainder 2.
        let p = FieldPoly::new(f13, vec![1, 0, 1]);
        let t = FieldPoly::new(f13, vec![12, 1]);
        match divide_by_t(&p, &t) {
            Err(QapError::NotDivisible { remainder }) => assert_eq!(remainder, vec![2]),
            other => panic!("expected NotDivisible, got {other:?}"),
        }
        // Zero dividend divides exactly.
        assert!(divide_by_t(&FieldPoly::zero(f13), &t).unwrap().is_zero());
    }

    #[test]
    fn constant_output_is_bound() {
        // A contract output that is a pure constant still gets a public slot
        // whose binding constraint pins it.
        let src = "\
struct in_T { unsigned int a; };
struct out_T { unsigned int r; };
void contract(struct in_T *in, struct out_T *out) { out->r = 9; }
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(8)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let q = build_qap(&c).unwrap();
        let asg = c.evaluate(&[4]).unwrap();
        let a = witness(&c, &asg).unwrap();
        assert_eq!(a[1], 9, "output slot carries the constant");
        let p = compute_p(&q, &a).unwrap();
        divide_by_t(&p, &q.t).unwrap();
    }
}
