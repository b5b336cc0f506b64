//! Realization of minimized sum-of-products covers as replacement gates.
//!
//! Replacement gates are built over symbolic wires so that minimization
//! jobs stay independent of final wire numbering: `In`/`Out` refer to the
//! submodule boundary, `Zero`/`One` to the circuit's constant wires, and
//! `Tmp` to fresh wires materialized at assembly time.
//!
//! Vocabulary: AND is a product gate; NOT is the two-gate pair
//! `ADD(x, one)` + `EXPAND [0]` (the low bit of x+1 is 1−x on {0,1});
//! OR of provably disjoint terms is a plain sum, otherwise De Morgan's
//! NOT(AND(NOT…)). Outputs narrower than the wire they replace get
//! width-padding copy gates so downstream expansions keep their bit range.

use super::qm::Implicant;
use crate::circuit::GateKind;
use std::collections::BTreeMap;

/// Symbolic wire in a replacement network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RWire {
    /// Boundary input by position.
    In(usize),
    /// The circuit's constant-zero wire.
    Zero,
    /// The circuit's constant-one wire.
    One,
    /// Fresh internal wire.
    Tmp(usize),
    /// Boundary output by position.
    Out(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RGate {
    pub kind: GateKind,
    pub inputs: Vec<RWire>,
    pub outputs: Vec<RWire>,
}

/// Minimized function of one boundary output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputFunction {
    ConstZero,
    /// Sum of the given product terms; an implicant with no literals is the
    /// constant one.
    Sop(Vec<Implicant>),
}

/// Widths and constant availability the synthesizer needs from the host
/// circuit.
#[derive(Debug, Clone)]
pub struct SynthContext {
    pub input_widths: Vec<u32>,
    pub output_widths: Vec<u32>,
    pub width_cap: u32,
    pub have_zero: bool,
    pub have_one: bool,
}

/// A finalized replacement network: every boundary output is produced by
/// exactly one gate, in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub gates: Vec<RGate>,
    pub n_tmp: usize,
}

struct Synth {
    gates: Vec<RGate>,
    next_tmp: usize,
    width: BTreeMap<RWire, u32>,
    cap: u32,
    not_cache: BTreeMap<RWire, RWire>,
    and_cache: BTreeMap<(RWire, RWire), RWire>,
}

impl Synth {
    fn new(ctx: &SynthContext) -> Self {
        let mut width = BTreeMap::new();
        width.insert(RWire::Zero, 1);
        width.insert(RWire::One, 1);
        for (i, &w) in ctx.input_widths.iter().enumerate() {
            width.insert(RWire::In(i), w);
        }
        Synth {
            gates: Vec::new(),
            next_tmp: 0,
            width,
            cap: ctx.width_cap,
            not_cache: BTreeMap::new(),
            and_cache: BTreeMap::new(),
        }
    }

    fn push(&mut self, kind: GateKind, inputs: Vec<RWire>) -> RWire {
        let w = match &kind {
            GateKind::Add => {
                (self.width[&inputs[0]].max(self.width[&inputs[1]]) + 1).min(self.cap)
            }
            GateKind::Mul => (self.width[&inputs[0]] + self.width[&inputs[1]]).min(self.cap),
            GateKind::MulConst(c) => {
                (self.width[&inputs[0]] + (64 - c.leading_zeros())).min(self.cap)
            }
            GateKind::Expand(_) => 1,
            _ => unreachable!("synthesis only emits ADD/MUL/MUL-CONST/EXPAND"),
        };
        let out = RWire::Tmp(self.next_tmp);
        self.next_tmp += 1;
        self.width.insert(out, w);
        self.gates.push(RGate { kind, inputs, outputs: vec![out] });
        out
    }

    fn not(&mut self, a: RWire) -> RWire {
        match a {
            RWire::Zero => return RWire::One,
            RWire::One => return RWire::Zero,
            _ => {}
        }
        if let Some(&w) = self.not_cache.get(&a) {
            return w;
        }
        let inc = self.push(GateKind::Add, vec![a, RWire::One]);
        let out = self.push(GateKind::Expand(vec![0]), vec![inc]);
        self.not_cache.insert(a, out);
        self.not_cache.insert(out, a);
        out
    }

    fn and(&mut self, a: RWire, b: RWire) -> RWire {
        if a == RWire::Zero || b == RWire::Zero {
            return RWire::Zero;
        }
        if a == RWire::One {
            return b;
        }
        if b == RWire::One || a == b {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&w) = self.and_cache.get(&key) {
            return w;
        }
        let out = self.push(GateKind::Mul, vec![key.0, key.1]);
        self.and_cache.insert(key, out);
        out
    }

    fn product(&mut self, terms: &[RWire]) -> RWire {
        terms.iter().fold(RWire::One, |acc, &t| self.and(acc, t))
    }

    fn term(&mut self, imp: &Implicant) -> RWire {
        let literals: Vec<RWire> = imp
            .literal_list()
            .into_iter()
            .map(|(var, positive)| {
                let base = RWire::In(var as usize);
                if positive {
                    base
                } else {
                    self.not(base)
                }
            })
            .collect();
        self.product(&literals)
    }

    fn copy(&mut self, a: RWire) -> RWire {
        self.push(GateKind::MulConst(1), vec![a])
    }

    fn sum_of_products(&mut self, implicants: &[Implicant]) -> RWire {
        let terms: Vec<RWire> = implicants.iter().map(|imp| self.term(imp)).collect();
        match terms.len() {
            0 => RWire::Zero,
            1 => terms[0],
            _ => {
                let disjoint = implicants.iter().enumerate().all(|(i, a)| {
                    implicants[i + 1..].iter().all(|b| {
                        a.covered_minterms.iter().all(|m| !b.covered_minterms.contains(m))
                    })
                });
                if disjoint {
                    // At most one term is ever 1, so the field sum stays
                    // on {0,1}.
                    terms[1..]
                        .iter()
                        .fold(terms[0], |acc, &t| self.push(GateKind::Add, vec![acc, t]))
                } else {
                    let negated: Vec<RWire> = terms.iter().map(|&t| self.not(t)).collect();
                    let none = self.product(&negated);
                    self.not(none)
                }
            }
        }
    }
}

/// Builds the finalized replacement for the given per-output functions, or
/// `None` when a required constant wire is missing from the host circuit.
pub fn synthesize(funcs: &[OutputFunction], ctx: &SynthContext) -> Option<Replacement> {
    assert_eq!(funcs.len(), ctx.output_widths.len());
    let mut synth = Synth::new(ctx);
    let results: Vec<RWire> = funcs
        .iter()
        .map(|f| match f {
            OutputFunction::ConstZero => RWire::Zero,
            OutputFunction::Sop(implicants) => synth.sum_of_products(implicants),
        })
        .collect();

    // Bind each result to its boundary output: rename the producing wire
    // when possible, otherwise insert a copy gate; pad widths first so no
    // boundary wire gets narrower than the wire it replaces.
    let mut produced_by: BTreeMap<RWire, usize> = BTreeMap::new();
    for (j, r0) in results.into_iter().enumerate() {
        let mut r = match produced_by.get(&r0) {
            Some(&k) => RWire::Out(k),
            None => r0,
        };
        while synth.width[&r] < ctx.output_widths[j] {
            r = synth.copy(r);
        }
        if matches!(r, RWire::Tmp(_)) {
            for g in &mut synth.gates {
                for w in g.inputs.iter_mut().chain(g.outputs.iter_mut()) {
                    if *w == r {
                        *w = RWire::Out(j);
                    }
                }
            }
            let w = synth.width[&r];
            synth.width.insert(RWire::Out(j), w);
        } else {
            synth.gates.push(RGate {
                kind: GateKind::MulConst(1),
                inputs: vec![r],
                outputs: vec![RWire::Out(j)],
            });
            let w = (synth.width[&r] + 1).min(ctx.width_cap);
            synth.width.insert(RWire::Out(j), w);
        }
        produced_by.entry(r0).or_insert(j);
    }

    let uses = |w: RWire| {
        synth.gates.iter().any(|g| g.inputs.contains(&w) || g.outputs.contains(&w))
    };
    if (uses(RWire::One) && !ctx.have_one) || (uses(RWire::Zero) && !ctx.have_zero) {
        return None;
    }
    Some(Replacement { gates: synth.gates, n_tmp: synth.next_tmp })
}

impl Replacement {
    /// Evaluates the network on one boundary-input assignment (bit j of
    /// `assignment` is input j) and returns the boundary output values.
    pub fn evaluate(&self, n_inputs: usize, n_outputs: usize, assignment: u32) -> Vec<u64> {
        let mut values: BTreeMap<RWire, u64> = BTreeMap::new();
        values.insert(RWire::Zero, 0);
        values.insert(RWire::One, 1);
        for i in 0..n_inputs {
            values.insert(RWire::In(i), u64::from(assignment >> i & 1));
        }
        for g in &self.gates {
            let v = |w: &RWire| values[w];
            let out = match &g.kind {
                GateKind::Add => v(&g.inputs[0]) + v(&g.inputs[1]),
                GateKind::Mul => v(&g.inputs[0]) * v(&g.inputs[1]),
                GateKind::MulConst(c) => v(&g.inputs[0]) * c,
                GateKind::Expand(positions) => v(&g.inputs[0]) >> positions[0] & 1,
                _ => unreachable!(),
            };
            values.insert(g.outputs[0], out);
        }
        (0..n_outputs).map(|j| *values.get(&RWire::Out(j)).expect("output bound")).collect()
    }

    /// Per-output truth tables over all 2^n boundary assignments.
    pub fn truth_tables(&self, n_inputs: usize, n_outputs: usize) -> Vec<Vec<bool>> {
        let mut tables = vec![Vec::with_capacity(1 << n_inputs); n_outputs];
        for assignment in 0..1u32 << n_inputs {
            for (j, v) in self.evaluate(n_inputs, n_outputs, assignment).iter().enumerate() {
                debug_assert!(*v <= 1, "boundary outputs are 1-bit");
                tables[j].push(*v == 1);
            }
        }
        tables
    }
}
