//! Arithmetic circuits over a prime field.
//!
//! A circuit is a topologically ordered list of gates over densely numbered
//! wires (inputs first, then one block of fresh ids per gate). Wires carry
//! field elements; integer semantics (wrap-around, signs, comparisons) are
//! realized by the lowering in [`build`] through gate gadgets, so the circuit
//! itself is untyped plumbing.
//!
//! Gate kinds and the text format follow the directive set
//! `ADD, MUL, MUL-CONST, EXPAND, COMPRESS, ZERO, ONE`; see [`text`].

mod build;
mod text;

pub use build::lower;
pub use text::{parse, serialize};

use crate::field::Field;
use thiserror::Error;

pub type WireId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("2^(2*{bit_width}) does not fit below the field modulus {modulus}")]
    FieldTooSmall { bit_width: u32, modulus: u64 },
    #[error("constant synthesis requires at least one input wire")]
    NoInputWire,
    #[error("expected {expected} input values, got {got}")]
    MissingInput { expected: usize, got: usize },
    #[error("input value {value} for wire {wire} exceeds {bits} bits")]
    ValueOutOfRange { wire: WireId, value: u64, bits: u32 },
    #[error("assignment is inconsistent at wire {wire}: has {got}, gate yields {want}")]
    Inconsistent { wire: WireId, got: u64, want: u64 },
    #[error("assignment covers {got} wires, circuit has {expected}")]
    WrongAssignmentSize { expected: usize, got: usize },
    #[error("unsupported operation: {0}")]
    UnsupportedOp(String),
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { msg: String, line: usize },
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateKind {
    /// Field addition, 2 inputs.
    Add,
    /// Field multiplication, 2 inputs.
    Mul,
    /// Multiplication by a fixed field element, 1 input.
    MulConst(u64),
    /// Binary decomposition: one 1-bit output per listed bit position
    /// (ascending). Positions not listed are dropped from the circuit but
    /// still constrain the decomposition downstream.
    Expand(Vec<u32>),
    /// Recomposition Σ bit_i · 2^i of 1-bit inputs, least significant first.
    Compress,
    /// The constant 0, synthesized as input · 0.
    Zero,
    /// The constant 1, synthesized as zero-wire + 1.
    One,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<WireId>,
    pub outputs: Vec<WireId>,
}

/// A complete wire-value map, indexed by wire id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<u64>,
}

impl Assignment {
    pub fn value(&self, wire: WireId) -> u64 {
        self.values[wire]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub bit_width: u32,
    pub field: Field,
    pub num_wires: usize,
    pub gates: Vec<Gate>,
    pub input_wires: Vec<WireId>,
    pub output_wires: Vec<WireId>,
}

impl Circuit {
    pub fn num_mul_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Mul).count()
    }

    /// Per-wire width upper bounds, derived deterministically from the gate
    /// structure (the serialized form carries no widths). Bounds are loose:
    /// a value is guaranteed to fit its wire's width, not to fill it.
    pub fn widths(&self) -> Vec<u32> {
        let cap = 64u32.min(64 - self.field.modulus().leading_zeros());
        let mut w = vec![0u32; self.num_wires];
        for &i in &self.input_wires {
            w[i] = self.bit_width;
        }
        for g in &self.gates {
            let wi = |id: WireId| w[id];
            match &g.kind {
                GateKind::Add => {
                    w[g.outputs[0]] = (wi(g.inputs[0]).max(wi(g.inputs[1])) + 1).min(cap);
                }
                GateKind::Mul => {
                    w[g.outputs[0]] = (wi(g.inputs[0]) + wi(g.inputs[1])).min(cap);
                }
                GateKind::MulConst(c) => {
                    let c_bits = 64 - c.leading_zeros();
                    w[g.outputs[0]] = (wi(g.inputs[0]) + c_bits).min(cap);
                }
                GateKind::Expand(_) => {
                    for &o in &g.outputs {
                        w[o] = 1;
                    }
                }
                GateKind::Compress => {
                    w[g.outputs[0]] = g.inputs.len() as u32;
                }
                GateKind::Zero | GateKind::One => {
                    w[g.outputs[0]] = 1;
                }
            }
        }
        w
    }

    /// Structural soundness: dense wire numbering, topological order, single
    /// assignment per wire, gate arities, expand-position discipline.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let err = |msg: String| Err(CircuitError::Invalid(msg));
        for (i, &wire) in self.input_wires.iter().enumerate() {
            if wire != i {
                return err(format!("input wire {wire} breaks dense numbering"));
            }
        }
        let mut next = self.input_wires.len();
        for (gi, g) in self.gates.iter().enumerate() {
            let (n_in, n_out) = match &g.kind {
                GateKind::Add | GateKind::Mul => (2, 1),
                GateKind::MulConst(_) | GateKind::Zero | GateKind::One => (1, 1),
                GateKind::Expand(positions) => {
                    if positions.is_empty() {
                        return err(format!("gate {gi}: EXPAND with no bit positions"));
                    }
                    if !positions.windows(2).all(|p| p[0] < p[1]) {
                        return err(format!("gate {gi}: EXPAND positions not ascending"));
                    }
                    (1, positions.len())
                }
                GateKind::Compress => {
                    if g.inputs.is_empty() {
                        return err(format!("gate {gi}: COMPRESS with no inputs"));
                    }
                    (g.inputs.len(), 1)
                }
            };
            if g.inputs.len() != n_in || g.outputs.len() != n_out {
                return err(format!("gate {gi}: wrong arity"));
            }
            for &i in &g.inputs {
                if i >= next {
                    return err(format!("gate {gi}: input wire {i} not yet defined"));
                }
            }
            for &o in &g.outputs {
                if o != next {
                    return err(format!("gate {gi}: output wire {o} breaks dense numbering"));
                }
                next += 1;
            }
        }
        if next != self.num_wires {
            return err(format!("wire count {} != {}", self.num_wires, next));
        }
        for &o in &self.output_wires {
            if o >= self.num_wires {
                return err(format!("output wire {o} does not exist"));
            }
        }
        // Expansion may only select bits the source wire can carry.
        let widths = self.widths();
        for (gi, g) in self.gates.iter().enumerate() {
            if let GateKind::Expand(positions) = &g.kind {
                let w = widths[g.inputs[0]];
                if *positions.last().unwrap() >= w {
                    return err(format!(
                        "gate {gi}: EXPAND position {} exceeds source width {w}",
                        positions.last().unwrap()
                    ));
                }
            }
        }
        Ok(())
    }

    fn gate_outputs(&self, g: &Gate, values: &[u64]) -> Vec<u64> {
        let f = self.field;
        let v = |id: WireId| values[id];
        match &g.kind {
            GateKind::Add => vec![f.add(v(g.inputs[0]), v(g.inputs[1]))],
            GateKind::Mul => vec![f.mul(v(g.inputs[0]), v(g.inputs[1]))],
            GateKind::MulConst(c) => vec![f.mul(v(g.inputs[0]), *c)],
            GateKind::Expand(positions) => {
                let x = v(g.inputs[0]);
                positions.iter().map(|&p| (x >> p) & 1).collect()
            }
            GateKind::Compress => {
                let mut acc = 0u64;
                for (i, &b) in g.inputs.iter().enumerate() {
                    acc = f.add(acc, f.mul(values[b], f.pow(2, i as u64)));
                }
                vec![acc]
            }
            GateKind::Zero => vec![0],
            GateKind::One => vec![f.add(v(g.inputs[0]), 1)],
        }
    }

    /// Evaluates the circuit on input values (ordered as `input_wires`),
    /// producing the complete wire assignment — the witness.
    pub fn evaluate(&self, inputs: &[u64]) -> Result<Assignment, CircuitError> {
        if inputs.len() != self.input_wires.len() {
            return Err(CircuitError::MissingInput {
                expected: self.input_wires.len(),
                got: inputs.len(),
            });
        }
        let mut values = vec![0u64; self.num_wires];
        for (&wire, &value) in self.input_wires.iter().zip(inputs) {
            if value >> (self.bit_width - 1) >> 1 != 0 {
                return Err(CircuitError::ValueOutOfRange { wire, value, bits: self.bit_width });
            }
            values[wire] = value;
        }
        for g in &self.gates {
            let outs = self.gate_outputs(g, &values);
            for (&o, val) in g.outputs.iter().zip(outs) {
                values[o] = val;
            }
        }
        Ok(Assignment { values })
    }

    /// Checks that an assignment satisfies every gate equation. Inputs are
    /// unconstrained; everything downstream must match the gate functions.
    pub fn validate_assignment(&self, asg: &Assignment) -> Result<(), CircuitError> {
        if asg.values.len() != self.num_wires {
            return Err(CircuitError::WrongAssignmentSize {
                expected: self.num_wires,
                got: asg.values.len(),
            });
        }
        for g in &self.gates {
            let outs = self.gate_outputs(g, &asg.values);
            for (&o, want) in g.outputs.iter().zip(outs) {
                if asg.values[o] != want {
                    return Err(CircuitError::Inconsistent { wire: o, got: asg.values[o], want });
                }
            }
        }
        Ok(())
    }

    /// Values of the output wires, in declared order.
    pub fn outputs_of(&self, asg: &Assignment) -> Vec<u64> {
        self.output_wires.iter().map(|&w| asg.values[w]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_MODULUS;

    fn f() -> Field {
        Field::new(DEFAULT_MODULUS).unwrap()
    }

    /// a·b plus an expansion of the product, by hand.
    fn sample() -> Circuit {
        Circuit {
            bit_width: 4,
            field: f(),
            num_wires: 5,
            gates: vec![
                Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![2] },
                Gate { kind: GateKind::Expand(vec![0, 3]), inputs: vec![2], outputs: vec![3, 4] },
            ],
            input_wires: vec![0, 1],
            output_wires: vec![2],
        }
    }

    #[test]
    fn evaluate_hand_built() {
        let c = sample();
        c.validate().unwrap();
        let asg = c.evaluate(&[5, 3]).unwrap();
        assert_eq!(asg.value(2), 15);
        assert_eq!(asg.value(3), 1, "bit 0 of 15");
        assert_eq!(asg.value(4), 1, "bit 3 of 15");
        assert_eq!(c.outputs_of(&asg), vec![15]);
    }

    #[test]
    fn input_checks() {
        let c = sample();
        assert_eq!(
            c.evaluate(&[1]),
            Err(CircuitError::MissingInput { expected: 2, got: 1 })
        );
        assert_eq!(
            c.evaluate(&[16, 0]),
            Err(CircuitError::ValueOutOfRange { wire: 0, value: 16, bits: 4 })
        );
    }

    #[test]
    fn assignment_validation_catches_tampering() {
        let c = sample();
        let mut asg = c.evaluate(&[2, 3]).unwrap();
        c.validate_assignment(&asg).unwrap();
        asg.values[2] = 7;
        assert_eq!(
            c.validate_assignment(&asg),
            Err(CircuitError::Inconsistent { wire: 2, got: 7, want: 6 })
        );
    }

    #[test]
    fn validate_rejects_malformed() {
        let mut c = sample();
        c.gates[0].inputs = vec![0, 9];
        assert!(matches!(c.validate(), Err(CircuitError::Invalid(_))));

        let mut c = sample();
        c.gates[1].kind = GateKind::Expand(vec![3, 0]);
        assert!(matches!(c.validate(), Err(CircuitError::Invalid(_))));

        let mut c = sample();
        c.num_wires = 17;
        assert!(matches!(c.validate(), Err(CircuitError::Invalid(_))));
    }

    #[test]
    fn width_derivation() {
        let c = sample();
        let w = c.widths();
        assert_eq!(w[0], 4);
        assert_eq!(w[2], 8, "MUL doubles the width");
        assert_eq!(w[3], 1);
    }

    #[test]
    fn zero_one_semantics() {
        let c = Circuit {
            bit_width: 4,
            field: f(),
            num_wires: 3,
            gates: vec![
                Gate { kind: GateKind::Zero, inputs: vec![0], outputs: vec![1] },
                Gate { kind: GateKind::One, inputs: vec![1], outputs: vec![2] },
            ],
            input_wires: vec![0],
            output_wires: vec![2],
        };
        c.validate().unwrap();
        let asg = c.evaluate(&[13]).unwrap();
        assert_eq!(asg.value(1), 0, "x * 0 = 0 for any input");
        assert_eq!(asg.value(2), 1);
    }

    #[test]
    fn compress_is_weighted_sum() {
        let c = Circuit {
            bit_width: 4,
            field: f(),
            num_wires: 4,
            gates: vec![Gate {
                kind: GateKind::Compress,
                inputs: vec![0, 1, 2],
                outputs: vec![3],
            }],
            input_wires: vec![0, 1, 2],
            output_wires: vec![3],
        };
        c.validate().unwrap();
        let asg = c.evaluate(&[1, 0, 1]).unwrap();
        assert_eq!(asg.value(3), 5);
    }
}
