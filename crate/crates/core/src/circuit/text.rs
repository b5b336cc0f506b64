//! Line-oriented circuit text format.
//!
//! Header lines name the bit width, field modulus, and the input/output wire
//! lists; each gate is one directive, e.g. `MUL [3 4] TO [7]`. An EXPAND
//! directive maps retained bit positions to their output wires:
//! `EXPAND [5] TO [0 -> 9 3 -> 10]`. Parsing rebuilds the identical circuit.

use super::{Circuit, CircuitError, Gate, GateKind, WireId};
use crate::field::Field;

/// Renders a circuit in the directive text format (UTF-8, LF endings).
pub fn serialize(c: &Circuit) -> String {
    let ids = |ws: &[WireId]| {
        ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!("bitwidth {}\n", c.bit_width));
    out.push_str(&format!("field {}\n", c.field.modulus()));
    out.push_str(&format!("inputs [{}]\n", ids(&c.input_wires)));
    out.push_str(&format!("outputs [{}]\n", ids(&c.output_wires)));
    for g in &c.gates {
        let line = match &g.kind {
            GateKind::Add => format!("ADD [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs)),
            GateKind::Mul => format!("MUL [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs)),
            GateKind::MulConst(c) => {
                format!("MUL-CONST-{c} [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs))
            }
            GateKind::Expand(positions) => {
                let pairs = positions
                    .iter()
                    .zip(&g.outputs)
                    .map(|(p, w)| format!("{p} -> {w}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                format!("EXPAND [{}] TO [{pairs}]", ids(&g.inputs))
            }
            GateKind::Compress => {
                format!("COMPRESS [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs))
            }
            GateKind::Zero => format!("ZERO [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs)),
            GateKind::One => format!("ONE [{}] TO [{}]", ids(&g.inputs), ids(&g.outputs)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parses the directive text format back into a validated circuit.
pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
    let mut p = Parser {
        bit_width: None,
        modulus: None,
        inputs: None,
        outputs: None,
        gates: Vec::new(),
        num_wires: 0,
        line: 0,
    };
    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        p.directive(line)?;
    }
    p.line = text.lines().count();
    p.finish()
}

struct Parser {
    bit_width: Option<u32>,
    modulus: Option<u64>,
    inputs: Option<Vec<WireId>>,
    outputs: Option<Vec<WireId>>,
    gates: Vec<Gate>,
    num_wires: usize,
    line: usize,
}

impl Parser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CircuitError> {
        Err(CircuitError::Parse { msg: msg.into(), line: self.line })
    }

    fn directive(&mut self, line: &str) -> Result<(), CircuitError> {
        let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match word {
            "bitwidth" => self.bit_width = Some(self.number(rest)?),
            "field" => self.modulus = Some(self.number(rest)?),
            "inputs" => {
                let ws = self.bracket_list(rest)?;
                self.num_wires = self.num_wires.max(ws.len());
                self.inputs = Some(ws);
            }
            "outputs" => self.outputs = Some(self.bracket_list(rest)?),
            _ => self.gate(word, rest)?,
        }
        Ok(())
    }

    fn gate(&mut self, word: &str, rest: &str) -> Result<(), CircuitError> {
        let kind = match word {
            "ADD" => GateKind::Add,
            "MUL" => GateKind::Mul,
            "COMPRESS" => GateKind::Compress,
            "ZERO" => GateKind::Zero,
            "ONE" => GateKind::One,
            "EXPAND" => GateKind::Expand(Vec::new()),
            _ => match word.strip_prefix("MUL-CONST-") {
                Some(c) => GateKind::MulConst(self.number(c)?),
                None => return self.err(format!("unknown directive \"{word}\"")),
            },
        };
        let Some((ins, outs)) = rest.split_once(" TO ") else {
            return self.err("expected \"[inputs] TO [outputs]\"");
        };
        let inputs = self.bracket_list(ins)?;
        let (kind, outputs) = if let GateKind::Expand(_) = kind {
            let pairs = self.bracket_body(outs)?;
            let tokens: Vec<&str> = pairs.split_whitespace().collect();
            if tokens.is_empty() || tokens.len() % 3 != 0 {
                return self.err("EXPAND outputs must be \"pos -> wire\" pairs");
            }
            let mut positions = Vec::new();
            let mut outputs = Vec::new();
            for chunk in tokens.chunks(3) {
                if chunk[1] != "->" {
                    return self.err(format!("expected \"->\" in EXPAND, found \"{}\"", chunk[1]));
                }
                positions.push(self.number(chunk[0])?);
                outputs.push(self.number::<u64>(chunk[2])? as WireId);
            }
            (GateKind::Expand(positions), outputs)
        } else {
            (kind, self.bracket_list(outs)?)
        };
        for &w in &outputs {
            self.num_wires = self.num_wires.max(w + 1);
        }
        self.gates.push(Gate { kind, inputs, outputs });
        Ok(())
    }

    fn finish(self) -> Result<Circuit, CircuitError> {
        let missing = |what: &str| CircuitError::Parse {
            msg: format!("missing \"{what}\" header"),
            line: self.line,
        };
        let bit_width = self.bit_width.ok_or_else(|| missing("bitwidth"))?;
        let modulus = self.modulus.ok_or_else(|| missing("field"))?;
        let circuit = Circuit {
            bit_width,
            field: Field::new(modulus)?,
            num_wires: self.num_wires,
            gates: self.gates,
            input_wires: self.inputs.ok_or_else(|| missing("inputs"))?,
            output_wires: self.outputs.ok_or_else(|| missing("outputs"))?,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    fn number<T: std::str::FromStr>(&self, tok: &str) -> Result<T, CircuitError> {
        tok.trim()
            .parse()
            .or_else(|_| self.err(format!("expected a number, found \"{}\"", tok.trim())))
    }

    fn bracket_body<'t>(&self, tok: &'t str) -> Result<&'t str, CircuitError> {
        let tok = tok.trim();
        match tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            Some(body) => Ok(body),
            None => self.err(format!("expected a [bracketed] list, found \"{tok}\"")),
        }
    }

    fn bracket_list(&self, tok: &str) -> Result<Vec<WireId>, CircuitError> {
        self.bracket_body(tok)?
            .split_whitespace()
            .map(|t| Ok(self.number::<u64>(t)? as WireId))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::lower;
    use super::*;
    use crate::field::DEFAULT_MODULUS;
    use crate::frontend::{compile_str, FlattenConfig};

    fn sample_circuit() -> Circuit {
        Circuit {
            bit_width: 4,
            field: Field::new(DEFAULT_MODULUS).unwrap(),
            num_wires: 8,
            gates: vec![
                Gate { kind: GateKind::Zero, inputs: vec![0], outputs: vec![2] },
                Gate { kind: GateKind::One, inputs: vec![2], outputs: vec![3] },
                Gate { kind: GateKind::Mul, inputs: vec![0, 1], outputs: vec![4] },
                Gate {
                    kind: GateKind::Expand(vec![0, 3]),
                    inputs: vec![4],
                    outputs: vec![5, 6],
                },
                Gate { kind: GateKind::Compress, inputs: vec![5, 6], outputs: vec![7] },
            ],
            input_wires: vec![0, 1],
            output_wires: vec![7],
        }
    }

    #[test]
    fn golden_lines() {
        let text = serialize(&sample_circuit());
        let want = "\
bitwidth 4
field 2305843009213693951
inputs [0 1]
outputs [7]
ZERO [0] TO [2]
ONE [2] TO [3]
MUL [0 1] TO [4]
EXPAND [4] TO [0 -> 5 3 -> 6]
COMPRESS [5 6] TO [7]
";
        assert_eq!(text, want);
    }

    #[test]
    fn round_trip_identity() {
        let c = sample_circuit();
        assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }

    #[test]
    fn round_trip_of_lowered_contract() {
        let src = "\
struct in_T { int a; int b; };
struct out_T { int r; int s; };
void contract(struct in_T *in, struct out_T *out) {
  out->r = in->a < in->b ? in->a * 3 : in->b - 1;
  out->s = (in->a ^ in->b) >> 1;
}
";
        let prog = compile_str(src, &FlattenConfig::with_bit_width(8)).unwrap();
        let c = lower(&prog, DEFAULT_MODULUS).unwrap();
        let c2 = parse(&serialize(&c)).unwrap();
        assert_eq!(c2, c);
        // The reparsed circuit also evaluates identically.
        let asg = c2.evaluate(&[5, 9]).unwrap();
        assert_eq!(c2.outputs_of(&asg), c.outputs_of(&c.evaluate(&[5, 9]).unwrap()));
    }

    #[test]
    fn empty_circuit_is_header_only() {
        let c = Circuit {
            bit_width: 16,
            field: Field::new(DEFAULT_MODULUS).unwrap(),
            num_wires: 1,
            gates: vec![],
            input_wires: vec![0],
            output_wires: vec![0],
        };
        let text = serialize(&c);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "\
bitwidth 4
field 2305843009213693951
inputs [0 1]
outputs [3]
ADD [0 1] TO [2]
FROB [2] TO [3]
";
        match parse(text) {
            Err(CircuitError::Parse { msg, line }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("FROB"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_malformed_pieces() {
        let header = "bitwidth 4\nfield 2305843009213693951\ninputs [0]\noutputs [0]\n";
        for (bad, needle) in [
            ("ADD [0 0] TO 2", "bracketed"),
            ("ADD [0 x] TO [1]", "number"),
            ("EXPAND [0] TO [1]", "pairs"),
            ("EXPAND [0] TO [0 => 1]", "->"),
            ("ADD [0] TO [1]", "arity"),
        ] {
            let res = parse(&format!("{header}{bad}\n"));
            let msg = format!("{:?}", res.expect_err(bad));
            assert!(msg.contains(needle), "{bad}: {msg}");
        }
        let res = parse("field 5\ninputs [0]\noutputs [0]\n");
        assert!(matches!(res, Err(CircuitError::Parse { .. })), "missing bitwidth");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored_when_parsing() {
        let text = "\
# toy circuit
bitwidth 4

field 2305843009213693951
inputs [0]
outputs [1]
ZERO [0] TO [1]
";
        let c = parse(text).unwrap();
        assert_eq!(c.gates.len(), 1);
        assert_eq!(serialize(&c).lines().count(), 5, "comments are not preserved");
    }
}
