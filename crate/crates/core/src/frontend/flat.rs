//! The straight-line intermediate program produced by flattening.
//!
//! A [`FlatProgram`] is a single-assignment list of primitive expressions in
//! topological order: every operand names an input or an earlier destination.
//! Semantics are `bit_width`-wide two's-complement machine arithmetic.
//!
//! Signedness is declared only for inputs and outputs; internal wires derive
//! it deterministically from their defining expression (C-style: an operation
//! is signed iff all its operands are signed, comparisons yield signed `int`,
//! constants are signed iff their value is below the sign threshold). The
//! derivation depends only on the program text, so a parsed program carries
//! the same signedness as the one that was serialized.

use std::collections::BTreeMap;

use super::FrontendError;
use crate::twos::{self, Rel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatVar {
    pub name: String,
    pub signed: bool,
}

impl FlatVar {
    pub fn new(name: impl Into<String>, signed: bool) -> Self {
        Self { name: name.into(), signed }
    }
}

/// Primitive operation of one flat expression. Wire operands are names;
/// `MUL-CONST`/`SHL-CONST`/`SHR-CONST`/`CONST` carry their literal inline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatOp {
    Add(String, String),
    Sub(String, String),
    Mul(String, String),
    MulConst(String, i64),
    And(String, String),
    Or(String, String),
    Xor(String, String),
    Not(String),
    ShlConst(String, u32),
    ShrConst(String, u32),
    Lt(String, String),
    Gt(String, String),
    Le(String, String),
    Ge(String, String),
    Eq(String, String),
    Neq(String, String),
    /// `Mux(cond, a, b)`: `a` if `cond` is nonzero, else `b`.
    Mux(String, String, String),
    /// Literal with explicit signedness; unsigned constants serialize with a
    /// C-style `u` suffix so `3` and `3u` stay distinguishable.
    Const(i64, bool),
    Copy(String),
}

impl FlatOp {
    pub fn wire_args(&self) -> Vec<&str> {
        use FlatOp::*;
        match self {
            Add(a, b) | Sub(a, b) | Mul(a, b) | And(a, b) | Or(a, b) | Xor(a, b)
            | Lt(a, b) | Gt(a, b) | Le(a, b) | Ge(a, b) | Eq(a, b) | Neq(a, b) => vec![a, b],
            MulConst(a, _) | Not(a) | ShlConst(a, _) | ShrConst(a, _) | Copy(a) => vec![a],
            Mux(c, a, b) => vec![c, a, b],
            Const(..) => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatExpr {
    pub dest: String,
    pub op: FlatOp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatProgram {
    pub bit_width: u32,
    pub inputs: Vec<FlatVar>,
    pub outputs: Vec<FlatVar>,
    pub exprs: Vec<FlatExpr>,
}

impl FlatProgram {
    /// Checks all structural invariants and returns each wire's signedness.
    ///
    /// Enforced: usable bit width; unique names; single assignment;
    /// topological operand order; every output assigned; literals within the
    /// word range; shift amounts below the width.
    pub fn wire_signs(&self) -> Result<BTreeMap<String, bool>, FrontendError> {
        let fail = |msg: String| Err(FrontendError::FlatProgram(msg));
        let n = self.bit_width;
        if n < 1 || n > twos::MAX_WIDTH {
            return fail(format!("bit width {n} outside 1..={}", twos::MAX_WIDTH));
        }
        let mut signs: BTreeMap<String, bool> = BTreeMap::new();
        for v in &self.inputs {
            if signs.insert(v.name.clone(), v.signed).is_some() {
                return fail(format!("duplicate input \"{}\"", v.name));
            }
        }
        let sign_threshold = 1i64 << (n - 1);
        let const_ok = |c: i64| -sign_threshold <= c && c < (1i64 << n);
        for e in &self.exprs {
            for arg in e.op.wire_args() {
                if !signs.contains_key(arg) {
                    return fail(format!(
                        "\"{}\" uses \"{arg}\" before any assignment",
                        e.dest
                    ));
                }
            }
            let arg_sign = |a: &str| signs[a];
            let all_signed = |args: &[&str]| args.iter().all(|a| signs[*a]);
            let signed = match &e.op {
                FlatOp::Add(a, b)
                | FlatOp::Sub(a, b)
                | FlatOp::Mul(a, b)
                | FlatOp::And(a, b)
                | FlatOp::Or(a, b)
                | FlatOp::Xor(a, b) => all_signed(&[a, b]),
                FlatOp::MulConst(a, c) => {
                    if !const_ok(*c) {
                        return fail(format!("constant {c} does not fit in {n} bits"));
                    }
                    arg_sign(a) && *c < sign_threshold
                }
                FlatOp::Not(a) | FlatOp::Copy(a) => arg_sign(a),
                FlatOp::ShlConst(a, k) | FlatOp::ShrConst(a, k) => {
                    if *k >= n {
                        return fail(format!("shift by {k} exceeds width {n}"));
                    }
                    arg_sign(a)
                }
                FlatOp::Lt(..) | FlatOp::Gt(..) | FlatOp::Le(..) | FlatOp::Ge(..)
                | FlatOp::Eq(..) | FlatOp::Neq(..) => true,
                FlatOp::Mux(_, a, b) => all_signed(&[a, b]),
                FlatOp::Const(c, signed) => {
                    let in_range = if *signed {
                        -sign_threshold <= *c && *c < sign_threshold
                    } else {
                        0 <= *c && *c < (1i64 << n)
                    };
                    if !in_range {
                        return fail(format!(
                            "constant {c} does not fit a {n}-bit {}",
                            if *signed { "signed value" } else { "unsigned value" }
                        ));
                    }
                    *signed
                }
            };
            if signs.insert(e.dest.clone(), signed).is_some() {
                return fail(format!("\"{}\" assigned more than once", e.dest));
            }
        }
        let mut out_names = std::collections::BTreeSet::new();
        for v in &self.outputs {
            if !out_names.insert(v.name.as_str()) {
                return fail(format!("duplicate output \"{}\"", v.name));
            }
            if self.inputs.iter().any(|i| i.name == v.name) {
                return fail(format!("output \"{}\" is also an input", v.name));
            }
            if !signs.contains_key(&v.name) {
                return fail(format!("output \"{}\" is never assigned", v.name));
            }
        }
        Ok(signs)
    }

    pub fn validate(&self) -> Result<(), FrontendError> {
        self.wire_signs().map(|_| ())
    }

    /// Executes the program on raw `bit_width`-wide input values, returning
    /// output values in declared order.
    pub fn interpret(&self, inputs: &[u64]) -> Result<Vec<u64>, FrontendError> {
        let signs = self.wire_signs()?;
        if inputs.len() != self.inputs.len() {
            return Err(FrontendError::InputCount {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        let n = self.bit_width;
        let mut env: BTreeMap<&str, u64> = BTreeMap::new();
        for (var, &value) in self.inputs.iter().zip(inputs) {
            if value >> (n - 1) >> 1 != 0 {
                return Err(FrontendError::InputRange { value, bits: n });
            }
            env.insert(&var.name, value);
        }
        for e in &self.exprs {
            let get = |a: &str| env[a];
            let cmp_sign = |a: &str, b: &str| signs[a] && signs[b];
            let v = match &e.op {
                FlatOp::Add(a, b) => twos::add(n, get(a), get(b)),
                FlatOp::Sub(a, b) => twos::sub(n, get(a), get(b)),
                FlatOp::Mul(a, b) => twos::mul(n, get(a), get(b)),
                FlatOp::MulConst(a, c) => twos::mul(n, get(a), twos::from_signed(n, *c)),
                FlatOp::And(a, b) => get(a) & get(b),
                FlatOp::Or(a, b) => get(a) | get(b),
                FlatOp::Xor(a, b) => get(a) ^ get(b),
                FlatOp::Not(a) => twos::not(n, get(a)),
                FlatOp::ShlConst(a, k) => twos::shl(n, get(a), *k),
                FlatOp::ShrConst(a, k) => twos::shr(n, signs[a.as_str()], get(a), *k),
                FlatOp::Lt(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Lt, get(a), get(b)),
                FlatOp::Gt(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Gt, get(a), get(b)),
                FlatOp::Le(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Le, get(a), get(b)),
                FlatOp::Ge(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Ge, get(a), get(b)),
                FlatOp::Eq(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Eq, get(a), get(b)),
                FlatOp::Neq(a, b) => twos::cmp(n, cmp_sign(a, b), Rel::Neq, get(a), get(b)),
                FlatOp::Mux(c, a, b) => {
                    if get(c) != 0 {
                        get(a)
                    } else {
                        get(b)
                    }
                }
                FlatOp::Const(c, _) => twos::from_signed(n, *c),
                FlatOp::Copy(a) => get(a),
            };
            env.insert(&e.dest, v);
        }
        Ok(self.outputs.iter().map(|o| env[o.name.as_str()]).collect())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("bitwidth {}\n", self.bit_width));
        let sign_word = |s: bool| if s { "signed" } else { "unsigned" };
        for v in &self.inputs {
            out.push_str(&format!("input {} {}\n", v.name, sign_word(v.signed)));
        }
        for v in &self.outputs {
            out.push_str(&format!("output {} {}\n", v.name, sign_word(v.signed)));
        }
        for e in &self.exprs {
            let rhs = match &e.op {
                FlatOp::Add(a, b) => format!("ADD({a}, {b})"),
                FlatOp::Sub(a, b) => format!("SUB({a}, {b})"),
                FlatOp::Mul(a, b) => format!("MUL({a}, {b})"),
                FlatOp::MulConst(a, c) => format!("MUL-CONST({a}, {c})"),
                FlatOp::And(a, b) => format!("AND({a}, {b})"),
                FlatOp::Or(a, b) => format!("OR({a}, {b})"),
                FlatOp::Xor(a, b) => format!("XOR({a}, {b})"),
                FlatOp::Not(a) => format!("NOT({a})"),
                FlatOp::ShlConst(a, k) => format!("SHL-CONST({a}, {k})"),
                FlatOp::ShrConst(a, k) => format!("SHR-CONST({a}, {k})"),
                FlatOp::Lt(a, b) => format!("LT({a}, {b})"),
                FlatOp::Gt(a, b) => format!("GT({a}, {b})"),
                FlatOp::Le(a, b) => format!("LE({a}, {b})"),
                FlatOp::Ge(a, b) => format!("GE({a}, {b})"),
                FlatOp::Eq(a, b) => format!("EQ({a}, {b})"),
                FlatOp::Neq(a, b) => format!("NEQ({a}, {b})"),
                FlatOp::Mux(c, a, b) => format!("MUX({c}, {a}, {b})"),
                FlatOp::Const(c, true) => format!("CONST({c})"),
                FlatOp::Const(c, false) => format!("CONST({c}u)"),
                FlatOp::Copy(a) => a.clone(),
            };
            out.push_str(&format!("{} = {rhs}\n", e.dest));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FrontendError> {
        let perr = |msg: String, line: u32| FrontendError::ParseError { msg, line };
        let mut bit_width = None;
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut exprs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lno = idx as u32 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words[0] {
                "bitwidth" => {
                    if bit_width.is_some() || words.len() != 2 {
                        return Err(perr("malformed bitwidth header".into(), lno));
                    }
                    bit_width = Some(
                        words[1]
                            .parse::<u32>()
                            .map_err(|_| perr(format!("bad bit width \"{}\"", words[1]), lno))?,
                    );
                }
                kw @ ("input" | "output") => {
                    if words.len() != 3 {
                        return Err(perr(format!("malformed {kw} header"), lno));
                    }
                    let signed = match words[2] {
                        "signed" => true,
                        "unsigned" => false,
                        other => return Err(perr(format!("bad signedness \"{other}\""), lno)),
                    };
                    if !is_wire_name(words[1]) {
                        return Err(perr(format!("bad wire name \"{}\"", words[1]), lno));
                    }
                    let var = FlatVar::new(words[1], signed);
                    if kw == "input" {
                        inputs.push(var);
                    } else {
                        outputs.push(var);
                    }
                }
                _ => exprs.push(parse_expr(line, lno)?),
            }
        }
        let bit_width =
            bit_width.ok_or_else(|| perr("missing bitwidth header".into(), 1))?;
        let prog = FlatProgram { bit_width, inputs, outputs, exprs };
        prog.validate()?;
        Ok(prog)
    }
}

fn is_wire_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

/// Parses a constant literal, returning `(value, signed)`; a `u`/`U` suffix
/// marks the value unsigned.
fn parse_const_literal(s: &str) -> Option<(i64, bool)> {
    if let Some(body) = s.strip_suffix(['u', 'U']) {
        let v = body.parse::<i64>().ok()?;
        (v >= 0).then_some((v, false))
    } else {
        s.parse::<i64>().ok().map(|v| (v, true))
    }
}

fn parse_expr(line: &str, lno: u32) -> Result<FlatExpr, FrontendError> {
    let perr = |msg: String| FrontendError::ParseError { msg, line: lno };
    let (dest, rhs) = line
        .split_once('=')
        .ok_or_else(|| perr(format!("expected `dest = ...`, got \"{line}\"")))?;
    let (dest, rhs) = (dest.trim(), rhs.trim());
    if !is_wire_name(dest) {
        return Err(perr(format!("bad destination name \"{dest}\"")));
    }
    let op = if let Some((name, rest)) = rhs.split_once('(') {
        let name = name.trim();
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| perr(format!("missing closing paren in \"{rhs}\"")))?;
        let args: Vec<&str> = if inner.trim().is_empty() {
            vec![]
        } else {
            inner.split(',').map(str::trim).collect()
        };
        let wire = |i: usize| -> Result<String, FrontendError> {
            let a = args[i];
            if is_wire_name(a) {
                Ok(a.to_string())
            } else {
                Err(perr(format!("bad wire name \"{a}\"")))
            }
        };
        let int = |i: usize| -> Result<i64, FrontendError> {
            args[i]
                .parse::<i64>()
                .map_err(|_| perr(format!("bad integer literal \"{}\"", args[i])))
        };
        let arity = |want: usize| -> Result<(), FrontendError> {
            if args.len() == want {
                Ok(())
            } else {
                Err(perr(format!("{name} expects {want} arguments, got {}", args.len())))
            }
        };
        match name {
            "ADD" | "SUB" | "MUL" | "AND" | "OR" | "XOR" | "LT" | "GT" | "LE" | "GE"
            | "EQ" | "NEQ" => {
                arity(2)?;
                let (a, b) = (wire(0)?, wire(1)?);
                match name {
                    "ADD" => FlatOp::Add(a, b),
                    "SUB" => FlatOp::Sub(a, b),
                    "MUL" => FlatOp::Mul(a, b),
                    "AND" => FlatOp::And(a, b),
                    "OR" => FlatOp::Or(a, b),
                    "XOR" => FlatOp::Xor(a, b),
                    "LT" => FlatOp::Lt(a, b),
                    "GT" => FlatOp::Gt(a, b),
                    "LE" => FlatOp::Le(a, b),
                    "GE" => FlatOp::Ge(a, b),
                    "EQ" => FlatOp::Eq(a, b),
                    _ => FlatOp::Neq(a, b),
                }
            }
            "MUL-CONST" => {
                arity(2)?;
                FlatOp::MulConst(wire(0)?, int(1)?)
            }
            "NOT" => {
                arity(1)?;
                FlatOp::Not(wire(0)?)
            }
            "SHL-CONST" | "SHR-CONST" => {
                arity(2)?;
                let k = u32::try_from(int(1)?)
                    .map_err(|_| perr(format!("negative shift in \"{rhs}\"")))?;
                if name == "SHL-CONST" {
                    FlatOp::ShlConst(wire(0)?, k)
                } else {
                    FlatOp::ShrConst(wire(0)?, k)
                }
            }
            "MUX" => {
                arity(3)?;
                FlatOp::Mux(wire(0)?, wire(1)?, wire(2)?)
            }
            "CONST" => {
                arity(1)?;
                let (c, signed) = parse_const_literal(args[0])
                    .ok_or_else(|| perr(format!("bad constant literal \"{}\"", args[0])))?;
                FlatOp::Const(c, signed)
            }
            other => return Err(perr(format!("unknown operation \"{other}\""))),
        }
    } else if let Some((c, signed)) = parse_const_literal(rhs) {
        FlatOp::Const(c, signed)
    } else if is_wire_name(rhs) {
        FlatOp::Copy(rhs.to_string())
    } else {
        return Err(perr(format!("unparseable expression \"{rhs}\"")));
    };
    Ok(FlatExpr { dest: dest.to_string(), op })
}
