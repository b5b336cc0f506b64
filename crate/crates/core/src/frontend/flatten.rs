//! Flattening: partial evaluation of a contract into a [`FlatProgram`].
//!
//! The flattener walks the AST like an interpreter, but over a value domain
//! where every scalar is either a compile-time constant or a named flat wire.
//! Anything computable without inputs folds away; loops unroll while their
//! condition stays constant; calls inline; input-dependent `if`/`else` runs
//! both branches on cloned environments and merges differing bindings with
//! `MUX` expressions.
//!
//! Two signedness notions are tracked per wire: the C type signedness (for
//! choosing operation semantics) and the signedness the flat format derives
//! from the expression structure (see [`FlatProgram::wire_signs`]). They can
//! drift apart through C assignment conversions; at the sign-sensitive sites
//! (ordered comparisons and right shifts) the flattener reconciles them,
//! e.g. by biasing both comparison operands with `2^(n-1)` so an unsigned
//! comparison realizes the signed one.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::flat::{FlatExpr, FlatOp, FlatProgram, FlatVar};
use super::interp::{fold_binop, fold_unop};
use super::symbols::SymbolTable;
use super::{FlattenConfig, FrontendError};
use crate::twos;

/// Upper bound on evaluated statements across the whole flattening run.
const STEP_BUDGET: u64 = 10_000_000;
const MAX_CALL_DEPTH: usize = 64;

pub fn flatten(table: &SymbolTable, cfg: &FlattenConfig) -> Result<FlatProgram, FrontendError> {
    let n = cfg.bit_width;
    if n < 1 || n > twos::MAX_WIDTH {
        return Err(FrontendError::FlatProgram(format!(
            "bit width {n} outside 1..={}",
            twos::MAX_WIDTH
        )));
    }
    let mut fl = Flattener {
        table,
        n,
        max_unroll: cfg.max_unroll,
        exprs: Vec::new(),
        claimed: BTreeSet::new(),
        derived: BTreeMap::new(),
        bools: BTreeSet::new(),
        consts: BTreeMap::new(),
        globals: BTreeMap::new(),
        locals: vec![BTreeMap::new()],
        call_stack: Vec::new(),
        temp_counter: 0,
        steps: 0,
    };

    let mut inputs = Vec::new();
    for slot in &table.entry.inputs {
        fl.claimed.insert(slot.name.clone());
        fl.derived.insert(slot.name.clone(), slot.signed);
        inputs.push(FlatVar::new(&slot.name, slot.signed));
    }
    // Output wire names; a collision with an input slot gets an out_ prefix.
    let mut outputs = Vec::new();
    for slot in &table.entry.outputs {
        let name = if fl.claimed.contains(&slot.name) {
            fl.fresh(&format!("out_{}", slot.name))
        } else {
            fl.claimed.insert(slot.name.clone());
            slot.name.clone()
        };
        outputs.push(FlatVar::new(name, slot.signed));
    }

    fl.init_globals()?;

    let mut slot_iter = table.entry.inputs.iter();
    let in_val = fl.build_input_struct(&table.entry.in_struct, &mut slot_iter)?;
    let out_val = fl.zero_struct(&table.entry.out_struct)?;
    let entry = table.functions[&table.entry.name].clone();
    let mut frame = BTreeMap::new();
    frame.insert(table.entry.in_param.clone(), in_val);
    frame.insert(table.entry.out_param.clone(), out_val);
    fl.locals = vec![frame];
    fl.call_stack.push(entry.name.clone());
    fl.exec_block(&entry.body)?;

    let final_out = fl.locals[0][&table.entry.out_param].clone();
    let mut out_scalars = Vec::new();
    fl.read_struct_scalars(&table.entry.out_struct, &final_out, &mut out_scalars)?;
    debug_assert_eq!(out_scalars.len(), outputs.len());
    for (sc, var) in out_scalars.into_iter().zip(&outputs) {
        let op = match sc {
            Sc::Wire { name, .. } => FlatOp::Copy(name),
            Sc::Const { raw, signed } => FlatOp::Const(encode_const(n, raw, signed), signed),
        };
        fl.emit_named(var.name.clone(), op, false);
    }

    let prog = FlatProgram { bit_width: n, inputs, outputs, exprs: fl.exprs };
    let signs = prog.wire_signs()?;
    debug_assert_eq!(signs, fl.derived, "derived-signedness tracking diverged");
    Ok(prog)
}

/// Scalar value during partial evaluation: a known constant or a flat wire,
/// each carrying its C type signedness.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Sc {
    Const { raw: u64, signed: bool },
    Wire { name: String, signed: bool },
}

impl Sc {
    fn signed(&self) -> bool {
        match self {
            Sc::Const { signed, .. } | Sc::Wire { signed, .. } => *signed,
        }
    }
}

fn resign(sc: Sc, signed: bool) -> Sc {
    match sc {
        Sc::Const { raw, .. } => Sc::Const { raw, signed },
        Sc::Wire { name, .. } => Sc::Wire { name, signed },
    }
}

fn encode_const(n: u32, raw: u64, signed: bool) -> i64 {
    if signed {
        twos::to_signed(n, raw)
    } else {
        raw as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Val {
    Sc(Sc),
    Struct(BTreeMap<String, Val>),
    Array(Vec<Val>),
}

enum Flow {
    Normal,
    Returned(Option<Val>),
}

enum Seg {
    Field(String),
    Idx(usize),
}

struct Flattener<'a> {
    table: &'a SymbolTable,
    n: u32,
    max_unroll: u32,
    exprs: Vec<FlatExpr>,
    claimed: BTreeSet<String>,
    /// Mirrors the signedness the flat format will derive for each wire.
    derived: BTreeMap<String, bool>,
    /// Wires known to carry only 0 or 1.
    bools: BTreeSet<String>,
    /// Cache of materialized constants, keyed by encoded value + signedness.
    consts: BTreeMap<(i64, bool), String>,
    globals: BTreeMap<String, Val>,
    locals: Vec<BTreeMap<String, Val>>,
    call_stack: Vec<String>,
    temp_counter: u64,
    steps: u64,
}

fn is_auto_temp(s: &str) -> bool {
    s.strip_prefix('t')
        .is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

impl<'a> Flattener<'a> {
    fn unsupported(&self, msg: impl Into<String>, line: u32) -> FrontendError {
        FrontendError::UnsupportedConstruct { msg: msg.into(), line }
    }

    fn tick(&mut self, line: u32) -> Result<(), FrontendError> {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            Err(FrontendError::UnboundedLoop { line })
        } else {
            Ok(())
        }
    }

    // ---- wire emission ----

    fn fresh(&mut self, hint: &str) -> String {
        let mut name = hint.to_string();
        let mut k = 1;
        while self.claimed.contains(&name) {
            k += 1;
            name = format!("{hint}_{k}");
        }
        self.claimed.insert(name.clone());
        name
    }

    fn fresh_temp(&mut self) -> String {
        loop {
            let name = format!("t{}", self.temp_counter);
            self.temp_counter += 1;
            if self.claimed.insert(name.clone()) {
                return name;
            }
        }
    }

    /// The signedness `FlatProgram::wire_signs` will derive for this op.
    fn derived_of(&self, op: &FlatOp) -> bool {
        let d = |w: &String| self.derived[w];
        match op {
            FlatOp::Add(a, b)
            | FlatOp::Sub(a, b)
            | FlatOp::Mul(a, b)
            | FlatOp::And(a, b)
            | FlatOp::Or(a, b)
            | FlatOp::Xor(a, b) => d(a) && d(b),
            FlatOp::MulConst(a, c) => d(a) && *c < (1i64 << (self.n - 1)),
            FlatOp::Not(a) | FlatOp::ShlConst(a, _) | FlatOp::ShrConst(a, _)
            | FlatOp::Copy(a) => d(a),
            FlatOp::Lt(..) | FlatOp::Gt(..) | FlatOp::Le(..) | FlatOp::Ge(..)
            | FlatOp::Eq(..) | FlatOp::Neq(..) => true,
            FlatOp::Mux(_, a, b) => d(a) && d(b),
            FlatOp::Const(_, signed) => *signed,
        }
    }

    fn emit_named(&mut self, dest: String, op: FlatOp, is_bool: bool) -> String {
        let der = self.derived_of(&op);
        self.derived.insert(dest.clone(), der);
        if is_bool {
            self.bools.insert(dest.clone());
        }
        self.exprs.push(FlatExpr { dest: dest.clone(), op });
        dest
    }

    fn emit(&mut self, op: FlatOp, is_bool: bool) -> String {
        let dest = self.fresh_temp();
        self.emit_named(dest, op, is_bool)
    }

    fn const_wire(&mut self, raw: u64, signed: bool) -> String {
        let enc = encode_const(self.n, raw, signed);
        if let Some(w) = self.consts.get(&(enc, signed)) {
            return w.clone();
        }
        let w = self.emit(FlatOp::Const(enc, signed), raw <= 1);
        self.consts.insert((enc, signed), w.clone());
        w
    }

    fn wire_of(&mut self, sc: &Sc) -> String {
        match sc {
            Sc::Wire { name, .. } => name.clone(),
            Sc::Const { raw, signed } => self.const_wire(*raw, *signed),
        }
    }

    /// Renames the just-emitted wire after the source variable it initializes,
    /// keeping flat programs readable (`val = ADD(i1, i2)` instead of `t0`).
    fn label(&mut self, val: Val, hint: &str) -> Val {
        if let Val::Sc(Sc::Wire { name, signed }) = &val {
            let fresh_here = self
                .exprs
                .last()
                .is_some_and(|e| &e.dest == name && is_auto_temp(name));
            if fresh_here && !self.consts.values().any(|c| c == name) {
                let new = self.fresh(hint);
                self.exprs.last_mut().unwrap().dest = new.clone();
                let d = self.derived.remove(name).unwrap();
                self.derived.insert(new.clone(), d);
                if self.bools.remove(name) {
                    self.bools.insert(new.clone());
                }
                return Val::Sc(Sc::Wire { name: new, signed: *signed });
            }
        }
        val
    }

    fn sc_is_bool(&self, sc: &Sc) -> bool {
        match sc {
            Sc::Const { raw, .. } => *raw <= 1,
            Sc::Wire { name, .. } => self.bools.contains(name),
        }
    }

    /// Normalizes a scalar to {0,1} (logical truth value).
    fn to_bool(&mut self, sc: Sc) -> Sc {
        match sc {
            Sc::Const { raw, .. } => Sc::Const { raw: (raw != 0) as u64, signed: true },
            Sc::Wire { ref name, .. } if self.bools.contains(name) => {
                Sc::Wire { name: name.clone(), signed: true }
            }
            Sc::Wire { name, .. } => {
                let z = self.const_wire(0, false);
                Sc::Wire { name: self.emit(FlatOp::Neq(name, z), true), signed: true }
            }
        }
    }

    // ---- scalar operations ----

    fn eval_binop(
        &mut self,
        op: BinOp,
        a: Sc,
        b: Sc,
        line: u32,
    ) -> Result<Sc, FrontendError> {
        let n = self.n;
        if let (Sc::Const { raw: ra, signed: sa }, Sc::Const { raw: rb, signed: sb }) = (&a, &b)
        {
            let (raw, signed) = fold_binop(n, op, (*ra, *sa), (*rb, *sb))
                .map_err(|msg| self.unsupported(msg, line))?;
            return Ok(Sc::Const { raw, signed });
        }
        let result_signed = a.signed() && b.signed();
        let ones = twos::mask(n, !0u64);
        let const_raw = |sc: &Sc| match sc {
            Sc::Const { raw, .. } => Some(*raw),
            Sc::Wire { .. } => None,
        };
        match op {
            BinOp::Div | BinOp::Mod => {
                Err(self.unsupported("division by a non-constant operand", line))
            }
            BinOp::Add => {
                if const_raw(&a) == Some(0) {
                    return Ok(resign(b, result_signed));
                }
                if const_raw(&b) == Some(0) {
                    return Ok(resign(a, result_signed));
                }
                let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                let w = self.emit(FlatOp::Add(wa, wb), false);
                Ok(Sc::Wire { name: w, signed: result_signed })
            }
            BinOp::Sub => {
                if const_raw(&b) == Some(0) {
                    return Ok(resign(a, result_signed));
                }
                if const_raw(&a) == Some(0) {
                    let wb = self.wire_of(&b);
                    let w = self.emit(FlatOp::MulConst(wb, -1), false);
                    return Ok(Sc::Wire { name: w, signed: result_signed });
                }
                let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                let w = self.emit(FlatOp::Sub(wa, wb), false);
                Ok(Sc::Wire { name: w, signed: result_signed })
            }
            BinOp::Mul => {
                let (c, w) = match (&a, &b) {
                    (Sc::Const { raw, signed }, other) | (other, Sc::Const { raw, signed }) => {
                        ((Some((*raw, *signed))), other.clone())
                    }
                    _ => (None, a.clone()),
                };
                match c {
                    Some((0, _)) => Ok(Sc::Const { raw: 0, signed: result_signed }),
                    Some((1, _)) => Ok(resign(w, result_signed)),
                    Some((raw, signed)) => {
                        let ww = self.wire_of(&w);
                        let enc = encode_const(n, raw, signed);
                        let out = self.emit(FlatOp::MulConst(ww, enc), false);
                        Ok(Sc::Wire { name: out, signed: result_signed })
                    }
                    None => {
                        let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                        let out = self.emit(FlatOp::Mul(wa, wb), false);
                        Ok(Sc::Wire { name: out, signed: result_signed })
                    }
                }
            }
            BinOp::And | BinOp::Or | BinOp::Xor => {
                let cval = const_raw(&a).or(const_raw(&b));
                let other = if const_raw(&a).is_some() { b.clone() } else { a.clone() };
                match (op, cval) {
                    (BinOp::And, Some(0)) => {
                        return Ok(Sc::Const { raw: 0, signed: result_signed })
                    }
                    (BinOp::And, Some(c)) if c == ones => {
                        return Ok(resign(other, result_signed))
                    }
                    (BinOp::Or, Some(0)) | (BinOp::Xor, Some(0)) => {
                        return Ok(resign(other, result_signed))
                    }
                    (BinOp::Or, Some(c)) if c == ones => {
                        return Ok(Sc::Const { raw: ones, signed: result_signed })
                    }
                    (BinOp::Xor, Some(c)) if c == ones => {
                        let w = self.wire_of(&other);
                        let out = self.emit(FlatOp::Not(w), false);
                        return Ok(Sc::Wire { name: out, signed: result_signed });
                    }
                    _ => {}
                }
                let out_bool = self.sc_is_bool(&a) && self.sc_is_bool(&b);
                let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                let fop = match op {
                    BinOp::And => FlatOp::And(wa, wb),
                    BinOp::Or => FlatOp::Or(wa, wb),
                    _ => FlatOp::Xor(wa, wb),
                };
                let out = self.emit(fop, out_bool);
                Ok(Sc::Wire { name: out, signed: result_signed })
            }
            BinOp::Shl | BinOp::Shr => {
                let Sc::Const { raw: kraw, signed: ksigned } = b else {
                    return Err(self.unsupported("shift by a non-constant amount", line));
                };
                if ksigned && twos::to_signed(n, kraw) < 0 {
                    return Err(self.unsupported("negative shift amount", line));
                }
                let k = kraw as u32;
                if k >= n {
                    return Err(self.unsupported(format!("shift amount {k} out of range"), line));
                }
                let csign = a.signed();
                if k == 0 {
                    return Ok(a);
                }
                let wa = self.wire_of(&a);
                if op == BinOp::Shl {
                    let w = self.emit(FlatOp::ShlConst(wa, k), false);
                    return Ok(Sc::Wire { name: w, signed: csign });
                }
                let derived = self.derived[&wa];
                let w = match (csign, derived) {
                    (true, true) | (false, false) => {
                        self.emit(FlatOp::ShrConst(wa, k), false)
                    }
                    (false, true) => {
                        // Wanted logical but the format would shift
                        // arithmetically: strip the derived sign first.
                        let z = self.const_wire(0, false);
                        let u = self.emit(FlatOp::Add(wa, z), false);
                        self.emit(FlatOp::ShrConst(u, k), false)
                    }
                    (true, false) => {
                        // Wanted arithmetic on a format-unsigned wire:
                        // logical shift plus a sign-extension mask.
                        let s = self.emit(FlatOp::ShrConst(wa.clone(), k), false);
                        let m = self.emit(FlatOp::ShrConst(wa, n - 1), true);
                        let mask = (((1u64 << k) - 1) << (n - k)) as i64;
                        let hi = self.emit(FlatOp::MulConst(m, mask), false);
                        self.emit(FlatOp::Add(s, hi), false)
                    }
                };
                Ok(Sc::Wire { name: w, signed: csign })
            }
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => self.emit_order_cmp(op, a, b),
            BinOp::Eq | BinOp::Ne => {
                let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                let fop = if op == BinOp::Eq {
                    FlatOp::Eq(wa, wb)
                } else {
                    FlatOp::Neq(wa, wb)
                };
                Ok(Sc::Wire { name: self.emit(fop, true), signed: true })
            }
            BinOp::LAnd | BinOp::LOr => unreachable!("short-circuit handled in eval"),
        }
    }

    /// Ordered comparison honoring C signedness. When the wanted signedness
    /// disagrees with the format-derived one, operands are adjusted: biasing
    /// both by `2^(n-1)` turns a signed comparison into an unsigned one, and
    /// adding an unsigned zero strips an unwanted derived sign.
    fn emit_order_cmp(&mut self, op: BinOp, a: Sc, b: Sc) -> Result<Sc, FrontendError> {
        let n = self.n;
        let wanted_signed = a.signed() && b.signed();
        let materialize = |fl: &mut Self, sc: &Sc| match sc {
            Sc::Wire { name, .. } => name.clone(),
            Sc::Const { raw, .. } => fl.const_wire(*raw, wanted_signed),
        };
        let mut wa = materialize(self, &a);
        let mut wb = materialize(self, &b);
        if wanted_signed {
            if !(self.derived[&wa] && self.derived[&wb]) {
                let bias = self.const_wire(1u64 << (n - 1), false);
                wa = self.emit(FlatOp::Add(wa, bias.clone()), false);
                wb = self.emit(FlatOp::Add(wb, bias), false);
            }
        } else {
            if self.derived[&wa] {
                let z = self.const_wire(0, false);
                wa = self.emit(FlatOp::Add(wa, z), false);
            }
            if self.derived[&wb] {
                let z = self.const_wire(0, false);
                wb = self.emit(FlatOp::Add(wb, z), false);
            }
        }
        let fop = match op {
            BinOp::Lt => FlatOp::Lt(wa, wb),
            BinOp::Gt => FlatOp::Gt(wa, wb),
            BinOp::Le => FlatOp::Le(wa, wb),
            BinOp::Ge => FlatOp::Ge(wa, wb),
            _ => unreachable!(),
        };
        Ok(Sc::Wire { name: self.emit(fop, true), signed: true })
    }

    fn eval_unop(&mut self, op: UnOp, v: Sc) -> Result<Sc, FrontendError> {
        if let Sc::Const { raw, signed } = v {
            let (raw, signed) = fold_unop(self.n, op, (raw, signed));
            return Ok(Sc::Const { raw, signed });
        }
        let csign = v.signed();
        let w = self.wire_of(&v);
        match op {
            UnOp::Neg => {
                let out = self.emit(FlatOp::MulConst(w, -1), false);
                Ok(Sc::Wire { name: out, signed: csign })
            }
            UnOp::BitNot => {
                let out = self.emit(FlatOp::Not(w), false);
                Ok(Sc::Wire { name: out, signed: csign })
            }
            UnOp::LogNot => {
                let out = if self.bools.contains(&w) {
                    let one = self.const_wire(1, false);
                    self.emit(FlatOp::Xor(w, one), true)
                } else {
                    let z = self.const_wire(0, false);
                    self.emit(FlatOp::Eq(w, z), true)
                };
                Ok(Sc::Wire { name: out, signed: true })
            }
            UnOp::Deref => Ok(v),
        }
    }

    // ---- environment ----

    fn init_globals(&mut self) -> Result<(), FrontendError> {
        for g in &self.table.globals.clone() {
            let val = match (&g.ty.base, g.array, &g.init) {
                (BaseType::Int { signed }, None, Some(init)) => {
                    let sc = self.eval_scalar(init)?;
                    Val::Sc(resign(sc, *signed))
                }
                (BaseType::Int { signed }, None, None) => {
                    Val::Sc(Sc::Const { raw: 0, signed: *signed })
                }
                (BaseType::Int { signed }, Some(len), None) => Val::Array(vec![
                        Val::Sc(Sc::Const { raw: 0, signed: *signed });
                        len
                    ]),
                (BaseType::Struct(sn), None, None) => self.zero_struct(sn)?,
                _ => {
                    return Err(self.unsupported(
                        format!("unsupported global declaration \"{}\"", g.name),
                        g.line,
                    ))
                }
            };
            self.globals.insert(g.name.clone(), val);
        }
        Ok(())
    }

    fn struct_def(&self, name: &str, line: u32) -> Result<&'a StructDef, FrontendError> {
        self.table
            .structs
            .get(name)
            .ok_or_else(|| self.unsupported(format!("unknown struct \"{name}\""), line))
    }

    fn zero_struct(&self, name: &str) -> Result<Val, FrontendError> {
        let def = self.struct_def(name, 0)?;
        let mut fields = BTreeMap::new();
        for f in &def.fields {
            let v = match (&f.ty.base, f.array) {
                (BaseType::Int { signed }, None) => {
                    Val::Sc(Sc::Const { raw: 0, signed: *signed })
                }
                (BaseType::Int { signed }, Some(len)) => Val::Array(vec![
                        Val::Sc(Sc::Const { raw: 0, signed: *signed });
                        len
                    ]),
                (BaseType::Struct(inner), None) => self.zero_struct(inner)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            };
            fields.insert(f.name.clone(), v);
        }
        Ok(Val::Struct(fields))
    }

    fn build_input_struct(
        &self,
        name: &str,
        slots: &mut std::slice::Iter<'_, super::symbols::IoSlot>,
    ) -> Result<Val, FrontendError> {
        let def = self.struct_def(name, 0)?;
        let mut fields = BTreeMap::new();
        for f in &def.fields {
            let wire = |slots: &mut std::slice::Iter<'_, super::symbols::IoSlot>| {
                let slot = slots.next().expect("slot count matches struct shape");
                Val::Sc(Sc::Wire { name: slot.name.clone(), signed: slot.signed })
            };
            let v = match (&f.ty.base, f.array) {
                (BaseType::Int { .. }, None) => wire(slots),
                (BaseType::Int { .. }, Some(len)) => {
                    Val::Array((0..len).map(|_| wire(slots)).collect())
                }
                (BaseType::Struct(inner), None) => self.build_input_struct(inner, slots)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            };
            fields.insert(f.name.clone(), v);
        }
        Ok(Val::Struct(fields))
    }

    /// Reads struct scalars in declaration order (not map order).
    fn read_struct_scalars(
        &self,
        name: &str,
        value: &Val,
        out: &mut Vec<Sc>,
    ) -> Result<(), FrontendError> {
        let Val::Struct(fields) = value else {
            return Err(self.unsupported("expected struct value", 0));
        };
        let def = self.struct_def(name, 0)?;
        for f in &def.fields {
            match (&f.ty.base, &fields[&f.name]) {
                (BaseType::Int { .. }, Val::Sc(sc)) => out.push(sc.clone()),
                (BaseType::Int { .. }, Val::Array(items)) => {
                    for item in items {
                        let Val::Sc(sc) = item else {
                            return Err(self.unsupported("expected scalar element", f.line));
                        };
                        out.push(sc.clone());
                    }
                }
                (BaseType::Struct(inner), v) => self.read_struct_scalars(inner, v, out)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            }
        }
        Ok(())
    }

    // ---- branch merging ----

    fn merge_env(
        &mut self,
        cond: &str,
        then_globals: BTreeMap<String, Val>,
        then_locals: Vec<BTreeMap<String, Val>>,
        line: u32,
    ) -> Result<(), FrontendError> {
        let else_globals = std::mem::take(&mut self.globals);
        self.globals = self.merge_map(cond, then_globals, else_globals, line)?;
        let else_locals = std::mem::take(&mut self.locals);
        debug_assert_eq!(then_locals.len(), else_locals.len());
        let mut merged = Vec::with_capacity(else_locals.len());
        for (t, e) in then_locals.into_iter().zip(else_locals) {
            merged.push(self.merge_map(cond, t, e, line)?);
        }
        self.locals = merged;
        Ok(())
    }

    fn merge_map(
        &mut self,
        cond: &str,
        t: BTreeMap<String, Val>,
        mut e: BTreeMap<String, Val>,
        line: u32,
    ) -> Result<BTreeMap<String, Val>, FrontendError> {
        let mut merged = BTreeMap::new();
        for (k, tv) in t {
            let ev = e.remove(&k).ok_or_else(|| {
                FrontendError::FlatProgram(format!("branch environments diverged at \"{k}\""))
            })?;
            merged.insert(k, self.merge_val(cond, tv, ev, line)?);
        }
        Ok(merged)
    }

    fn merge_val(&mut self, cond: &str, t: Val, e: Val, line: u32) -> Result<Val, FrontendError> {
        if t == e {
            return Ok(t);
        }
        match (t, e) {
            (Val::Sc(a), Val::Sc(b)) => {
                let signed = a.signed() && b.signed();
                let out_bool = self.sc_is_bool(&a) && self.sc_is_bool(&b);
                let (wa, wb) = (self.wire_of(&a), self.wire_of(&b));
                let w = self.emit(FlatOp::Mux(cond.to_string(), wa, wb), out_bool);
                Ok(Val::Sc(Sc::Wire { name: w, signed }))
            }
            (Val::Struct(t), Val::Struct(e)) => Ok(Val::Struct(self.merge_map(cond, t, e, line)?)),
            (Val::Array(t), Val::Array(e)) if t.len() == e.len() => {
                let mut items = Vec::with_capacity(t.len());
                for (tv, ev) in t.into_iter().zip(e) {
                    items.push(self.merge_val(cond, tv, ev, line)?);
                }
                Ok(Val::Array(items))
            }
            _ => Err(FrontendError::FlatProgram(
                "branch value shapes diverged".into(),
            )),
        }
    }

    // ---- statements ----

    fn exec_block(&mut self, b: &Block) -> Result<Flow, FrontendError> {
        self.locals.push(BTreeMap::new());
        let mut flow = Flow::Normal;
        for s in &b.stmts {
            flow = self.exec_stmt(s)?;
            if matches!(flow, Flow::Returned(_)) {
                break;
            }
        }
        self.locals.pop();
        Ok(flow)
    }

    fn exec_stmt(&mut self, s: &Stmt) -> Result<Flow, FrontendError> {
        match s {
            Stmt::Empty => Ok(Flow::Normal),
            Stmt::Block(b) => self.exec_block(b),
            Stmt::Decl { ty, name, array, init, line } => {
                self.tick(*line)?;
                let val = match (&ty.base, array, init) {
                    (BaseType::Int { signed }, None, Some(e)) => {
                        let sc = self.eval_scalar(e)?;
                        self.label(Val::Sc(resign(sc, *signed)), name)
                    }
                    (BaseType::Int { signed }, None, None) => {
                        Val::Sc(Sc::Const { raw: 0, signed: *signed })
                    }
                    (BaseType::Int { signed }, Some(len), None) => Val::Array(vec![
                            Val::Sc(Sc::Const { raw: 0, signed: *signed });
                            *len
                        ]),
                    (BaseType::Struct(sn), None, None) => self.zero_struct(sn)?,
                    (BaseType::Struct(_), None, Some(e)) => self.eval(e)?,
                    _ => return Err(self.unsupported("unsupported declaration", *line)),
                };
                let scope = self.locals.last_mut().unwrap();
                if scope.insert(name.clone(), val).is_some() {
                    return Err(FrontendError::DuplicateSymbol(name.clone()));
                }
                Ok(Flow::Normal)
            }
            Stmt::Expr(e, line) => {
                self.tick(*line)?;
                self.eval(e)?;
                Ok(Flow::Normal)
            }
            Stmt::If { cond, then_blk, else_blk, line } => {
                self.tick(*line)?;
                match self.eval_scalar(cond)? {
                    // Static condition: only the taken branch is flattened.
                    Sc::Const { raw, .. } => {
                        if raw != 0 {
                            self.exec_block(then_blk)
                        } else if let Some(b) = else_blk {
                            self.exec_block(b)
                        } else {
                            Ok(Flow::Normal)
                        }
                    }
                    Sc::Wire { name: cw, .. } => {
                        let pre_globals = self.globals.clone();
                        let pre_locals = self.locals.clone();
                        let flow_t = self.exec_block(then_blk)?;
                        let then_globals = std::mem::replace(&mut self.globals, pre_globals);
                        let then_locals = std::mem::replace(&mut self.locals, pre_locals);
                        let flow_e = match else_blk {
                            Some(b) => self.exec_block(b)?,
                            None => Flow::Normal,
                        };
                        if matches!(flow_t, Flow::Returned(_))
                            || matches!(flow_e, Flow::Returned(_))
                        {
                            return Err(self.unsupported(
                                "return under an input-dependent condition",
                                *line,
                            ));
                        }
                        self.merge_env(&cw, then_globals, then_locals, *line)?;
                        Ok(Flow::Normal)
                    }
                }
            }
            Stmt::While { cond, body, line } => {
                let mut iters = 0u32;
                loop {
                    self.tick(*line)?;
                    match self.eval_scalar(cond)? {
                        Sc::Const { raw: 0, .. } => break,
                        Sc::Const { .. } => {}
                        Sc::Wire { .. } => {
                            return Err(FrontendError::UnboundedLoop { line: *line })
                        }
                    }
                    iters += 1;
                    if iters > self.max_unroll {
                        return Err(FrontendError::UnboundedLoop { line: *line });
                    }
                    if let f @ Flow::Returned(_) = self.exec_block(body)? {
                        return Ok(f);
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::For { init, cond, step, body, line } => {
                self.locals.push(BTreeMap::new());
                let result = (|| {
                    if let Some(init) = init {
                        if let f @ Flow::Returned(_) = self.exec_stmt(init)? {
                            return Ok(f);
                        }
                    }
                    let mut iters = 0u32;
                    loop {
                        self.tick(*line)?;
                        if let Some(cond) = cond {
                            match self.eval_scalar(cond)? {
                                Sc::Const { raw: 0, .. } => break,
                                Sc::Const { .. } => {}
                                Sc::Wire { .. } => {
                                    return Err(FrontendError::UnboundedLoop { line: *line })
                                }
                            }
                        }
                        iters += 1;
                        if iters > self.max_unroll {
                            return Err(FrontendError::UnboundedLoop { line: *line });
                        }
                        if let f @ Flow::Returned(_) = self.exec_block(body)? {
                            return Ok(f);
                        }
                        if let Some(step) = step {
                            self.eval(step)?;
                        }
                    }
                    Ok(Flow::Normal)
                })();
                self.locals.pop();
                result
            }
            Stmt::Return(value, line) => {
                self.tick(*line)?;
                let v = match value {
                    Some(e) => Some(self.eval(e)?),
                    None => None,
                };
                Ok(Flow::Returned(v))
            }
        }
    }

    // ---- expressions ----

    fn eval_scalar(&mut self, e: &Expr) -> Result<Sc, FrontendError> {
        match self.eval(e)? {
            Val::Sc(sc) => Ok(sc),
            _ => Err(self.unsupported("expected an integer value", e.line())),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Val, FrontendError> {
        let n = self.n;
        match e {
            Expr::Int(v, line) => {
                if *v >> (n - 1) >> 1 != 0 {
                    return Err(self.unsupported(
                        format!("literal {v} does not fit in {n} bits"),
                        *line,
                    ));
                }
                Ok(Val::Sc(Sc::Const { raw: *v, signed: *v < 1 << (n - 1) }))
            }
            Expr::Ident(..) | Expr::Index(..) | Expr::Member(..) => {
                let (root, segs, line) = self.place_of(e)?;
                self.read_place(&root, &segs, line)
            }
            Expr::Unary(UnOp::Deref, inner, _) => self.eval(inner),
            Expr::Unary(op, inner, _) => {
                let sc = self.eval_scalar(inner)?;
                Ok(Val::Sc(self.eval_unop(*op, sc)?))
            }
            Expr::Binary(BinOp::LAnd, a, b, line) => match self.eval_scalar(a)? {
                Sc::Const { raw: 0, .. } => Ok(Val::Sc(Sc::Const { raw: 0, signed: true })),
                Sc::Const { .. } => {
                    let bv = self.eval_scalar(b)?;
                    Ok(Val::Sc(self.to_bool(bv)))
                }
                aw @ Sc::Wire { .. } => {
                    if b.has_side_effect() {
                        return Err(self.unsupported(
                            "side effect in \"&&\" operand under an input-dependent value",
                            *line,
                        ));
                    }
                    let bv = self.eval_scalar(b)?;
                    let ab = self.to_bool(aw);
                    let bb = self.to_bool(bv);
                    let (wa, wb) = (self.wire_of(&ab), self.wire_of(&bb));
                    let w = self.emit(FlatOp::And(wa, wb), true);
                    Ok(Val::Sc(Sc::Wire { name: w, signed: true }))
                }
            },
            Expr::Binary(BinOp::LOr, a, b, line) => match self.eval_scalar(a)? {
                Sc::Const { raw: 0, .. } => {
                    let bv = self.eval_scalar(b)?;
                    Ok(Val::Sc(self.to_bool(bv)))
                }
                Sc::Const { .. } => Ok(Val::Sc(Sc::Const { raw: 1, signed: true })),
                aw @ Sc::Wire { .. } => {
                    if b.has_side_effect() {
                        return Err(self.unsupported(
                            "side effect in \"||\" operand under an input-dependent value",
                            *line,
                        ));
                    }
                    let bv = self.eval_scalar(b)?;
                    let ab = self.to_bool(aw);
                    let bb = self.to_bool(bv);
                    let (wa, wb) = (self.wire_of(&ab), self.wire_of(&bb));
                    let w = self.emit(FlatOp::Or(wa, wb), true);
                    Ok(Val::Sc(Sc::Wire { name: w, signed: true }))
                }
            },
            Expr::Binary(op, a, b, line) => {
                let av = self.eval_scalar(a)?;
                let bv = self.eval_scalar(b)?;
                Ok(Val::Sc(self.eval_binop(*op, av, bv, *line)?))
            }
            Expr::Ternary(cond, t, f, line) => match self.eval_scalar(cond)? {
                Sc::Const { raw, .. } => {
                    if raw != 0 {
                        self.eval(t)
                    } else {
                        self.eval(f)
                    }
                }
                Sc::Wire { name: cw, .. } => {
                    if t.has_side_effect() || f.has_side_effect() {
                        return Err(self.unsupported(
                            "side effect in \"?:\" branch under an input-dependent condition",
                            *line,
                        ));
                    }
                    let tv = self.eval_scalar(t)?;
                    let fv = self.eval_scalar(f)?;
                    self.merge_val(&cw, Val::Sc(tv), Val::Sc(fv), *line)
                }
            },
            Expr::Assign(op, place, value, line) => {
                let (root, segs, _) = self.place_of(place)?;
                let current = self.read_place(&root, &segs, *line)?;
                let new = if let Some(op) = op {
                    let Val::Sc(old) = &current else {
                        return Err(self.unsupported("compound assignment to aggregate", *line));
                    };
                    let old = old.clone();
                    let rhs = self.eval_scalar(value)?;
                    let sc = self.eval_binop(*op, old.clone(), rhs, *line)?;
                    Val::Sc(resign(sc, old.signed()))
                } else {
                    let v = self.eval(value)?;
                    let coerced = match (&current, v) {
                        (Val::Sc(old), Val::Sc(sc)) => Val::Sc(resign(sc, old.signed())),
                        (Val::Struct(_), v @ Val::Struct(_)) => v,
                        (Val::Array(_), v @ Val::Array(_)) => v,
                        _ => return Err(self.unsupported("type mismatch in assignment", *line)),
                    };
                    if segs.is_empty() {
                        self.label(coerced, &root)
                    } else {
                        coerced
                    }
                };
                self.write_place(&root, &segs, new.clone(), *line)?;
                Ok(new)
            }
            Expr::IncDec { prefix, increment, place, line } => {
                let (root, segs, _) = self.place_of(place)?;
                let Val::Sc(old) = self.read_place(&root, &segs, *line)? else {
                    return Err(self.unsupported("increment of aggregate", *line));
                };
                let one = Sc::Const { raw: 1, signed: true };
                let op = if *increment { BinOp::Add } else { BinOp::Sub };
                let sc = self.eval_binop(op, old.clone(), one, *line)?;
                let new = resign(sc, old.signed());
                self.write_place(&root, &segs, Val::Sc(new.clone()), *line)?;
                Ok(Val::Sc(if *prefix { new } else { old }))
            }
            Expr::Call(name, args, line) => self.inline_call(name, args, *line),
        }
    }

    fn inline_call(
        &mut self,
        name: &str,
        args: &[Expr],
        line: u32,
    ) -> Result<Val, FrontendError> {
        if self.call_stack.iter().any(|f| f == name) {
            return Err(self.unsupported(format!("recursive call of \"{name}\""), line));
        }
        if self.call_stack.len() >= MAX_CALL_DEPTH {
            return Err(self.unsupported("call depth limit exceeded", line));
        }
        let func = self
            .table
            .functions
            .get(name)
            .cloned()
            .ok_or(FrontendError::UnknownIdentifier { name: name.to_string(), line })?;
        if func.params.len() != args.len() {
            return Err(self.unsupported(
                format!(
                    "\"{name}\" expects {} arguments, got {}",
                    func.params.len(),
                    args.len()
                ),
                line,
            ));
        }
        let mut frame = BTreeMap::new();
        for (p, a) in func.params.iter().zip(args) {
            if p.ty.pointer {
                return Err(self.unsupported(
                    format!("pointer parameter \"{}\" outside the entry point", p.name),
                    line,
                ));
            }
            let mut v = self.eval(a)?;
            if let (BaseType::Int { signed }, Val::Sc(sc)) = (&p.ty.base, &v) {
                v = Val::Sc(resign(sc.clone(), *signed));
            }
            frame.insert(p.name.clone(), v);
        }
        let saved = std::mem::replace(&mut self.locals, vec![frame]);
        self.call_stack.push(name.to_string());
        let flow = self.exec_block(&func.body);
        self.call_stack.pop();
        self.locals = saved;
        match flow? {
            Flow::Returned(Some(mut v)) => {
                if let (BaseType::Int { signed }, Val::Sc(sc)) = (&func.ret.base, &v) {
                    v = Val::Sc(resign(sc.clone(), *signed));
                }
                Ok(v)
            }
            _ => Ok(Val::Sc(Sc::Const { raw: 0, signed: true })),
        }
    }

    // ---- places ----

    fn place_of(&mut self, e: &Expr) -> Result<(String, Vec<Seg>, u32), FrontendError> {
        match e {
            Expr::Ident(name, line) => Ok((name.clone(), vec![], *line)),
            Expr::Index(base, idx, line) => {
                let (root, mut segs, _) = self.place_of(base)?;
                match self.eval_scalar(idx)? {
                    Sc::Const { raw, .. } => segs.push(Seg::Idx(raw as usize)),
                    Sc::Wire { .. } => return Err(FrontendError::DynamicIndex { line: *line }),
                }
                Ok((root, segs, *line))
            }
            Expr::Member(base, field, _, line) => {
                let (root, mut segs, _) = self.place_of(base)?;
                segs.push(Seg::Field(field.clone()));
                Ok((root, segs, *line))
            }
            Expr::Unary(UnOp::Deref, inner, _) => self.place_of(inner),
            other => Err(self.unsupported("expression is not assignable", other.line())),
        }
    }

    fn read_place(&self, root: &str, segs: &[Seg], line: u32) -> Result<Val, FrontendError> {
        let mut cur = self
            .locals
            .iter()
            .rev()
            .find_map(|s| s.get(root))
            .or_else(|| self.globals.get(root))
            .ok_or(FrontendError::UnknownIdentifier { name: root.to_string(), line })?;
        for seg in segs {
            cur = match (cur, seg) {
                (Val::Struct(fields), Seg::Field(f)) => fields
                    .get(f)
                    .ok_or_else(|| self.unsupported(format!("no field \"{f}\""), line))?,
                (Val::Array(items), Seg::Idx(i)) => items
                    .get(*i)
                    .ok_or_else(|| self.unsupported(format!("index {i} out of bounds"), line))?,
                _ => return Err(self.unsupported("invalid member access", line)),
            };
        }
        Ok(cur.clone())
    }

    fn write_place(
        &mut self,
        root: &str,
        segs: &[Seg],
        val: Val,
        line: u32,
    ) -> Result<(), FrontendError> {
        let unsupported = |msg: String| FrontendError::UnsupportedConstruct { msg, line };
        let slot = match self.locals.iter_mut().rev().find_map(|s| s.get_mut(root)) {
            Some(slot) => slot,
            None => self
                .globals
                .get_mut(root)
                .ok_or(FrontendError::UnknownIdentifier { name: root.to_string(), line })?,
        };
        let mut cur = slot;
        for seg in segs {
            cur = match (cur, seg) {
                (Val::Struct(fields), Seg::Field(f)) => fields
                    .get_mut(f)
                    .ok_or_else(|| unsupported(format!("no field \"{f}\"")))?,
                (Val::Array(items), Seg::Idx(i)) => items
                    .get_mut(*i)
                    .ok_or_else(|| unsupported(format!("index {i} out of bounds")))?,
                _ => return Err(unsupported("invalid member access".into())),
            };
        }
        *cur = val;
        Ok(())
    }
}
