//! Reference interpreter executing the contract AST directly.
//!
//! This is the semantic oracle for flattening: it performs real control flow
//! (branches execute one side, loops iterate at run time, calls push frames)
//! instead of partial evaluation, so agreement between this interpreter and
//! the flattened program is strong evidence the flattener preserved meaning.
//! Arithmetic is `bit_width`-wide two's complement via [`crate::twos`].

use std::collections::BTreeMap;

use super::ast::*;
use super::symbols::SymbolTable;
use super::{FlattenConfig, FrontendError};
use crate::twos::{self, Rel};

/// Upper bound on executed statements, guarding runaway loops.
const STEP_BUDGET: u64 = 10_000_000;

/// C arithmetic on `(raw, signed)` machine words: the single definition used
/// by both the reference interpreter and the flattener's constant folding.
/// `LAnd`/`LOr` are excluded — they short-circuit and are handled by callers.
pub(super) fn fold_binop(
    n: u32,
    op: BinOp,
    (a, a_signed): (u64, bool),
    (b, b_signed): (u64, bool),
) -> Result<(u64, bool), String> {
    let signed = a_signed && b_signed;
    let rel = |r: Rel| Ok((twos::cmp(n, signed, r, a, b), true));
    match op {
        BinOp::Add => Ok((twos::add(n, a, b), signed)),
        BinOp::Sub => Ok((twos::sub(n, a, b), signed)),
        BinOp::Mul => Ok((twos::mul(n, a, b), signed)),
        BinOp::Div | BinOp::Mod => {
            if b == 0 {
                return Err("division by zero".into());
            }
            let raw = if signed {
                let (sa, sb) = (twos::to_signed(n, a), twos::to_signed(n, b));
                let r = if op == BinOp::Div { sa / sb } else { sa % sb };
                twos::from_signed(n, r)
            } else if op == BinOp::Div {
                a / b
            } else {
                a % b
            };
            Ok((raw, signed))
        }
        BinOp::And => Ok((a & b, signed)),
        BinOp::Or => Ok((a | b, signed)),
        BinOp::Xor => Ok((a ^ b, signed)),
        BinOp::Shl | BinOp::Shr => {
            let k = if b_signed && twos::to_signed(n, b) < 0 { n } else { b as u32 };
            if k >= n {
                return Err(format!("shift amount {} out of range", twos::to_signed(n, b)));
            }
            let raw = if op == BinOp::Shl {
                twos::shl(n, a, k)
            } else {
                twos::shr(n, a_signed, a, k)
            };
            Ok((raw, a_signed))
        }
        BinOp::Lt => rel(Rel::Lt),
        BinOp::Gt => rel(Rel::Gt),
        BinOp::Le => rel(Rel::Le),
        BinOp::Ge => rel(Rel::Ge),
        BinOp::Eq => rel(Rel::Eq),
        BinOp::Ne => rel(Rel::Neq),
        BinOp::LAnd | BinOp::LOr => unreachable!("short-circuit handled by caller"),
    }
}

/// C unary arithmetic companion to [`fold_binop`].
pub(super) fn fold_unop(n: u32, op: UnOp, (a, signed): (u64, bool)) -> (u64, bool) {
    match op {
        UnOp::Neg => (twos::sub(n, 0, a), signed),
        UnOp::BitNot => (twos::not(n, a), signed),
        UnOp::LogNot => ((a == 0) as u64, true),
        UnOp::Deref => (a, signed),
    }
}

pub fn run_reference(
    table: &SymbolTable,
    cfg: &FlattenConfig,
    inputs: &[u64],
) -> Result<Vec<u64>, FrontendError> {
    if inputs.len() != table.entry.inputs.len() {
        return Err(FrontendError::InputCount {
            expected: table.entry.inputs.len(),
            got: inputs.len(),
        });
    }
    let n = cfg.bit_width;
    if n < 1 || n > twos::MAX_WIDTH {
        return Err(FrontendError::FlatProgram(format!(
            "bit width {n} outside 1..={}",
            twos::MAX_WIDTH
        )));
    }
    for &value in inputs {
        if value >> (n - 1) >> 1 != 0 {
            return Err(FrontendError::InputRange { value, bits: n });
        }
    }
    let mut interp = Interp {
        table,
        n,
        globals: BTreeMap::new(),
        locals: vec![BTreeMap::new()],
        call_stack: Vec::new(),
        steps: 0,
    };
    interp.init_globals()?;

    let mut vals = inputs.iter().copied();
    let in_struct = interp.build_input_struct(&table.entry.in_struct, &mut vals)?;
    let out_struct = interp.zero_struct(&table.entry.out_struct)?;
    let entry = table.functions[&table.entry.name].clone();
    interp.locals = vec![BTreeMap::new()];
    interp
        .locals
        .last_mut()
        .unwrap()
        .insert(table.entry.in_param.clone(), in_struct);
    interp
        .locals
        .last_mut()
        .unwrap()
        .insert(table.entry.out_param.clone(), out_struct);
    interp.call_stack.push(entry.name.clone());
    interp.exec_block(&entry.body)?;

    let out_val = interp.locals[0][&table.entry.out_param].clone();
    let mut outputs = Vec::new();
    interp.read_struct_ints(&table.entry.out_struct, &out_val, &mut outputs)?;
    debug_assert_eq!(outputs.len(), table.entry.outputs.len());
    Ok(outputs)
}

#[derive(Debug, Clone)]
enum RVal {
    Int { raw: u64, signed: bool },
    Struct(BTreeMap<String, RVal>),
    Array(Vec<RVal>),
}

enum Flow {
    Normal,
    Return(Option<RVal>),
}

enum Seg {
    Field(String),
    Idx(usize),
}

struct Interp<'a> {
    table: &'a SymbolTable,
    n: u32,
    globals: BTreeMap<String, RVal>,
    locals: Vec<BTreeMap<String, RVal>>,
    call_stack: Vec<String>,
    steps: u64,
}

impl<'a> Interp<'a> {
    fn unsupported(&self, msg: impl Into<String>, line: u32) -> FrontendError {
        FrontendError::UnsupportedConstruct { msg: msg.into(), line }
    }

    fn init_globals(&mut self) -> Result<(), FrontendError> {
        for g in &self.table.globals.clone() {
            let val = match (&g.ty.base, g.array, &g.init) {
                (BaseType::Int { signed }, None, Some(init)) => {
                    let (raw, _) = self.eval_int(init)?;
                    RVal::Int { raw, signed: *signed }
                }
                (BaseType::Int { signed }, None, None) => RVal::Int { raw: 0, signed: *signed },
                (BaseType::Int { signed }, Some(len), None) => RVal::Array(vec![
                        RVal::Int { raw: 0, signed: *signed };
                        len
                    ]),
                (BaseType::Struct(name), None, None) => self.zero_struct(name)?,
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

    fn zero_struct(&self, name: &str) -> Result<RVal, FrontendError> {
        let def = self.struct_def(name, 0)?;
        let mut fields = BTreeMap::new();
        for f in &def.fields {
            let v = match (&f.ty.base, f.array) {
                (BaseType::Int { signed }, None) => RVal::Int { raw: 0, signed: *signed },
                (BaseType::Int { signed }, Some(len)) => RVal::Array(vec![
                        RVal::Int { raw: 0, signed: *signed };
                        len
                    ]),
                (BaseType::Struct(inner), None) => self.zero_struct(inner)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            };
            fields.insert(f.name.clone(), v);
        }
        Ok(RVal::Struct(fields))
    }

    fn build_input_struct(
        &self,
        name: &str,
        vals: &mut impl Iterator<Item = u64>,
    ) -> Result<RVal, FrontendError> {
        let def = self.struct_def(name, 0)?;
        let mut fields = BTreeMap::new();
        for f in &def.fields {
            let v = match (&f.ty.base, f.array) {
                (BaseType::Int { signed }, None) => {
                    RVal::Int { raw: vals.next().unwrap(), signed: *signed }
                }
                (BaseType::Int { signed }, Some(len)) => RVal::Array(
                    (0..len)
                        .map(|_| RVal::Int { raw: vals.next().unwrap(), signed: *signed })
                        .collect(),
                ),
                (BaseType::Struct(inner), None) => self.build_input_struct(inner, vals)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            };
            fields.insert(f.name.clone(), v);
        }
        Ok(RVal::Struct(fields))
    }

    /// Reads struct integers in declaration order (not map order).
    fn read_struct_ints(
        &self,
        name: &str,
        value: &RVal,
        out: &mut Vec<u64>,
    ) -> Result<(), FrontendError> {
        let RVal::Struct(fields) = value else {
            return Err(self.unsupported("expected struct value", 0));
        };
        let def = self.struct_def(name, 0)?;
        for f in &def.fields {
            match (&f.ty.base, &fields[&f.name]) {
                (BaseType::Int { .. }, RVal::Int { raw, .. }) => out.push(*raw),
                (BaseType::Int { .. }, RVal::Array(items)) => {
                    for item in items {
                        let RVal::Int { raw, .. } = item else {
                            return Err(self.unsupported("expected int element", f.line));
                        };
                        out.push(*raw);
                    }
                }
                (BaseType::Struct(inner), v) => self.read_struct_ints(inner, v, out)?,
                _ => return Err(self.unsupported("unsupported field shape", f.line)),
            }
        }
        Ok(())
    }

    // ---- statement execution ----

    fn exec_block(&mut self, b: &Block) -> Result<Flow, FrontendError> {
        self.locals.push(BTreeMap::new());
        let mut flow = Flow::Normal;
        for s in &b.stmts {
            flow = self.exec_stmt(s)?;
            if matches!(flow, Flow::Return(_)) {
                break;
            }
        }
        self.locals.pop();
        Ok(flow)
    }

    fn tick(&mut self, line: u32) -> Result<(), FrontendError> {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            Err(FrontendError::UnboundedLoop { line })
        } else {
            Ok(())
        }
    }

    fn exec_stmt(&mut self, s: &Stmt) -> Result<Flow, FrontendError> {
        match s {
            Stmt::Empty => Ok(Flow::Normal),
            Stmt::Block(b) => self.exec_block(b),
            Stmt::Decl { ty, name, array, init, line } => {
                self.tick(*line)?;
                let val = match (&ty.base, array, init) {
                    (BaseType::Int { signed }, None, Some(e)) => {
                        let (raw, _) = self.eval_int(e)?;
                        RVal::Int { raw, signed: *signed }
                    }
                    (BaseType::Int { signed }, None, None) => {
                        RVal::Int { raw: 0, signed: *signed }
                    }
                    (BaseType::Int { signed }, Some(len), None) => RVal::Array(vec![
                            RVal::Int { raw: 0, signed: *signed };
                            *len
                        ]),
                    (BaseType::Struct(sname), None, None) => self.zero_struct(sname)?,
                    (BaseType::Struct(_), None, Some(e)) => self.eval_expr(e)?,
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
                self.eval_expr(e)?;
                Ok(Flow::Normal)
            }
            Stmt::If { cond, then_blk, else_blk, line } => {
                self.tick(*line)?;
                let (c, _) = self.eval_int(cond)?;
                if c != 0 {
                    self.exec_block(then_blk)
                } else if let Some(b) = else_blk {
                    self.exec_block(b)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::While { cond, body, line } => {
                loop {
                    self.tick(*line)?;
                    let (c, _) = self.eval_int(cond)?;
                    if c == 0 {
                        break;
                    }
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::For { init, cond, step, body, line } => {
                self.locals.push(BTreeMap::new());
                let result = (|| {
                    if let Some(init) = init {
                        if let Flow::Return(v) = self.exec_stmt(init)? {
                            return Ok(Flow::Return(v));
                        }
                    }
                    loop {
                        self.tick(*line)?;
                        if let Some(cond) = cond {
                            let (c, _) = self.eval_int(cond)?;
                            if c == 0 {
                                break;
                            }
                        }
                        if let Flow::Return(v) = self.exec_block(body)? {
                            return Ok(Flow::Return(v));
                        }
                        if let Some(step) = step {
                            self.eval_expr(step)?;
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
                    Some(e) => Some(self.eval_expr(e)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
        }
    }

    // ---- expression evaluation ----

    fn eval_int(&mut self, e: &Expr) -> Result<(u64, bool), FrontendError> {
        match self.eval_expr(e)? {
            RVal::Int { raw, signed } => Ok((raw, signed)),
            _ => Err(self.unsupported("expected an integer value", e.line())),
        }
    }

    fn eval_expr(&mut self, e: &Expr) -> Result<RVal, FrontendError> {
        let n = self.n;
        match e {
            Expr::Int(v, line) => {
                if *v >> (n - 1) >> 1 != 0 {
                    return Err(self.unsupported(
                        format!("literal {v} does not fit in {n} bits"),
                        *line,
                    ));
                }
                Ok(RVal::Int { raw: *v, signed: *v < 1 << (n - 1) })
            }
            Expr::Ident(_, _) | Expr::Index(..) | Expr::Member(..) => {
                let (root, segs, line) = self.place_of(e)?;
                self.read_place(&root, &segs, line)
            }
            Expr::Unary(UnOp::Deref, inner, _) => self.eval_expr(inner),
            Expr::Unary(op, inner, _line) => {
                let a = self.eval_int(inner)?;
                let (raw, signed) = fold_unop(n, *op, a);
                Ok(RVal::Int { raw, signed })
            }
            Expr::Binary(BinOp::LAnd, a, b, _) => {
                let (av, _) = self.eval_int(a)?;
                let raw = if av == 0 {
                    0
                } else {
                    let (bv, _) = self.eval_int(b)?;
                    (bv != 0) as u64
                };
                Ok(RVal::Int { raw, signed: true })
            }
            Expr::Binary(BinOp::LOr, a, b, _) => {
                let (av, _) = self.eval_int(a)?;
                let raw = if av != 0 {
                    1
                } else {
                    let (bv, _) = self.eval_int(b)?;
                    (bv != 0) as u64
                };
                Ok(RVal::Int { raw, signed: true })
            }
            Expr::Binary(op, a, b, line) => {
                let a = self.eval_int(a)?;
                let b = self.eval_int(b)?;
                let (raw, signed) = self.apply_binop(*op, a, b, *line)?;
                Ok(RVal::Int { raw, signed })
            }
            Expr::Ternary(cond, t, f, _) => {
                let (c, _) = self.eval_int(cond)?;
                if c != 0 {
                    self.eval_expr(t)
                } else {
                    self.eval_expr(f)
                }
            }
            Expr::Assign(op, place, value, line) => {
                let (root, segs, _) = self.place_of(place)?;
                let new = if let Some(op) = op {
                    let old = match self.read_place(&root, &segs, *line)? {
                        RVal::Int { raw, signed } => (raw, signed),
                        _ => return Err(self.unsupported("compound assign to aggregate", *line)),
                    };
                    let rhs = self.eval_int(value)?;
                    let (raw, _) = self.apply_binop(*op, old, rhs, *line)?;
                    // C assigns back with the place's type, keeping its signedness.
                    RVal::Int { raw, signed: old.1 }
                } else {
                    let v = self.eval_expr(value)?;
                    self.coerce_to_place(&root, &segs, v, *line)?
                };
                self.write_place(&root, &segs, new.clone(), *line)?;
                Ok(new)
            }
            Expr::IncDec { prefix, increment, place, line } => {
                let (root, segs, _) = self.place_of(place)?;
                let (old, signed) = match self.read_place(&root, &segs, *line)? {
                    RVal::Int { raw, signed } => (raw, signed),
                    _ => return Err(self.unsupported("increment of aggregate", *line)),
                };
                let new = if *increment {
                    twos::add(n, old, 1)
                } else {
                    twos::sub(n, old, 1)
                };
                self.write_place(&root, &segs, RVal::Int { raw: new, signed }, *line)?;
                Ok(RVal::Int { raw: if *prefix { new } else { old }, signed })
            }
            Expr::Call(name, args, line) => self.eval_call(name, args, *line),
        }
    }

    fn apply_binop(
        &self,
        op: BinOp,
        a: (u64, bool),
        b: (u64, bool),
        line: u32,
    ) -> Result<(u64, bool), FrontendError> {
        fold_binop(self.n, op, a, b)
            .map_err(|msg| FrontendError::UnsupportedConstruct { msg, line })
    }

    /// Converts an assigned value to the declared type of the place: integer
    /// stores adopt the place's signedness (C conversion on assignment).
    fn coerce_to_place(
        &mut self,
        root: &str,
        segs: &[Seg],
        v: RVal,
        line: u32,
    ) -> Result<RVal, FrontendError> {
        match (self.read_place(root, segs, line)?, v) {
            (RVal::Int { signed, .. }, RVal::Int { raw, .. }) => Ok(RVal::Int { raw, signed }),
            (RVal::Struct(_), v @ RVal::Struct(_)) => Ok(v),
            (RVal::Array(_), v @ RVal::Array(_)) => Ok(v),
            _ => Err(self.unsupported("type mismatch in assignment", line)),
        }
    }

    fn eval_call(
        &mut self,
        name: &str,
        args: &[Expr],
        line: u32,
    ) -> Result<RVal, FrontendError> {
        if self.call_stack.iter().any(|f| f == name) {
            return Err(self.unsupported(format!("recursive call of \"{name}\""), line));
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
            let mut v = self.eval_expr(a)?;
            if let (BaseType::Int { signed }, RVal::Int { raw, .. }) = (&p.ty.base, &v) {
                v = RVal::Int { raw: *raw, signed: *signed };
            }
            frame.insert(p.name.clone(), v);
        }
        let saved = std::mem::replace(&mut self.locals, vec![frame]);
        self.call_stack.push(name.to_string());
        let flow = self.exec_block(&func.body);
        self.call_stack.pop();
        self.locals = saved;
        match flow? {
            Flow::Return(Some(mut v)) => {
                if let (BaseType::Int { signed }, RVal::Int { raw, .. }) = (&func.ret.base, &v) {
                    v = RVal::Int { raw: *raw, signed: *signed };
                }
                Ok(v)
            }
            // A void function used as a value would already be a type error
            // upstream; represent its "value" as 0 for expression statements.
            _ => Ok(RVal::Int { raw: 0, signed: true }),
        }
    }

    // ---- place (lvalue) handling ----

    fn place_of(&mut self, e: &Expr) -> Result<(String, Vec<Seg>, u32), FrontendError> {
        match e {
            Expr::Ident(name, line) => Ok((name.clone(), vec![], *line)),
            Expr::Index(base, idx, line) => {
                let (root, mut segs, _) = self.place_of(base)?;
                let (raw, _) = self.eval_int(idx)?;
                segs.push(Seg::Idx(raw as usize));
                Ok((root, segs, *line))
            }
            Expr::Member(base, field, _, line) => {
                let (root, mut segs, _) = self.place_of(base)?;
                segs.push(Seg::Field(field.clone()));
                Ok((root, segs, *line))
            }
            Expr::Unary(UnOp::Deref, inner, _) => self.place_of(inner),
            other => {
                Err(self.unsupported("expression is not assignable", other.line()))
            }
        }
    }

    fn read_place(&self, root: &str, segs: &[Seg], line: u32) -> Result<RVal, FrontendError> {
        let mut cur = self
            .locals
            .iter()
            .rev()
            .find_map(|s| s.get(root))
            .or_else(|| self.globals.get(root))
            .ok_or(FrontendError::UnknownIdentifier { name: root.to_string(), line })?;
        for seg in segs {
            cur = match (cur, seg) {
                (RVal::Struct(fields), Seg::Field(f)) => fields.get(f).ok_or_else(|| {
                    self.unsupported(format!("no field \"{f}\""), line)
                })?,
                (RVal::Array(items), Seg::Idx(i)) => items.get(*i).ok_or_else(|| {
                    self.unsupported(format!("index {i} out of bounds"), line)
                })?,
                _ => return Err(self.unsupported("invalid member access", line)),
            };
        }
        Ok(cur.clone())
    }

    fn write_place(
        &mut self,
        root: &str,
        segs: &[Seg],
        val: RVal,
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
                (RVal::Struct(fields), Seg::Field(f)) => fields
                    .get_mut(f)
                    .ok_or_else(|| unsupported(format!("no field \"{f}\"")))?,
                (RVal::Array(items), Seg::Idx(i)) => items
                    .get_mut(*i)
                    .ok_or_else(|| unsupported(format!("index {i} out of bounds")))?,
                _ => return Err(unsupported("invalid member access".into())),
            };
        }
        *cur = val;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{build_symbol_table, parse};

    fn run(src: &str, n: u32, inputs: &[u64]) -> Result<Vec<u64>, FrontendError> {
        let table = build_symbol_table(&parse(src).unwrap(), "contract").unwrap();
        let cfg = FlattenConfig::with_bit_width(n);
        run_reference(&table, &cfg, inputs)
    }

    const LISTING: &str = "\
struct in_T { unsigned int i1; unsigned int i2; };
struct out_T { unsigned int o; };
void contract(struct in_T *in, struct out_T *out) {
  unsigned int val = in->i1 + in->i2;
  out->o = val;
}
";

    #[test]
    fn listing_addition() {
        assert_eq!(run(LISTING, 16, &[2, 3]).unwrap(), vec![5]);
        assert_eq!(run(LISTING, 16, &[65535, 1]).unwrap(), vec![0]);
    }

    #[test]
    fn salary_threshold() {
        let src = "\
struct in_T { unsigned int s1; unsigned int s2; unsigned int s3; unsigned int s4; };
struct out_T { unsigned int ok; };
void contract(struct in_T *in, struct out_T *out) {
  unsigned int sum = in->s1 + in->s2 + in->s3 + in->s4;
  out->ok = sum > 32500 * 4;
}
";
        assert_eq!(run(src, 20, &[40000, 40000, 40000, 15000]).unwrap(), vec![1]);
        assert_eq!(run(src, 20, &[32500, 32500, 32500, 32500]).unwrap(), vec![0]);
        assert_eq!(run(src, 20, &[32500, 32500, 32500, 32501]).unwrap(), vec![1]);
    }

    #[test]
    fn loops_functions_and_arrays() {
        let src = "\
int square(int x) { return x * x; }
struct in_T { int a[3]; };
struct out_T { int sumsq; };
void contract(struct in_T *in, struct out_T *out) {
  int acc = 0;
  for (int i = 0; i < 3; i++) {
    acc += square(in->a[i]);
  }
  out->sumsq = acc;
}
";
        assert_eq!(run(src, 16, &[1, 2, 3]).unwrap(), vec![14]);
    }

    #[test]
    fn signed_semantics() {
        let src = "\
struct in_T { int a; int b; };
struct out_T { int lt; int shr; int neg; };
void contract(struct in_T *in, struct out_T *out) {
  out->lt = in->a < in->b;
  out->shr = in->a >> 1;
  out->neg = -in->b;
}
";
        // a = -4 (raw 0b11111100 at n=8), b = 1.
        let got = run(src, 8, &[0b1111_1100, 1]).unwrap();
        assert_eq!(got, vec![1, 0b1111_1110, 0b1111_1111]);
    }

    #[test]
    fn branches_and_ternary() {
        let src = "\
struct in_T { unsigned int x; };
struct out_T { unsigned int y; };
void contract(struct in_T *in, struct out_T *out) {
  if (in->x > 10) { out->y = in->x - 10; }
  else { out->y = 10 - in->x; }
  out->y = out->y == 0 ? 99 : out->y;
}
";
        assert_eq!(run(src, 16, &[25]).unwrap(), vec![15]);
        assert_eq!(run(src, 16, &[3]).unwrap(), vec![7]);
        assert_eq!(run(src, 16, &[10]).unwrap(), vec![99]);
    }

    #[test]
    fn globals_and_compound_assignment() {
        let src = "\
unsigned int counter = 5;
struct in_T { unsigned int x; };
struct out_T { unsigned int y; };
void contract(struct in_T *in, struct out_T *out) {
  counter += in->x;
  counter++;
  out->y = counter;
}
";
        assert_eq!(run(src, 16, &[4]).unwrap(), vec![10]);
    }

    #[test]
    fn short_circuit_yields_bool() {
        let src = "\
struct in_T { unsigned int a; unsigned int b; };
struct out_T { unsigned int r; };
void contract(struct in_T *in, struct out_T *out) {
  out->r = in->a && !in->b || in->a == 7;
}
";
        assert_eq!(run(src, 8, &[3, 0]).unwrap(), vec![1]);
        assert_eq!(run(src, 8, &[3, 2]).unwrap(), vec![0]);
        assert_eq!(run(src, 8, &[7, 2]).unwrap(), vec![1]);
        assert_eq!(run(src, 8, &[0, 0]).unwrap(), vec![0]);
    }

    #[test]
    fn recursion_is_rejected() {
        let src = "\
int f(int x) { return f(x); }
struct in_T { int a; };
struct out_T { int b; };
void contract(struct in_T *in, struct out_T *out) { out->b = f(in->a); }
";
        assert!(matches!(
            run(src, 8, &[1]),
            Err(FrontendError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn runaway_loop_hits_budget() {
        let src = "\
struct in_T { unsigned int a; };
struct out_T { unsigned int b; };
void contract(struct in_T *in, struct out_T *out) {
  unsigned int x = 1;
  while (x) { x = x | 1; }
  out->b = x;
}
";
        assert!(matches!(run(src, 8, &[1]), Err(FrontendError::UnboundedLoop { .. })));
    }
}
