//! Recursive-descent parser producing the [`Program`] AST.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::FrontendError;

pub fn parse(src: &str) -> Result<Program, FrontendError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn line(&self) -> u32 {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.line)
            .unwrap_or(0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), FrontendError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn err(&self, msg: String) -> FrontendError {
        FrontendError::ParseError { msg, line: self.line() }
    }

    fn ident(&mut self, what: &str) -> Result<String, FrontendError> {
        let line = self.line();
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(FrontendError::ParseError {
                msg: format!("expected {what}, found {other:?}"),
                line,
            }),
        }
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        let mut prog = Program::default();
        while self.peek().is_some() {
            let line = self.line();
            let is_const = self.eat(&Tok::KwConst);
            // `struct X { ... };` is a definition; `struct X ident` starts a
            // global or function of struct type.
            if self.peek() == Some(&Tok::KwStruct) && !is_const {
                if let Some(Tok::Ident(_)) = self.peek2() {
                    if self.toks.get(self.pos + 2).map(|t| &t.tok) == Some(&Tok::LBrace) {
                        prog.structs.push(self.struct_def()?);
                        continue;
                    }
                }
            }
            let ty = self.type_spec()?;
            let pointer = self.eat(&Tok::Star);
            let name = self.ident("declarator name")?;
            let ty = Type { pointer, ..ty };
            if self.peek() == Some(&Tok::LParen) {
                if is_const {
                    return Err(self.err("const functions are not supported".into()));
                }
                prog.functions.push(self.function(ty, name, line)?);
            } else {
                let array = self.opt_array_suffix()?;
                let init = if self.eat(&Tok::Assign) {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi, "';' after global declaration")?;
                prog.globals.push(GlobalDef { name, ty, array, init, is_const, line });
            }
        }
        Ok(prog)
    }

    fn struct_def(&mut self) -> Result<StructDef, FrontendError> {
        let line = self.line();
        self.expect(Tok::KwStruct, "'struct'")?;
        let name = self.ident("struct name")?;
        self.expect(Tok::LBrace, "'{'")?;
        let mut fields = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let fline = self.line();
            let ty = self.type_spec()?;
            loop {
                let fname = self.ident("field name")?;
                let array = self.opt_array_suffix()?;
                fields.push(FieldDef { name: fname, ty: ty.clone(), array, line: fline });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi, "';' after struct field")?;
        }
        self.expect(Tok::Semi, "';' after struct definition")?;
        Ok(StructDef { name, fields, line })
    }

    fn type_spec(&mut self) -> Result<Type, FrontendError> {
        match self.bump() {
            Some(Tok::KwVoid) => Ok(Type { base: BaseType::Void, pointer: false }),
            Some(Tok::KwStruct) => {
                let name = self.ident("struct name")?;
                Ok(Type { base: BaseType::Struct(name), pointer: false })
            }
            Some(Tok::KwInt) => Ok(Type::int(true)),
            Some(Tok::KwUnsigned) => {
                self.eat(&Tok::KwInt);
                Ok(Type::int(false))
            }
            Some(Tok::KwSigned) => {
                self.eat(&Tok::KwInt);
                Ok(Type::int(true))
            }
            other => Err(self.err(format!("expected type, found {other:?}"))),
        }
    }

    fn opt_array_suffix(&mut self) -> Result<Option<usize>, FrontendError> {
        if !self.eat(&Tok::LBracket) {
            return Ok(None);
        }
        let line = self.line();
        let size_expr = self.expr()?;
        self.expect(Tok::RBracket, "']'")?;
        let size = fold_literal(&size_expr).ok_or(FrontendError::UnsupportedConstruct {
            msg: "array size must be a literal constant expression".into(),
            line,
        })?;
        if size == 0 || size > 1 << 16 {
            return Err(FrontendError::UnsupportedConstruct {
                msg: format!("unreasonable array size {size}"),
                line,
            });
        }
        Ok(Some(size as usize))
    }

    fn function(&mut self, ret: Type, name: String, line: u32) -> Result<FuncDef, FrontendError> {
        self.expect(Tok::LParen, "'('")?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            if self.peek() == Some(&Tok::KwVoid) && self.peek2() == Some(&Tok::RParen) {
                self.bump();
            } else {
                loop {
                    let pline = self.line();
                    let ty = self.type_spec()?;
                    let pointer = self.eat(&Tok::Star);
                    let pname = self.ident("parameter name")?;
                    params.push(Param { name: pname, ty: Type { pointer, ..ty }, line: pline });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
        }
        let body = self.block()?;
        Ok(FuncDef { name, ret, params, body, line })
    }

    fn block(&mut self) -> Result<Block, FrontendError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek().is_none() {
                return Err(self.err("unexpected end of input in block".into()));
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts })
    }

    fn is_decl_start(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::KwInt | Tok::KwUnsigned | Tok::KwSigned | Tok::KwStruct | Tok::KwConst)
        )
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let line = self.line();
        match self.peek() {
            Some(Tok::Semi) => {
                self.bump();
                Ok(Stmt::Empty)
            }
            Some(Tok::LBrace) => Ok(Stmt::Block(self.block()?)),
            Some(Tok::KwIf) => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let then_blk = self.block_or_single()?;
                let else_blk = if self.eat(&Tok::KwElse) {
                    Some(self.block_or_single()?)
                } else {
                    None
                };
                Ok(Stmt::If { cond, then_blk, else_blk, line })
            }
            Some(Tok::KwWhile) => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.block_or_single()?;
                Ok(Stmt::While { cond, body, line })
            }
            Some(Tok::KwFor) => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let init = if self.peek() == Some(&Tok::Semi) {
                    self.bump();
                    None
                } else if self.is_decl_start() {
                    Some(Box::new(self.decl_stmt()?))
                } else {
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "';' in for header")?;
                    Some(Box::new(Stmt::Expr(e, line)))
                };
                let cond = if self.peek() == Some(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';' in for header")?;
                let step = if self.peek() == Some(&Tok::RParen) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::RParen, "')'")?;
                let body = self.block_or_single()?;
                Ok(Stmt::For { init, cond, step, body, line })
            }
            Some(Tok::KwReturn) => {
                self.bump();
                let value = if self.peek() == Some(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';' after return")?;
                Ok(Stmt::Return(value, line))
            }
            _ if self.is_decl_start() => self.decl_stmt(),
            _ => {
                let e = self.expr()?;
                self.expect(Tok::Semi, "';' after expression")?;
                Ok(Stmt::Expr(e, line))
            }
        }
    }

    /// Wraps a single statement as a block so `if (c) x = 1;` parses.
    fn block_or_single(&mut self) -> Result<Block, FrontendError> {
        if self.peek() == Some(&Tok::LBrace) {
            self.block()
        } else {
            Ok(Block { stmts: vec![self.stmt()?] })
        }
    }

    /// Local declaration; multiple declarators expand to a statement block.
    fn decl_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let line = self.line();
        // Local `const` is accepted and treated as an ordinary initialized
        // variable (constness enforced by folding, not by checks).
        let _is_const = self.eat(&Tok::KwConst);
        let ty = self.type_spec()?;
        if self.peek() == Some(&Tok::Star) {
            return Err(FrontendError::UnsupportedConstruct {
                msg: "pointer locals are not supported".into(),
                line,
            });
        }
        let mut decls = Vec::new();
        loop {
            let name = self.ident("variable name")?;
            let array = self.opt_array_suffix()?;
            let init = if self.eat(&Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            decls.push(Stmt::Decl { ty: ty.clone(), name, array, init, line });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi, "';' after declaration")?;
        if decls.len() == 1 {
            Ok(decls.pop().unwrap())
        } else {
            Ok(Stmt::Block(Block { stmts: decls }))
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.assign()
    }

    fn assign(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.ternary()?;
        let line = self.line();
        let op = match self.peek() {
            Some(Tok::Assign) => None,
            Some(Tok::PlusEq) => Some(BinOp::Add),
            Some(Tok::MinusEq) => Some(BinOp::Sub),
            Some(Tok::StarEq) => Some(BinOp::Mul),
            Some(Tok::SlashEq) => Some(BinOp::Div),
            Some(Tok::PercentEq) => Some(BinOp::Mod),
            Some(Tok::AmpEq) => Some(BinOp::And),
            Some(Tok::PipeEq) => Some(BinOp::Or),
            Some(Tok::CaretEq) => Some(BinOp::Xor),
            Some(Tok::ShlEq) => Some(BinOp::Shl),
            Some(Tok::ShrEq) => Some(BinOp::Shr),
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.assign()?;
        Ok(Expr::Assign(op, Box::new(lhs), Box::new(rhs), line))
    }

    fn ternary(&mut self) -> Result<Expr, FrontendError> {
        let cond = self.binary(0)?;
        if self.eat(&Tok::Question) {
            let line = cond.line();
            let then = self.expr()?;
            self.expect(Tok::Colon, "':' in conditional expression")?;
            let other = self.ternary()?;
            Ok(Expr::Ternary(Box::new(cond), Box::new(then), Box::new(other), line))
        } else {
            Ok(cond)
        }
    }

    /// Precedence-climbing binary expression parser.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        loop {
            let (op, prec) = match self.peek() {
                Some(Tok::OrOr) => (BinOp::LOr, 1),
                Some(Tok::AndAnd) => (BinOp::LAnd, 2),
                Some(Tok::Pipe) => (BinOp::Or, 3),
                Some(Tok::Caret) => (BinOp::Xor, 4),
                Some(Tok::Amp) => (BinOp::And, 5),
                Some(Tok::EqEq) => (BinOp::Eq, 6),
                Some(Tok::Ne) => (BinOp::Ne, 6),
                Some(Tok::Lt) => (BinOp::Lt, 7),
                Some(Tok::Gt) => (BinOp::Gt, 7),
                Some(Tok::Le) => (BinOp::Le, 7),
                Some(Tok::Ge) => (BinOp::Ge, 7),
                Some(Tok::Shl) => (BinOp::Shl, 8),
                Some(Tok::Shr) => (BinOp::Shr, 8),
                Some(Tok::Plus) => (BinOp::Add, 9),
                Some(Tok::Minus) => (BinOp::Sub, 9),
                Some(Tok::Star) => (BinOp::Mul, 10),
                Some(Tok::Slash) => (BinOp::Div, 10),
                Some(Tok::Percent) => (BinOp::Mod, 10),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            let line = self.line();
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), line);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let line = self.line();
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?), line))
            }
            Some(Tok::Tilde) => {
                self.bump();
                Ok(Expr::Unary(UnOp::BitNot, Box::new(self.unary()?), line))
            }
            Some(Tok::Bang) => {
                self.bump();
                Ok(Expr::Unary(UnOp::LogNot, Box::new(self.unary()?), line))
            }
            Some(Tok::Star) => {
                self.bump();
                Ok(Expr::Unary(UnOp::Deref, Box::new(self.unary()?), line))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            Some(Tok::PlusPlus) | Some(Tok::MinusMinus) => {
                let increment = self.peek() == Some(&Tok::PlusPlus);
                self.bump();
                let place = self.unary()?;
                Ok(Expr::IncDec { prefix: true, increment, place: Box::new(place), line })
            }
            Some(Tok::Amp) => Err(FrontendError::UnsupportedConstruct {
                msg: "address-of is not supported".into(),
                line,
            }),
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        loop {
            let line = self.line();
            match self.peek() {
                Some(Tok::LBracket) => {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket, "']'")?;
                    e = Expr::Index(Box::new(e), Box::new(idx), line);
                }
                Some(Tok::Dot) => {
                    self.bump();
                    let field = self.ident("field name")?;
                    e = Expr::Member(Box::new(e), field, false, line);
                }
                Some(Tok::Arrow) => {
                    self.bump();
                    let field = self.ident("field name")?;
                    e = Expr::Member(Box::new(e), field, true, line);
                }
                Some(Tok::LParen) => {
                    let name = match &e {
                        Expr::Ident(s, _) => s.clone(),
                        _ => return Err(self.err("only named functions can be called".into())),
                    };
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RParen, "')'")?;
                    }
                    e = Expr::Call(name, args, line);
                }
                Some(Tok::PlusPlus) | Some(Tok::MinusMinus) => {
                    let increment = self.peek() == Some(&Tok::PlusPlus);
                    self.bump();
                    e = Expr::IncDec { prefix: false, increment, place: Box::new(e), line };
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let line = self.line();
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v, line)),
            Some(Tok::Ident(s)) => Ok(Expr::Ident(s, line)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            other => Err(FrontendError::ParseError {
                msg: format!("expected expression, found {other:?}"),
                line,
            }),
        }
    }
}

/// Folds an expression consisting only of integer literals and arithmetic.
/// Used for array sizes, which must be known before flattening.
fn fold_literal(e: &Expr) -> Option<u64> {
    match e {
        Expr::Int(v, _) => Some(*v),
        Expr::Unary(UnOp::Neg, _, _) => None,
        Expr::Binary(op, a, b, _) => {
            let (a, b) = (fold_literal(a)?, fold_literal(b)?);
            match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div => a.checked_div(b),
                BinOp::Shl => a.checked_shl(b as u32),
                _ => None,
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "\
struct in_T { unsigned int i1; unsigned int i2; };
struct out_T { unsigned int o; };
void contract(struct in_T *in, struct out_T *out) {
  unsigned int val = in->i1 + in->i2;
  out->o = val;
}
";

    #[test]
    fn parses_listing_shape() {
        let prog = parse(LISTING).unwrap();
        assert_eq!(prog.structs.len(), 2);
        assert_eq!(prog.structs[0].fields.len(), 2);
        assert_eq!(prog.functions.len(), 1);
        let f = &prog.functions[0];
        assert_eq!(f.name, "contract");
        assert_eq!(f.params.len(), 2);
        assert!(f.params[0].ty.pointer);
        assert_eq!(f.body.stmts.len(), 2);
    }

    #[test]
    fn precedence_is_c_like() {
        let prog = parse("int f() { return 1 + 2 * 3 < 4 & 5; }").unwrap();
        let Stmt::Return(Some(e), _) = &prog.functions[0].body.stmts[0] else {
            panic!("expected return");
        };
        // ((1 + (2*3)) < 4) & 5
        let Expr::Binary(BinOp::And, lhs, _, _) = e else {
            panic!("expected & at top, got {e:?}");
        };
        assert!(matches!(**lhs, Expr::Binary(BinOp::Lt, _, _, _)));
    }

    #[test]
    fn parses_control_flow_and_arrays() {
        let src = "\
int g[3];
int sum(int n) {
  int acc = 0;
  for (int i = 0; i < n; i++) { acc += g[i]; }
  while (acc > 100) acc -= 100;
  return acc ? acc : -acc;
}
";
        let prog = parse(src).unwrap();
        assert_eq!(prog.globals[0].array, Some(3));
        assert_eq!(prog.functions[0].body.stmts.len(), 4);
    }

    #[test]
    fn rejects_address_of() {
        assert!(matches!(
            parse("void f() { int x; g(&x); }"),
            Err(FrontendError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn rejects_syntax_errors_with_line() {
        let err = parse("void f() {\n int x = ; \n}").unwrap_err();
        match err {
            FrontendError::ParseError { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn struct_vs_struct_variable() {
        let src = "struct s { int a; }; struct s g; void f() { g.a = 1; }";
        let prog = parse(src).unwrap();
        assert_eq!(prog.structs.len(), 1);
        assert_eq!(prog.globals.len(), 1);
        assert!(matches!(prog.globals[0].ty.base, BaseType::Struct(_)));
    }
}
