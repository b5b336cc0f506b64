//! Abstract syntax for the C subset.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    Int { signed: bool },
    Struct(String),
    Void,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type {
    pub base: BaseType,
    /// One level of indirection (entry-parameter convention only).
    pub pointer: bool,
}

impl Type {
    pub fn int(signed: bool) -> Self {
        Self { base: BaseType::Int { signed }, pointer: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructDef {
    pub name: String,
    pub fields: Vec<FieldDef>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: Type,
    /// Fixed element count for array fields.
    pub array: Option<usize>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDef {
    pub name: String,
    pub ty: Type,
    pub array: Option<usize>,
    pub init: Option<Expr>,
    pub is_const: bool,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub ret: Type,
    pub params: Vec<Param>,
    pub body: Block,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Decl {
        ty: Type,
        name: String,
        array: Option<usize>,
        init: Option<Expr>,
        line: u32,
    },
    Expr(Expr, u32),
    If {
        cond: Expr,
        then_blk: Block,
        else_blk: Option<Block>,
        line: u32,
    },
    While {
        cond: Expr,
        body: Block,
        line: u32,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Block,
        line: u32,
    },
    Return(Option<Expr>, u32),
    Block(Block),
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    LAnd,
    LOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    BitNot,
    LogNot,
    Deref,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(u64, u32),
    Ident(String, u32),
    Unary(UnOp, Box<Expr>, u32),
    Binary(BinOp, Box<Expr>, Box<Expr>, u32),
    /// `place op= value`; `op == None` is plain assignment.
    Assign(Option<BinOp>, Box<Expr>, Box<Expr>, u32),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>, u32),
    Call(String, Vec<Expr>, u32),
    Index(Box<Expr>, Box<Expr>, u32),
    /// `base.field` or `base->field`.
    Member(Box<Expr>, String, bool, u32),
    IncDec {
        prefix: bool,
        increment: bool,
        place: Box<Expr>,
        line: u32,
    },
}

impl Expr {
    pub fn line(&self) -> u32 {
        match self {
            Expr::Int(_, l)
            | Expr::Ident(_, l)
            | Expr::Unary(_, _, l)
            | Expr::Binary(_, _, _, l)
            | Expr::Assign(_, _, _, l)
            | Expr::Ternary(_, _, _, l)
            | Expr::Call(_, _, l)
            | Expr::Index(_, _, l)
            | Expr::Member(_, _, _, l)
            | Expr::IncDec { line: l, .. } => *l,
        }
    }

    /// True if evaluating the expression could mutate program state. Used to
    /// reject side effects inside non-collapsed `&&`/`||`/`?:` operands,
    /// which would otherwise lose C's lazy-evaluation semantics.
    pub fn has_side_effect(&self) -> bool {
        match self {
            Expr::Int(..) | Expr::Ident(..) => false,
            Expr::Unary(_, e, _) => e.has_side_effect(),
            Expr::Binary(_, a, b, _) => a.has_side_effect() || b.has_side_effect(),
            Expr::Assign(..) | Expr::IncDec { .. } => true,
            Expr::Ternary(c, a, b, _) => {
                c.has_side_effect() || a.has_side_effect() || b.has_side_effect()
            }
            // Calls are conservatively treated as side-effecting: the callee
            // may write globals.
            Expr::Call(..) => true,
            Expr::Index(a, i, _) => a.has_side_effect() || i.has_side_effect(),
            Expr::Member(b, _, _, _) => b.has_side_effect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub structs: Vec<StructDef>,
    pub globals: Vec<GlobalDef>,
    pub functions: Vec<FuncDef>,
}
