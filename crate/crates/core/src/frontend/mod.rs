//! C-subset frontend: preprocessing, symbol collection, and flattening into
//! a straight-line program of primitive expressions.
//!
//! The accepted language is a small C dialect: `struct` declarations,
//! functions, `signed`/`unsigned int` scalars and fixed-size arrays,
//! arithmetic/bitwise/comparison operators, `if`/`else`, statically bounded
//! `for`/`while` loops, and `#include`/`#define`/`#ifdef` preprocessing.
//! The entry point must look like `void entry(struct in_T *in, struct
//! out_T *out)`; every field of the input struct becomes an input wire and
//! every field of the output struct an output wire.
//!
//! Flattening is a partial evaluator: anything not depending on input wires
//! is folded at compile time, loops are unrolled, calls are inlined, and
//! data-dependent `if`/`else` bodies turn into per-variable multiplexers.

mod ast;
mod flatten;
pub mod flat;
pub mod interp;
mod lexer;
mod parser;
mod preprocess;
mod symbols;

pub use ast::{BaseType, Type};
pub use flat::{FlatExpr, FlatOp, FlatProgram, FlatVar};
pub use flatten::flatten;
pub use parser::parse;
pub use preprocess::{preprocess, CompilationUnit, MergedSource};
pub use symbols::{build_symbol_table, EntryInfo, IoSlot, SymbolTable};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("line {line}: cannot resolve include \"{path}\"")]
    UnresolvedInclude { path: String, line: u32 },
    #[error("line {line}: circular include of \"{path}\"")]
    CircularInclude { path: String, line: u32 },
    #[error("line {line}: unbalanced conditional directive")]
    UnbalancedConditional { line: u32 },
    #[error("macro expansion exceeded depth 64 while expanding \"{0}\"")]
    RecursiveMacro(String),
    #[error("line {line}: unknown preprocessor directive #{name}")]
    UnknownDirective { name: String, line: u32 },
    #[error("line {line}: parse error: {msg}")]
    ParseError { msg: String, line: u32 },
    #[error("duplicate symbol \"{0}\"")]
    DuplicateSymbol(String),
    #[error("entry point \"{0}\" not found")]
    MissingEntryPoint(String),
    #[error("entry point has wrong signature: {0}")]
    EntrySignatureMismatch(String),
    #[error("line {line}: unknown identifier \"{name}\"")]
    UnknownIdentifier { name: String, line: u32 },
    #[error("line {line}: array index is not a compile-time constant")]
    DynamicIndex { line: u32 },
    #[error("line {line}: loop bound not statically evaluable or exceeds max_unroll")]
    UnboundedLoop { line: u32 },
    #[error("line {line}: unsupported construct: {msg}")]
    UnsupportedConstruct { msg: String, line: u32 },
    #[error("flat program error: {0}")]
    FlatProgram(String),
    #[error("program expects {expected} input values, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("input value {value} does not fit in {bits} bits")]
    InputRange { value: u64, bits: u32 },
}

/// Options controlling flattening.
#[derive(Debug, Clone)]
pub struct FlattenConfig {
    /// Machine word width of the contract in bits (1..=32).
    pub bit_width: u32,
    /// Upper bound on total unrolled iterations per loop.
    pub max_unroll: u32,
    /// Name of the entry function.
    pub entry: String,
}

impl Default for FlattenConfig {
    fn default() -> Self {
        Self { bit_width: 32, max_unroll: 1024, entry: "contract".into() }
    }
}

impl FlattenConfig {
    pub fn with_bit_width(bit_width: u32) -> Self {
        Self { bit_width, ..Self::default() }
    }
}

/// Convenience wrapper: preprocess, parse, build symbols, and flatten.
pub fn compile_source(
    unit: &CompilationUnit,
    defines: &std::collections::BTreeMap<String, String>,
    cfg: &FlattenConfig,
) -> Result<FlatProgram, FrontendError> {
    let merged = preprocess(unit, defines)?;
    let prog = parse(merged.text())?;
    let table = build_symbol_table(&prog, &cfg.entry)?;
    flatten(&table, cfg)
}

/// Single-file convenience used by tests and the CLI.
pub fn compile_str(source: &str, cfg: &FlattenConfig) -> Result<FlatProgram, FrontendError> {
    let unit = CompilationUnit::single("contract.c", source);
    compile_source(&unit, &Default::default(), cfg)
}
