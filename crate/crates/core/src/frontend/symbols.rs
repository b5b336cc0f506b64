//! Symbol table: structs, globals, functions, and the entry-point contract.

use std::collections::BTreeMap;

use super::ast::*;
use super::FrontendError;

/// One scalar input or output slot of the contract, in declaration order.
/// Aggregate fields are flattened: `int v[2]` yields `v[0]`, `v[1]`, and a
/// nested struct field `s` with member `a` yields `s.a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoSlot {
    pub name: String,
    pub signed: bool,
}

#[derive(Debug, Clone)]
pub struct EntryInfo {
    pub name: String,
    /// Parameter names for the input and output pointers.
    pub in_param: String,
    pub out_param: String,
    /// Struct type names behind the two pointers.
    pub in_struct: String,
    pub out_struct: String,
    pub inputs: Vec<IoSlot>,
    pub outputs: Vec<IoSlot>,
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    pub structs: BTreeMap<String, StructDef>,
    pub functions: BTreeMap<String, FuncDef>,
    pub globals: Vec<GlobalDef>,
    pub entry: EntryInfo,
}

pub fn build_symbol_table(prog: &Program, entry: &str) -> Result<SymbolTable, FrontendError> {
    let mut structs = BTreeMap::new();
    for s in &prog.structs {
        let mut seen = std::collections::BTreeSet::new();
        for f in &s.fields {
            if !seen.insert(f.name.clone()) {
                return Err(FrontendError::DuplicateSymbol(format!("{}.{}", s.name, f.name)));
            }
        }
        if structs.insert(s.name.clone(), s.clone()).is_some() {
            return Err(FrontendError::DuplicateSymbol(format!("struct {}", s.name)));
        }
    }

    let mut functions = BTreeMap::new();
    for f in &prog.functions {
        let mut seen = std::collections::BTreeSet::new();
        for p in &f.params {
            if !seen.insert(p.name.clone()) {
                return Err(FrontendError::DuplicateSymbol(format!("{}({})", f.name, p.name)));
            }
        }
        if functions.insert(f.name.clone(), f.clone()).is_some() {
            return Err(FrontendError::DuplicateSymbol(format!("function {}", f.name)));
        }
    }

    let mut global_names = std::collections::BTreeSet::new();
    for g in &prog.globals {
        if !global_names.insert(g.name.clone()) || functions.contains_key(&g.name) {
            return Err(FrontendError::DuplicateSymbol(g.name.clone()));
        }
    }

    let func = functions
        .get(entry)
        .ok_or_else(|| FrontendError::MissingEntryPoint(entry.to_string()))?;
    let entry_info = check_entry(func, &structs)?;

    Ok(SymbolTable {
        structs,
        functions,
        globals: prog.globals.clone(),
        entry: entry_info,
    })
}

fn check_entry(
    func: &FuncDef,
    structs: &BTreeMap<String, StructDef>,
) -> Result<EntryInfo, FrontendError> {
    let mismatch = |msg: &str| {
        FrontendError::EntrySignatureMismatch(format!("{}: {msg}", func.name))
    };
    if func.ret.base != BaseType::Void || func.ret.pointer {
        return Err(mismatch("return type must be void"));
    }
    if func.params.len() != 2 {
        return Err(mismatch("expected exactly two parameters (input and output)"));
    }
    let struct_name = |p: &Param| -> Result<String, FrontendError> {
        match (&p.ty.base, p.ty.pointer) {
            (BaseType::Struct(name), true) => Ok(name.clone()),
            _ => Err(mismatch(&format!("parameter '{}' must be a struct pointer", p.name))),
        }
    };
    let in_struct = struct_name(&func.params[0])?;
    let out_struct = struct_name(&func.params[1])?;
    let inputs = flatten_struct(&in_struct, structs, "")?;
    let outputs = flatten_struct(&out_struct, structs, "")?;
    if inputs.is_empty() {
        return Err(mismatch("input struct has no integer fields"));
    }
    if outputs.is_empty() {
        return Err(mismatch("output struct has no integer fields"));
    }
    Ok(EntryInfo {
        name: func.name.clone(),
        in_param: func.params[0].name.clone(),
        out_param: func.params[1].name.clone(),
        in_struct,
        out_struct,
        inputs,
        outputs,
    })
}

/// Flattens a struct's fields into scalar slots, depth first, in declaration
/// order. `prefix` accumulates the access path for nested structs.
fn flatten_struct(
    name: &str,
    structs: &BTreeMap<String, StructDef>,
    prefix: &str,
) -> Result<Vec<IoSlot>, FrontendError> {
    let def = structs.get(name).ok_or_else(|| {
        FrontendError::EntrySignatureMismatch(format!("struct {name} is not defined"))
    })?;
    let mut slots = Vec::new();
    for f in &def.fields {
        if f.ty.pointer {
            return Err(FrontendError::UnsupportedConstruct {
                msg: format!("pointer field '{}' in io struct {name}", f.name),
                line: f.line,
            });
        }
        let path = format!("{prefix}{}", f.name);
        match (&f.ty.base, f.array) {
            (BaseType::Int { signed }, None) => slots.push(IoSlot { name: path, signed: *signed }),
            (BaseType::Int { signed }, Some(len)) => {
                for i in 0..len {
                    slots.push(IoSlot { name: format!("{path}[{i}]"), signed: *signed });
                }
            }
            (BaseType::Struct(inner), None) => {
                slots.extend(flatten_struct(inner, structs, &format!("{path}."))?);
            }
            (BaseType::Struct(_), Some(_)) => {
                return Err(FrontendError::UnsupportedConstruct {
                    msg: format!("array of structs '{}' in io struct {name}", f.name),
                    line: f.line,
                });
            }
            (BaseType::Void, _) => {
                return Err(FrontendError::UnsupportedConstruct {
                    msg: format!("void field '{}'", f.name),
                    line: f.line,
                });
            }
        }
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn table(src: &str) -> Result<SymbolTable, FrontendError> {
        build_symbol_table(&parse(src).unwrap(), "contract")
    }

    const OK_SRC: &str = "\
struct in_T { unsigned int i1; int i2; int v[2]; };
struct out_T { unsigned int o; };
void contract(struct in_T *in, struct out_T *out) { out->o = in->i1; }
";

    #[test]
    fn flattens_io_slots_in_order() {
        let t = table(OK_SRC).unwrap();
        let names: Vec<&str> = t.entry.inputs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["i1", "i2", "v[0]", "v[1]"]);
        assert_eq!(
            t.entry.inputs.iter().map(|s| s.signed).collect::<Vec<_>>(),
            [false, true, true, true]
        );
        assert_eq!(t.entry.outputs.len(), 1);
        assert_eq!(t.entry.in_param, "in");
        assert_eq!(t.entry.out_param, "out");
    }

    #[test]
    fn nested_struct_slots_use_dotted_paths() {
        let t = table(
            "struct p { int x; int y; };
             struct in_T { struct p a; int b; };
             struct out_T { int o; };
             void contract(struct in_T *in, struct out_T *out) { out->o = in->b; }",
        )
        .unwrap();
        let names: Vec<&str> = t.entry.inputs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["a.x", "a.y", "b"]);
    }

    #[test]
    fn missing_entry_point() {
        let err = table("struct a { int x; }; void other(struct a *i, struct a *o) {}");
        assert!(matches!(err, Err(FrontendError::MissingEntryPoint(_))));
    }

    #[test]
    fn entry_signature_is_checked() {
        for src in [
            "struct a { int x; }; int contract(struct a *i, struct a *o) { return 0; }",
            "struct a { int x; }; void contract(struct a *i) {}",
            "struct a { int x; }; void contract(int i, struct a *o) {}",
            "struct a { int x; }; void contract(struct a *i, struct b *o) {}",
        ] {
            assert!(
                matches!(table(src), Err(FrontendError::EntrySignatureMismatch(_))),
                "accepted: {src}"
            );
        }
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(matches!(
            table("struct a { int x; int x; }; void contract(struct a *i, struct a *o) {}"),
            Err(FrontendError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            table(&format!("{OK_SRC} int f() {{ return 1; }} int f() {{ return 2; }}")),
            Err(FrontendError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            table(&format!("{OK_SRC} int g; int g;")),
            Err(FrontendError::DuplicateSymbol(_))
        ));
    }
}
