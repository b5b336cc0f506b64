//! Minimal C preprocessor: `#include`, object-like `#define`/`#undef`, and
//! `#ifdef`/`#ifndef`/`#else`/`#endif` conditionals.
//!
//! Output is the merged, directive-free text. Lines excluded by inactive
//! conditional branches are dropped; a line map records the originating file
//! and line of every emitted line for diagnostics.

use std::collections::BTreeMap;

use super::FrontendError;

/// A set of source files plus the name of the root file.
#[derive(Debug, Clone)]
pub struct CompilationUnit {
    pub root: String,
    pub files: BTreeMap<String, String>,
}

impl CompilationUnit {
    pub fn single(name: &str, text: &str) -> Self {
        let mut files = BTreeMap::new();
        files.insert(name.to_string(), text.to_string());
        Self { root: name.to_string(), files }
    }
}

/// Merged preprocessor output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedSource {
    text: String,
    /// `(file, 1-based line)` origin of each emitted line.
    line_map: Vec<(String, u32)>,
}

impl MergedSource {
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Origin of a 1-based line in the merged text.
    pub fn origin(&self, merged_line: u32) -> Option<(&str, u32)> {
        self.line_map
            .get((merged_line as usize).checked_sub(1)?)
            .map(|(f, l)| (f.as_str(), *l))
    }
}

const MAX_EXPANSION_DEPTH: usize = 64;
const MAX_INCLUDE_DEPTH: usize = 64;

struct Preprocessor<'a> {
    unit: &'a CompilationUnit,
    macros: BTreeMap<String, String>,
    out_lines: Vec<String>,
    line_map: Vec<(String, u32)>,
    include_stack: Vec<String>,
}

pub fn preprocess(
    unit: &CompilationUnit,
    defines: &BTreeMap<String, String>,
) -> Result<MergedSource, FrontendError> {
    let mut pp = Preprocessor {
        unit,
        macros: defines.clone(),
        out_lines: Vec::new(),
        line_map: Vec::new(),
        include_stack: Vec::new(),
    };
    let root = unit.root.clone();
    let text = unit
        .files
        .get(&root)
        .ok_or(FrontendError::UnresolvedInclude { path: root.clone(), line: 0 })?;
    pp.run_file(&root, text)?;
    let mut text = pp.out_lines.join("\n");
    // Preserve a trailing newline so directive-free files round-trip exactly.
    if !pp.out_lines.is_empty() {
        text.push('\n');
    }
    Ok(MergedSource { text, line_map: pp.line_map })
}

struct CondFrame {
    active: bool,
    parent_active: bool,
    seen_else: bool,
}

impl Preprocessor<'_> {
    fn run_file(&mut self, name: &str, text: &str) -> Result<(), FrontendError> {
        self.include_stack.push(name.to_string());
        let mut conds: Vec<CondFrame> = Vec::new();
        let mut last_line = 0u32;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u32 + 1;
            last_line = line_no;
            let active = conds.iter().all(|c| c.active);
            let trimmed = raw.trim_start();
            if let Some(rest) = trimmed.strip_prefix('#') {
                self.directive(name, rest.trim(), line_no, active, &mut conds)?;
            } else if active {
                let expanded = self.expand(raw)?;
                self.out_lines.push(expanded);
                self.line_map.push((name.to_string(), line_no));
            }
        }
        if !conds.is_empty() {
            return Err(FrontendError::UnbalancedConditional { line: last_line });
        }
        self.include_stack.pop();
        Ok(())
    }

    fn directive(
        &mut self,
        file: &str,
        body: &str,
        line: u32,
        active: bool,
        conds: &mut Vec<CondFrame>,
    ) -> Result<(), FrontendError> {
        let (name, rest) = match body.find(char::is_whitespace) {
            Some(i) => (&body[..i], body[i..].trim()),
            None => (body, ""),
        };
        match name {
            "include" => {
                if !active {
                    return Ok(());
                }
                let path = rest
                    .strip_prefix('"')
                    .and_then(|r| r.strip_suffix('"'))
                    .or_else(|| rest.strip_prefix('<').and_then(|r| r.strip_suffix('>')))
                    .ok_or_else(|| FrontendError::ParseError {
                        msg: format!("malformed include: {body}"),
                        line,
                    })?
                    .to_string();
                if self.include_stack.contains(&path) {
                    return Err(FrontendError::CircularInclude { path, line });
                }
                if self.include_stack.len() >= MAX_INCLUDE_DEPTH {
                    return Err(FrontendError::CircularInclude { path, line });
                }
                let text = self
                    .unit
                    .files
                    .get(&path)
                    .cloned()
                    .ok_or(FrontendError::UnresolvedInclude { path: path.clone(), line })?;
                self.run_file(&path, &text)?;
            }
            "define" => {
                if active {
                    let (key, value) = match rest.find(char::is_whitespace) {
                        Some(i) => (&rest[..i], rest[i..].trim()),
                        None => (rest, ""),
                    };
                    if key.is_empty() {
                        return Err(FrontendError::ParseError {
                            msg: "empty macro name".into(),
                            line,
                        });
                    }
                    self.macros.insert(key.to_string(), value.to_string());
                }
            }
            "undef" => {
                if active {
                    self.macros.remove(rest);
                }
            }
            "ifdef" | "ifndef" => {
                let defined = self.macros.contains_key(rest);
                let branch = if name == "ifdef" { defined } else { !defined };
                conds.push(CondFrame {
                    active: active && branch,
                    parent_active: active,
                    seen_else: false,
                });
            }
            "else" => {
                let frame = conds
                    .last_mut()
                    .ok_or(FrontendError::UnbalancedConditional { line })?;
                if frame.seen_else {
                    return Err(FrontendError::UnbalancedConditional { line });
                }
                frame.seen_else = true;
                frame.active = frame.parent_active && !frame.active;
            }
            "endif" => {
                conds
                    .pop()
                    .ok_or(FrontendError::UnbalancedConditional { line })?;
            }
            _ => {
                let _ = file;
                return Err(FrontendError::UnknownDirective { name: name.to_string(), line });
            }
        }
        Ok(())
    }

    /// Repeatedly substitutes object-like macros at identifier boundaries
    /// until a fixpoint, bailing out after `MAX_EXPANSION_DEPTH` rounds.
    fn expand(&self, line: &str) -> Result<String, FrontendError> {
        if self.macros.is_empty() {
            return Ok(line.to_string());
        }
        let mut cur = line.to_string();
        for _ in 0..MAX_EXPANSION_DEPTH {
            let (next, replaced) = self.expand_once(&cur);
            if !replaced {
                return Ok(next);
            }
            cur = next;
        }
        // One more probe to name the macro still being expanded.
        let offender = self
            .macros
            .keys()
            .find(|k| contains_ident(&cur, k))
            .cloned()
            .unwrap_or_default();
        Err(FrontendError::RecursiveMacro(offender))
    }

    fn expand_once(&self, line: &str) -> (String, bool) {
        let bytes = line.as_bytes();
        let mut out = String::with_capacity(line.len());
        let mut replaced = false;
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let ident = &line[start..i];
                match self.macros.get(ident) {
                    Some(value) => {
                        out.push_str(value);
                        replaced = true;
                    }
                    None => out.push_str(ident),
                }
            } else {
                out.push(c);
                i += c.len_utf8();
            }
        }
        (out, replaced)
    }
}

fn contains_ident(text: &str, ident: &str) -> bool {
    let bytes = text.as_bytes();
    let mut i = 0;
    while let Some(pos) = text[i..].find(ident) {
        let start = i + pos;
        let end = start + ident.len();
        let left_ok = start == 0
            || !((bytes[start - 1] as char).is_ascii_alphanumeric() || bytes[start - 1] == b'_');
        let right_ok = end == bytes.len()
            || !((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_');
        if left_ok && right_ok {
            return true;
        }
        i = start + 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defines(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn directive_free_text_is_unchanged() {
        let src = "struct in_T { unsigned int i1; unsigned int i2; };\n\nvoid f() { }\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &BTreeMap::new()).unwrap();
        assert_eq!(merged.text(), src);
        assert_eq!(merged.origin(1), Some(("a.c", 1)));
        assert_eq!(merged.origin(3), Some(("a.c", 3)));
    }

    #[test]
    fn define_substitutes_at_identifier_boundaries() {
        let src = "#define N 4\nint a[N]; int bN; int Nb; int N_;\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &BTreeMap::new()).unwrap();
        assert_eq!(merged.text(), "int a[4]; int bN; int Nb; int N_;\n");
    }

    #[test]
    fn chained_macros_expand() {
        let src = "#define A B\n#define B 7\nint x = A;\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &BTreeMap::new()).unwrap();
        assert_eq!(merged.text(), "int x = 7;\n");
    }

    #[test]
    fn self_referential_macro_errors() {
        let src = "#define A A+1\nint x = A;\n";
        let unit = CompilationUnit::single("a.c", src);
        assert_eq!(
            preprocess(&unit, &BTreeMap::new()),
            Err(FrontendError::RecursiveMacro("A".into()))
        );
    }

    #[test]
    fn include_splices_files() {
        let mut files = BTreeMap::new();
        files.insert("main.c".to_string(), "#include \"defs.h\"\nint y = N;\n".to_string());
        files.insert("defs.h".to_string(), "#define N 3\nint x = N;\n".to_string());
        let unit = CompilationUnit { root: "main.c".into(), files };
        let merged = preprocess(&unit, &BTreeMap::new()).unwrap();
        assert_eq!(merged.text(), "int x = 3;\nint y = 3;\n");
        assert_eq!(merged.origin(1), Some(("defs.h", 2)));
        assert_eq!(merged.origin(2), Some(("main.c", 2)));
    }

    #[test]
    fn missing_include_errors() {
        let unit = CompilationUnit::single("a.c", "#include \"nope.h\"\n");
        assert_eq!(
            preprocess(&unit, &BTreeMap::new()),
            Err(FrontendError::UnresolvedInclude { path: "nope.h".into(), line: 1 })
        );
    }

    #[test]
    fn circular_include_errors() {
        let mut files = BTreeMap::new();
        files.insert("a.h".to_string(), "#include \"b.h\"\n".to_string());
        files.insert("b.h".to_string(), "#include \"a.h\"\n".to_string());
        let unit = CompilationUnit { root: "a.h".into(), files };
        assert!(matches!(
            preprocess(&unit, &BTreeMap::new()),
            Err(FrontendError::CircularInclude { .. })
        ));
    }

    #[test]
    fn conditionals_keep_and_drop() {
        let src = "#ifdef ON\nkept1\n#ifdef OFF\ndropped\n#else\nkept2\n#endif\n#else\ndropped2\n#endif\ntail\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &defines(&[("ON", "1")])).unwrap();
        assert_eq!(merged.text(), "kept1\nkept2\ntail\n");
    }

    #[test]
    fn ifndef_inverts() {
        let src = "#ifndef ON\nno\n#else\nyes\n#endif\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &defines(&[("ON", "1")])).unwrap();
        assert_eq!(merged.text(), "yes\n");
    }

    #[test]
    fn unbalanced_conditionals_error() {
        for src in ["#else\n", "#endif\n", "#ifdef X\nbody\n"] {
            let unit = CompilationUnit::single("a.c", src);
            assert!(matches!(
                preprocess(&unit, &BTreeMap::new()),
                Err(FrontendError::UnbalancedConditional { .. })
            ));
        }
    }

    #[test]
    fn undef_removes_macro() {
        let src = "#define N 4\n#undef N\nint a = N;\n";
        let unit = CompilationUnit::single("a.c", src);
        let merged = preprocess(&unit, &BTreeMap::new()).unwrap();
        assert_eq!(merged.text(), "int a = N;\n");
    }

    #[test]
    fn unknown_directive_errors() {
        let unit = CompilationUnit::single("a.c", "#pragma once\n");
        assert_eq!(
            preprocess(&unit, &BTreeMap::new()),
            Err(FrontendError::UnknownDirective { name: "pragma".into(), line: 1 })
        );
    }
}
