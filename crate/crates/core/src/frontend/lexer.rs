//! Hand-rolled lexer for the C subset.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    KwStruct,
    KwInt,
    KwUnsigned,
    KwSigned,
    KwVoid,
    KwConst,
    KwIf,
    KwElse,
    KwFor,
    KwWhile,
    KwReturn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Bang,
    Assign,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Shl,
    Shr,
    AndAnd,
    OrOr,
    Question,
    Colon,
    PlusEq,
    MinusEq,
    StarEq,
    SlashEq,
    PercentEq,
    AmpEq,
    PipeEq,
    CaretEq,
    ShlEq,
    ShrEq,
    PlusPlus,
    MinusMinus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
}

pub fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    while i < b.len() {
        let c = b[i] as char;
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        // Comments.
        if c == '/' && i + 1 < b.len() {
            match b[i + 1] {
                b'/' => {
                    while i < b.len() && b[i] != b'\n' {
                        i += 1;
                    }
                    continue;
                }
                b'*' => {
                    let start_line = line;
                    i += 2;
                    loop {
                        if i + 1 >= b.len() {
                            return Err(FrontendError::ParseError {
                                msg: "unterminated block comment".into(),
                                line: start_line,
                            });
                        }
                        if b[i] == b'\n' {
                            line += 1;
                        }
                        if b[i] == b'*' && b[i + 1] == b'/' {
                            i += 2;
                            break;
                        }
                        i += 1;
                    }
                    continue;
                }
                _ => {}
            }
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match word {
                "struct" => Tok::KwStruct,
                "int" => Tok::KwInt,
                "unsigned" => Tok::KwUnsigned,
                "signed" => Tok::KwSigned,
                "void" => Tok::KwVoid,
                "const" => Tok::KwConst,
                "if" => Tok::KwIf,
                "else" => Tok::KwElse,
                "for" => Tok::KwFor,
                "while" => Tok::KwWhile,
                "return" => Tok::KwReturn,
                _ => Tok::Ident(word.to_string()),
            };
            toks.push(Token { tok, line });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let value = if c == '0' && i + 1 < b.len() && (b[i + 1] == b'x' || b[i + 1] == b'X') {
                i += 2;
                let hs = i;
                while i < b.len() && (b[i] as char).is_ascii_hexdigit() {
                    i += 1;
                }
                u64::from_str_radix(&src[hs..i], 16).map_err(|_| FrontendError::ParseError {
                    msg: format!("bad hex literal {}", &src[start..i]),
                    line,
                })?
            } else {
                while i < b.len() && (b[i] as char).is_ascii_digit() {
                    i += 1;
                }
                src[start..i].parse::<u64>().map_err(|_| FrontendError::ParseError {
                    msg: format!("integer literal {} overflows", &src[start..i]),
                    line,
                })?
            };
            // Integer suffixes are accepted and ignored; literal signedness
            // follows the value-fits rule during flattening.
            while i < b.len() && matches!(b[i], b'u' | b'U' | b'l' | b'L') {
                i += 1;
            }
            toks.push(Token { tok: Tok::Int(value), line });
            continue;
        }
        // Operators, longest match first.
        let rest = &src[i..];
        let two_or_three: &[(&str, Tok)] = &[
            ("<<=", Tok::ShlEq),
            (">>=", Tok::ShrEq),
            ("->", Tok::Arrow),
            ("++", Tok::PlusPlus),
            ("--", Tok::MinusMinus),
            ("<<", Tok::Shl),
            (">>", Tok::Shr),
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("==", Tok::EqEq),
            ("!=", Tok::Ne),
            ("&&", Tok::AndAnd),
            ("||", Tok::OrOr),
            ("+=", Tok::PlusEq),
            ("-=", Tok::MinusEq),
            ("*=", Tok::StarEq),
            ("/=", Tok::SlashEq),
            ("%=", Tok::PercentEq),
            ("&=", Tok::AmpEq),
            ("|=", Tok::PipeEq),
            ("^=", Tok::CaretEq),
        ];
        if let Some((pat, tok)) = two_or_three.iter().find(|(p, _)| rest.starts_with(p)) {
            toks.push(Token { tok: tok.clone(), line });
            i += pat.len();
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '^' => Tok::Caret,
            '~' => Tok::Tilde,
            '!' => Tok::Bang,
            '=' => Tok::Assign,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '?' => Tok::Question,
            ':' => Tok::Colon,
            other => {
                return Err(FrontendError::ParseError {
                    msg: format!("unexpected character '{other}'"),
                    line,
                })
            }
        };
        toks.push(Token { tok, line });
        i += 1;
    }
    Ok(toks)
}
