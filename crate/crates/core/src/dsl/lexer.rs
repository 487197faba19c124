//! Hand-rolled lexer for the case language.
//!
//! Identifiers are ASCII letters, digits, and underscores starting with a
//! letter. `//` comments run to end of line. Decimal literals carry at most
//! nine fractional digits so weights stay reproducible.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::Span;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Ident(String),
    Int(u64),
    Decimal(f64),
    Str(String),
    KwCase,
    KwMachine,
    KwStates,
    KwEvents,
    KwTransitions,
    KwInit,
    KwFinal,
    KwProperty,
    KwObservation,
    KwSequence,
    KwTheory,
    KwEvidence,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Star,
    /// `--`, the left half of a transition arrow.
    DashDash,
    /// `-->`, the right half of a transition arrow.
    Arrow,
    Eof,
}

impl TokenKind {
    /// Short description for "expected X, found Y" messages.
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Decimal(v) => format!("number `{v}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::KwCase => "`case`".into(),
            TokenKind::KwMachine => "`machine`".into(),
            TokenKind::KwStates => "`states`".into(),
            TokenKind::KwEvents => "`events`".into(),
            TokenKind::KwTransitions => "`transitions`".into(),
            TokenKind::KwInit => "`init`".into(),
            TokenKind::KwFinal => "`final`".into(),
            TokenKind::KwProperty => "`property`".into(),
            TokenKind::KwObservation => "`observation`".into(),
            TokenKind::KwSequence => "`sequence`".into(),
            TokenKind::KwTheory => "`theory`".into(),
            TokenKind::KwEvidence => "`evidence`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::DashDash => "`--`".into(),
            TokenKind::Arrow => "`-->`".into(),
            TokenKind::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn keyword(ident: &str) -> Option<TokenKind> {
    Some(match ident {
        "case" => TokenKind::KwCase,
        "machine" => TokenKind::KwMachine,
        "states" => TokenKind::KwStates,
        "events" => TokenKind::KwEvents,
        "transitions" => TokenKind::KwTransitions,
        "init" => TokenKind::KwInit,
        "final" => TokenKind::KwFinal,
        "property" => TokenKind::KwProperty,
        "observation" => TokenKind::KwObservation,
        "sequence" => TokenKind::KwSequence,
        "theory" => TokenKind::KwTheory,
        "evidence" => TokenKind::KwEvidence,
        _ => return None,
    })
}

pub(crate) fn lex(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let bytes = source.as_bytes();
    let mut pos = 0usize;
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! span {
        () => {
            Span { line, column }
        };
    }

    while pos < bytes.len() {
        let start = span!();
        let b = bytes[pos];
        match b {
            b'\n' => {
                pos += 1;
                line += 1;
                column = 1;
            }
            b' ' | b'\t' | b'\r' => {
                pos += 1;
                column += 1;
            }
            b'/' if bytes.get(pos + 1) == Some(&b'/') => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                    column += 1;
                }
            }
            b'{' | b'}' | b'(' | b')' | b'[' | b']' | b',' | b';' | b'=' | b'*' => {
                let kind = match b {
                    b'{' => TokenKind::LBrace,
                    b'}' => TokenKind::RBrace,
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'[' => TokenKind::LBracket,
                    b']' => TokenKind::RBracket,
                    b',' => TokenKind::Comma,
                    b';' => TokenKind::Semi,
                    b'=' => TokenKind::Eq,
                    _ => TokenKind::Star,
                };
                tokens.push(Token { kind, span: start });
                pos += 1;
                column += 1;
            }
            b'-' => {
                if bytes.get(pos + 1) == Some(&b'-') {
                    if bytes.get(pos + 2) == Some(&b'>') {
                        tokens.push(Token {
                            kind: TokenKind::Arrow,
                            span: start,
                        });
                        pos += 3;
                        column += 3;
                    } else {
                        tokens.push(Token {
                            kind: TokenKind::DashDash,
                            span: start,
                        });
                        pos += 2;
                        column += 2;
                    }
                } else {
                    diagnostics.push(Diagnostic::error("unexpected character `-`".into(), start));
                    pos += 1;
                    column += 1;
                }
            }
            b'"' => {
                pos += 1;
                column += 1;
                let begin = pos;
                while pos < bytes.len() && bytes[pos] != b'"' && bytes[pos] != b'\n' {
                    pos += 1;
                    column += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'"' {
                    let text = source[begin..pos].into();
                    tokens.push(Token {
                        kind: TokenKind::Str(text),
                        span: start,
                    });
                    pos += 1;
                    column += 1;
                } else {
                    diagnostics.push(Diagnostic::error("unterminated string".into(), start));
                }
            }
            b'0'..=b'9' => {
                let begin = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                    column += 1;
                }
                let mut fractional = 0usize;
                if bytes.get(pos) == Some(&b'.')
                    && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit)
                {
                    pos += 1;
                    column += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        fractional += 1;
                        pos += 1;
                        column += 1;
                    }
                }
                let text = &source[begin..pos];
                if fractional == 0 {
                    match text.parse::<u64>() {
                        Ok(v) => tokens.push(Token {
                            kind: TokenKind::Int(v),
                            span: start,
                        }),
                        Err(_) => diagnostics.push(Diagnostic::error(
                            format!("integer literal `{text}` is out of range"),
                            start,
                        )),
                    }
                } else if fractional > 9 {
                    diagnostics.push(Diagnostic::error(
                        format!("decimal literal `{text}` has more than 9 fractional digits"),
                        start,
                    ));
                } else {
                    match text.parse::<f64>() {
                        Ok(v) => tokens.push(Token {
                            kind: TokenKind::Decimal(v),
                            span: start,
                        }),
                        Err(_) => diagnostics.push(Diagnostic::error(
                            format!("malformed number `{text}`"),
                            start,
                        )),
                    }
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let begin = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                    column += 1;
                }
                let text = &source[begin..pos];
                let kind = keyword(text).unwrap_or_else(|| TokenKind::Ident(text.into()));
                tokens.push(Token { kind, span: start });
            }
            _ => {
                diagnostics.push(Diagnostic::error(
                    format!("unexpected character `{}`", bytes[pos] as char),
                    start,
                ));
                pos += 1;
                column += 1;
            }
        }
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        span: span!(),
    });
    (tokens, diagnostics)
}
