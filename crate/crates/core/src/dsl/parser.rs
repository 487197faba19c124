//! Recursive-descent parser for case files.
//!
//! On a syntax error the parser reports a positioned diagnostic, skips to the
//! end of the offending declaration, and keeps going, so one pass can report
//! several findings. A spec is only returned when no error was found.

use alloc::format;
use alloc::vec::Vec;

use super::ast::{
    CaseSpec, Decl, EvidenceDecl, MachineDecl, Name, ObservationDecl, PropertyDecl,
    PropertyMembers, SequenceDecl, Span, Spanned, StateDecl, TransitionDecl,
};
use super::lexer::{lex, Token, TokenKind};
use super::Diagnostic;
use crate::model::Slack;

/// Parses one case file. Returns the spec exactly as declared, or at least
/// one error diagnostic; never both.
pub fn parse_case(source: &str) -> Result<CaseSpec, Vec<Diagnostic>> {
    let (tokens, lex_diagnostics) = lex(source);
    if !lex_diagnostics.is_empty() {
        return Err(lex_diagnostics);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        diagnostics: Vec::new(),
    };
    let spec = parser.case();
    if parser.diagnostics.is_empty() {
        Ok(spec.expect("no diagnostics implies a parsed spec"))
    } else {
        Err(parser.diagnostics)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let token = self.peek().clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&mut self, expected: &str) {
        let found = self.peek();
        self.diagnostics.push(Diagnostic::error(
            format!("expected {expected}, found {}", found.kind.describe()),
            found.span,
        ));
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Option<Span> {
        if self.at(&kind) {
            Some(self.bump().span)
        } else {
            self.error_here(expected);
            None
        }
    }

    fn expect_ident(&mut self, expected: &str) -> Option<Name> {
        if let TokenKind::Ident(name) = &self.peek().kind {
            let value = name.clone();
            let span = self.bump().span;
            Some(Spanned { value, span })
        } else {
            self.error_here(expected);
            None
        }
    }

    /// Skips past the current declaration: consumes up to and including the
    /// next `;`, stopping early before a `}` or end of file.
    fn recover(&mut self) {
        loop {
            match &self.peek().kind {
                TokenKind::Semi => {
                    self.bump();
                    return;
                }
                TokenKind::RBrace | TokenKind::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn case(&mut self) -> Option<CaseSpec> {
        self.expect(TokenKind::KwCase, "`case`")?;
        let name = if let TokenKind::Str(text) = &self.peek().kind {
            let text = text.clone();
            self.bump();
            text
        } else {
            self.error_here("case name string");
            return None;
        };
        self.expect(TokenKind::LBrace, "`{`")?;
        let machine = self.machine()?;

        let mut properties = Vec::new();
        while self.at(&TokenKind::KwProperty) {
            if let Some(property) = self.property() {
                properties.push(property);
            }
        }

        let mut declarations = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("declaration or `}`");
                    return None;
                }
                TokenKind::KwObservation => {
                    if let Some(decl) = self.observation() {
                        declarations.push(Decl::Observation(decl));
                    }
                }
                TokenKind::KwSequence => {
                    if let Some(decl) = self.name_list_decl(TokenKind::KwSequence) {
                        declarations.push(Decl::Sequence(decl));
                    }
                }
                TokenKind::KwTheory => {
                    if let Some(decl) = self.name_list_decl(TokenKind::KwTheory) {
                        declarations.push(Decl::Theory(decl));
                    }
                }
                TokenKind::KwEvidence => {
                    if let Some(decl) = self.evidence() {
                        declarations.push(Decl::Evidence(decl));
                    }
                }
                TokenKind::KwProperty => {
                    self.diagnostics.push(Diagnostic::error(
                        "property declarations must precede observation, sequence, theory, \
                         and evidence declarations"
                            .into(),
                        self.peek().span,
                    ));
                    self.bump();
                    self.recover();
                }
                _ => {
                    self.error_here("declaration or `}`");
                    self.bump();
                    self.recover();
                }
            }
        }
        if !self.at(&TokenKind::Eof) {
            self.error_here("end of file");
        }
        Some(CaseSpec {
            name,
            machine,
            properties,
            declarations,
        })
    }

    fn machine(&mut self) -> Option<MachineDecl> {
        let keyword_span = self.expect(TokenKind::KwMachine, "`machine`")?;
        self.expect(TokenKind::LBrace, "`{`")?;

        self.expect(TokenKind::KwStates, "`states`")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut states = Vec::new();
        while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
            match self.state_decl() {
                Some(state) => states.push(state),
                None => self.recover(),
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;

        self.expect(TokenKind::KwEvents, "`events`")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut events = Vec::new();
        while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
            match self.expect_ident("event name") {
                Some(event) => events.push(event),
                None => {
                    self.bump();
                }
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;

        self.expect(TokenKind::KwTransitions, "`transitions`")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut transitions = Vec::new();
        while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
            match self.transition() {
                Some(transition) => transitions.push(transition),
                None => self.recover(),
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;

        self.expect(TokenKind::RBrace, "`}` closing the machine block")?;
        Some(MachineDecl {
            keyword: Spanned {
                value: (),
                span: keyword_span,
            },
            states,
            events,
            transitions,
        })
    }

    fn state_decl(&mut self) -> Option<StateDecl> {
        let name = self.expect_ident("state name")?;
        let mut init = false;
        let mut is_final = false;
        loop {
            if self.eat(&TokenKind::KwInit) {
                init = true;
            } else if self.eat(&TokenKind::KwFinal) {
                is_final = true;
            } else {
                break;
            }
        }
        self.expect(TokenKind::Semi, "`;`")?;
        Some(StateDecl {
            name,
            init,
            is_final,
        })
    }

    fn transition(&mut self) -> Option<TransitionDecl> {
        let from = self.expect_ident("source state")?;
        self.expect(TokenKind::DashDash, "`--`")?;
        let event = self.expect_ident("event name")?;
        self.expect(TokenKind::Arrow, "`-->`")?;
        let to = self.expect_ident("target state")?;
        self.expect(TokenKind::Semi, "`;`")?;
        Some(TransitionDecl { from, event, to })
    }

    fn property(&mut self) -> Option<PropertyDecl> {
        self.expect(TokenKind::KwProperty, "`property`")?;
        let name = self.expect_ident("property name").or_else(|| {
            self.recover();
            None
        })?;
        if self.expect(TokenKind::Eq, "`=`").is_none() {
            self.recover();
            return None;
        }
        let members = if let TokenKind::Ident(text) = &self.peek().kind {
            if text == "any" {
                self.bump();
                PropertyMembers::Any
            } else {
                self.error_here("`{` or `any`");
                self.recover();
                return None;
            }
        } else if self.eat(&TokenKind::LBrace) {
            let names = self.ident_list(TokenKind::RBrace, "`}`")?;
            PropertyMembers::Named(names)
        } else {
            self.error_here("`{` or `any`");
            self.recover();
            return None;
        };
        if self.expect(TokenKind::Semi, "`;`").is_none() {
            self.recover();
            return None;
        }
        Some(PropertyDecl { name, members })
    }

    /// Comma-separated identifiers up to the closing token (already past the
    /// opener). Empty lists are allowed.
    fn ident_list(&mut self, close: TokenKind, close_text: &str) -> Option<Vec<Name>> {
        let mut names = Vec::new();
        if self.eat(&close) {
            return Some(names);
        }
        loop {
            match self.expect_ident("identifier") {
                Some(name) => names.push(name),
                None => {
                    self.recover();
                    return None;
                }
            }
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            if self.eat(&close) {
                return Some(names);
            }
            self.error_here(&format!("`,` or {close_text}"));
            self.recover();
            return None;
        }
    }

    fn observation(&mut self) -> Option<ObservationDecl> {
        self.expect(TokenKind::KwObservation, "`observation`")?;
        let parsed = (|| {
            let name = self.expect_ident("observation name")?;
            self.expect(TokenKind::Eq, "`=`")?;
            self.expect(TokenKind::LParen, "`(`")?;
            let property = self.expect_ident("property name")?;
            self.expect(TokenKind::Comma, "`,`")?;

            let timestamp_ms = if self.field_key_is("t") {
                self.bump();
                self.expect(TokenKind::Eq, "`=`")?;
                let value = self.expect_int("timestamp in milliseconds")?;
                self.expect(TokenKind::Comma, "`,`")?;
                Some(value)
            } else {
                None
            };

            self.expect_field_key("min")?;
            self.expect(TokenKind::Eq, "`=`")?;
            let min = self.expect_int("minimum duration")?;
            let min_steps = self.int_to_u32(min, "min")?;
            self.expect(TokenKind::Comma, "`,`")?;

            self.expect_field_key("max")?;
            self.expect(TokenKind::Eq, "`=`")?;
            let max_slack = if self.eat(&TokenKind::Star) {
                Slack::Unbounded
            } else {
                let max = self.expect_int("duration slack or `*`")?;
                Slack::Finite(self.int_to_u32(max, "max")?)
            };
            self.expect(TokenKind::Comma, "`,`")?;

            self.expect_field_key("w")?;
            self.expect(TokenKind::Eq, "`=`")?;
            let weight_span = self.peek().span;
            let weight_value = match self.peek().kind {
                TokenKind::Decimal(v) => {
                    self.bump();
                    v
                }
                TokenKind::Int(v) => {
                    self.bump();
                    v as f64
                }
                _ => {
                    self.error_here("weight value");
                    return None;
                }
            };
            self.expect(TokenKind::RParen, "`)`")?;
            self.expect(TokenKind::Semi, "`;`")?;
            Some(ObservationDecl {
                name,
                property,
                timestamp_ms,
                min_steps,
                max_slack,
                weight: Spanned {
                    value: weight_value,
                    span: weight_span,
                },
            })
        })();
        if parsed.is_none() {
            self.recover();
        }
        parsed
    }

    fn field_key_is(&self, key: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(text) if text == key)
    }

    fn expect_field_key(&mut self, key: &str) -> Option<()> {
        if self.field_key_is(key) {
            self.bump();
            Some(())
        } else {
            self.error_here(&format!("`{key}=`"));
            None
        }
    }

    fn expect_int(&mut self, expected: &str) -> Option<u64> {
        if let TokenKind::Int(v) = self.peek().kind {
            self.bump();
            Some(v)
        } else {
            self.error_here(expected);
            None
        }
    }

    fn int_to_u32(&mut self, value: u64, field: &str) -> Option<u32> {
        u32::try_from(value)
            .map_err(|_| {
                let span = self.tokens[self.pos.saturating_sub(1)].span;
                self.diagnostics.push(Diagnostic::error(
                    format!("{field}={value} is out of range"),
                    span,
                ));
            })
            .ok()
    }

    fn name_list_decl(&mut self, kw: TokenKind) -> Option<SequenceDecl> {
        let expected = kw.describe();
        self.expect(kw, &expected)?;
        let parsed = (|| {
            let name = self.expect_ident("name")?;
            self.expect(TokenKind::Eq, "`=`")?;
            self.expect(TokenKind::LBracket, "`[`")?;
            let observations = self.ident_list(TokenKind::RBracket, "`]`")?;
            self.expect(TokenKind::Semi, "`;`")?;
            Some(SequenceDecl { name, observations })
        })();
        if parsed.is_none() {
            self.recover();
        }
        parsed
    }

    fn evidence(&mut self) -> Option<EvidenceDecl> {
        self.expect(TokenKind::KwEvidence, "`evidence`")?;
        let parsed = (|| {
            let name = self.expect_ident("evidence name")?;
            self.expect(TokenKind::Eq, "`=`")?;
            self.expect(TokenKind::LBrace, "`{`")?;
            let sequences = self.ident_list(TokenKind::RBrace, "`}`")?;
            self.expect(TokenKind::Semi, "`;`")?;
            Some(EvidenceDecl { name, sequences })
        })();
        if parsed.is_none() {
            self.recover();
        }
        parsed
    }
}
