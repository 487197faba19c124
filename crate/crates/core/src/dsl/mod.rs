//! The textual case-specification language (`.fcase` files).
//!
//! A case file declares the incident machine, named state properties, and
//! the evidence: observations, witness sequences, investigator theories, and
//! evidential statements. [`parse_case`] builds a source-mirroring
//! [`CaseSpec`], [`check_case`] reports semantic findings with positions,
//! and [`format_case`] renders the canonical form (formatting then reparsing
//! yields an equal spec).
//!
//! ```text
//! case "brake" {
//!   machine {
//!     states { ok init; leak; fail; }
//!     events { hold wear burst }
//!     transitions { ok --wear--> leak; leak --burst--> fail; }
//!   }
//!   property P_fail = {fail};
//!   observation o1 = (P_fail, t=1500, min=1, max=0, w=0.9);
//!   sequence s1 = [o1];
//!   evidence es1 = {s1};
//! }
//! ```

mod ast;
mod check;
mod format;
mod lexer;
mod parser;

pub use ast::{
    CaseSpec, Decl, EvidenceDecl, LowerError, MachineDecl, ObservationDecl, PropertyDecl,
    PropertyMembers, SequenceDecl, Span, Spanned, StateDecl, TransitionDecl,
};
pub use check::check_case;
pub use format::format_case;
pub use parser::parse_case;

use alloc::string::String;
use core::fmt;

use crate::model::Severity;

/// A positioned finding from parsing or checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    /// 1-based source line.
    pub line: u32,
    /// 1-based source column.
    pub column: u32,
}

impl Diagnostic {
    pub fn error(message: String, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
            line: span.line,
            column: span.column,
        }
    }

    pub fn warning(message: String, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message,
            line: span.line,
            column: span.column,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}:{}: {}",
            self.severity, self.line, self.column, self.message
        )
    }
}

/// Whether any diagnostic is error-level.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}
