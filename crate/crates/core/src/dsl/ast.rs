//! Source-mirroring syntax tree for case files.
//!
//! Declarations keep their source order and reference each other by name, so
//! a parsed spec can represent unresolved references for [`check_case`] to
//! report. Lowering methods resolve names into `model` values; they assume a
//! check-clean spec and error on dangling references.
//!
//! [`check_case`]: super::check_case

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::model::{
    EvidentialStatement, ModelError, Observation, ObservationSequence, PropertyDef, Slack,
    StateMachine, StateSet, Transition, Weight,
};

/// A 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

/// A value with the position it was parsed at. Equality ignores the span, so
/// structural spec comparison is position-insensitive.
#[derive(Debug, Clone, Copy)]
pub struct Spanned<T> {
    pub value: T,
    pub span: Span,
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Eq> Eq for Spanned<T> {}

impl<T: fmt::Display> fmt::Display for Spanned<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

pub(crate) type Name = Spanned<String>;

/// A parsed case file: one case per file, entities one-to-one with source.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub name: String,
    pub machine: MachineDecl,
    pub properties: Vec<PropertyDecl>,
    /// Observation, sequence, theory, and evidence declarations in source
    /// order.
    pub declarations: Vec<Decl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineDecl {
    /// Position of the `machine` keyword, for findings without a better
    /// anchor.
    pub keyword: Spanned<()>,
    pub states: Vec<StateDecl>,
    pub events: Vec<Spanned<String>>,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub name: Spanned<String>,
    pub init: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDecl {
    pub from: Spanned<String>,
    pub event: Spanned<String>,
    pub to: Spanned<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDecl {
    pub name: Spanned<String>,
    pub members: PropertyMembers,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyMembers {
    /// `property P = any;` — holds at every state.
    Any,
    Named(Vec<Spanned<String>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Observation(ObservationDecl),
    Sequence(SequenceDecl),
    Theory(SequenceDecl),
    Evidence(EvidenceDecl),
}

impl Decl {
    pub fn name(&self) -> &Spanned<String> {
        match self {
            Decl::Observation(d) => &d.name,
            Decl::Sequence(d) | Decl::Theory(d) => &d.name,
            Decl::Evidence(d) => &d.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationDecl {
    pub name: Spanned<String>,
    /// Property reference; the builtin `any` needs no declaration.
    pub property: Spanned<String>,
    pub timestamp_ms: Option<u64>,
    pub min_steps: u32,
    pub max_slack: Slack,
    pub weight: Spanned<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDecl {
    pub name: Spanned<String>,
    pub observations: Vec<Spanned<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceDecl {
    pub name: Spanned<String>,
    pub sequences: Vec<Spanned<String>>,
}

/// Failure to lower a declaration because a reference does not resolve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unknown observation `{0}`")]
    UnknownObservation(String),
    #[error("unknown sequence `{0}`")]
    UnknownSequence(String),
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("unknown evidence statement `{0}`")]
    UnknownStatement(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl CaseSpec {
    pub fn observations(&self) -> impl Iterator<Item = &ObservationDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Decl::Observation(o) => Some(o),
            _ => None,
        })
    }

    pub fn sequence_decls(&self) -> impl Iterator<Item = &SequenceDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Decl::Sequence(s) => Some(s),
            _ => None,
        })
    }

    pub fn theory_decls(&self) -> impl Iterator<Item = &SequenceDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Decl::Theory(s) => Some(s),
            _ => None,
        })
    }

    pub fn statement_decls(&self) -> impl Iterator<Item = &EvidenceDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Decl::Evidence(e) => Some(e),
            _ => None,
        })
    }

    /// Lowers the machine declaration. Always succeeds; undeclared references
    /// inside transitions surface through machine validation.
    pub fn machine(&self) -> StateMachine {
        StateMachine {
            states: self
                .machine
                .states
                .iter()
                .map(|s| s.name.value.clone())
                .collect(),
            events: self
                .machine
                .events
                .iter()
                .map(|e| e.value.clone())
                .collect(),
            transitions: self
                .machine
                .transitions
                .iter()
                .map(|t| Transition::new(&t.from.value, &t.event.value, &t.to.value))
                .collect(),
            initial: self
                .machine
                .states
                .iter()
                .filter(|s| s.init)
                .map(|s| s.name.value.clone())
                .collect(),
            final_states: self
                .machine
                .states
                .iter()
                .filter(|s| s.is_final)
                .map(|s| s.name.value.clone())
                .collect(),
        }
    }

    /// All declared property definitions (excluding the builtin `any`).
    pub fn property_defs(&self) -> Vec<PropertyDef> {
        self.properties
            .iter()
            .map(|p| PropertyDef {
                name: p.name.value.clone(),
                member_states: match &p.members {
                    PropertyMembers::Any => StateSet::Universal,
                    PropertyMembers::Named(names) => {
                        StateSet::Named(names.iter().map(|n| n.value.clone()).collect())
                    }
                },
            })
            .collect()
    }

    pub fn resolve_property(&self, name: &str) -> Result<PropertyDef, LowerError> {
        if name == "any" {
            return Ok(PropertyDef::any());
        }
        self.property_defs()
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| LowerError::UnknownProperty(name.into()))
    }

    pub fn observation(&self, name: &str) -> Result<Observation, LowerError> {
        let decl = self
            .observations()
            .find(|o| o.name.value == name)
            .ok_or_else(|| LowerError::UnknownObservation(name.into()))?;
        Ok(Observation {
            property: self.resolve_property(&decl.property.value)?,
            timestamp_ms: decl.timestamp_ms,
            min_steps: decl.min_steps,
            max_slack: decl.max_slack,
            weight: Weight::new(decl.weight.value).map_err(LowerError::Model)?,
        })
    }

    fn lower_sequence(&self, decl: &SequenceDecl) -> Result<ObservationSequence, LowerError> {
        let observations = decl
            .observations
            .iter()
            .map(|name| self.observation(&name.value))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ObservationSequence {
            label: decl.name.value.clone(),
            observations,
        })
    }

    pub fn sequence(&self, label: &str) -> Result<ObservationSequence, LowerError> {
        let decl = self
            .sequence_decls()
            .find(|s| s.name.value == label)
            .ok_or_else(|| LowerError::UnknownSequence(label.into()))?;
        self.lower_sequence(decl)
    }

    pub fn theory(&self, label: &str) -> Result<ObservationSequence, LowerError> {
        let decl = self
            .theory_decls()
            .find(|s| s.name.value == label)
            .ok_or_else(|| LowerError::UnknownTheory(label.into()))?;
        self.lower_sequence(decl)
    }

    /// Lowers an evidence statement. References may name sequences or
    /// theories (they share a namespace).
    pub fn statement(&self, label: &str) -> Result<EvidentialStatement, LowerError> {
        let decl = self
            .statement_decls()
            .find(|e| e.name.value == label)
            .ok_or_else(|| LowerError::UnknownStatement(label.into()))?;
        let mut sequences = Vec::with_capacity(decl.sequences.len());
        for name in &decl.sequences {
            let seq_decl = self
                .sequence_decls()
                .chain(self.theory_decls())
                .find(|s| s.name.value == name.value)
                .ok_or_else(|| LowerError::UnknownSequence(name.value.clone()))?;
            sequences.push(self.lower_sequence(seq_decl)?);
        }
        EvidentialStatement::new(label, sequences).map_err(LowerError::Model)
    }

    pub(crate) fn declared_state_names(&self) -> BTreeSet<&str> {
        self.machine
            .states
            .iter()
            .map(|s| s.name.value.as_str())
            .collect()
    }
}
