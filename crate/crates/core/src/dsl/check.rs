//! Semantic checks over a parsed case.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{CaseSpec, Decl, Span, Spanned};
use super::Diagnostic;
use crate::model::{validate_machine, MachineIssue, Severity};

/// Checks a parsed case: reference resolution, duplicate declarations,
/// timestamp chronology, numeric ranges, and machine validation. Findings
/// come back sorted by position.
pub fn check_case(spec: &CaseSpec) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();

    check_machine(spec, &mut diagnostics);
    check_namespaces(spec, &mut diagnostics);
    check_properties(spec, &mut diagnostics);
    check_observations(spec, &mut diagnostics);
    check_sequences(spec, &mut diagnostics);
    check_statements(spec, &mut diagnostics);

    diagnostics.sort_by_key(|d| (d.line, d.column, d.severity));
    diagnostics
}

fn reserved(name: &Spanned<String>, what: &str, diagnostics: &mut Vec<Diagnostic>) -> bool {
    if name.value == "any" {
        diagnostics.push(Diagnostic::error(
            format!("`any` is the builtin universal property and cannot name a {what}"),
            name.span,
        ));
        true
    } else {
        false
    }
}

fn check_duplicates<'a>(
    names: impl Iterator<Item = &'a Spanned<String>>,
    what: &str,
    diagnostics: &mut Vec<Diagnostic>,
) {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for name in names {
        if !seen.insert(&name.value) {
            diagnostics.push(Diagnostic::error(
                format!("duplicate {what} `{}`", name.value),
                name.span,
            ));
        }
    }
}

fn check_machine(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    check_duplicates(
        spec.machine.states.iter().map(|s| &s.name),
        "state",
        diagnostics,
    );
    check_duplicates(spec.machine.events.iter(), "event", diagnostics);
    for state in &spec.machine.states {
        reserved(&state.name, "state", diagnostics);
    }
    for event in &spec.machine.events {
        reserved(event, "event", diagnostics);
    }

    // Positions for machine-level findings: transitions anchor at their own
    // tokens, everything else at the state declaration or the `machine`
    // keyword.
    let state_span: BTreeMap<&str, Span> = spec
        .machine
        .states
        .iter()
        .map(|s| (s.name.value.as_str(), s.name.span))
        .collect();
    for issue in validate_machine(&spec.machine()) {
        let span = match &issue {
            MachineIssue::UndeclaredTransitionState { index, state } => {
                let t = &spec.machine.transitions[*index];
                if t.from.value == *state {
                    t.from.span
                } else {
                    t.to.span
                }
            }
            MachineIssue::UndeclaredTransitionEvent { index, .. } => {
                spec.machine.transitions[*index].event.span
            }
            MachineIssue::DuplicateTransition { index } => {
                spec.machine.transitions[*index].from.span
            }
            MachineIssue::UnreachableState { state } => state_span
                .get(state.as_str())
                .copied()
                .unwrap_or(spec.machine.keyword.span),
            _ => spec.machine.keyword.span,
        };
        let diagnostic = match issue.severity() {
            Severity::Error => Diagnostic::error(format!("{issue}"), span),
            Severity::Warning => Diagnostic::warning(format!("{issue}"), span),
        };
        diagnostics.push(diagnostic);
    }
}

fn check_namespaces(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    check_duplicates(
        spec.properties.iter().map(|p| &p.name),
        "property",
        diagnostics,
    );
    check_duplicates(
        spec.observations().map(|o| &o.name),
        "observation",
        diagnostics,
    );
    // Sequences and theories share one namespace.
    check_duplicates(
        spec.declarations.iter().filter_map(|d| match d {
            Decl::Sequence(s) | Decl::Theory(s) => Some(&s.name),
            _ => None,
        }),
        "sequence",
        diagnostics,
    );
    check_duplicates(
        spec.statement_decls().map(|e| &e.name),
        "evidence statement",
        diagnostics,
    );
    for decl in &spec.declarations {
        let what = match decl {
            Decl::Observation(_) => "observation",
            Decl::Sequence(_) => "sequence",
            Decl::Theory(_) => "theory",
            Decl::Evidence(_) => "evidence statement",
        };
        reserved(decl.name(), what, diagnostics);
    }
}

fn check_properties(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    let states = spec.declared_state_names();
    for property in &spec.properties {
        reserved(&property.name, "property", diagnostics);
        if let super::ast::PropertyMembers::Named(members) = &property.members {
            for member in members {
                if !states.contains(member.value.as_str()) {
                    diagnostics.push(Diagnostic::error(
                        format!(
                            "property `{}` references undeclared state `{}`",
                            property.name.value, member.value
                        ),
                        member.span,
                    ));
                }
            }
        }
    }
}

fn check_observations(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    let properties: BTreeSet<&str> = spec
        .properties
        .iter()
        .map(|p| p.name.value.as_str())
        .collect();
    for obs in spec.observations() {
        if obs.property.value != "any" && !properties.contains(obs.property.value.as_str()) {
            diagnostics.push(Diagnostic::error(
                format!("unknown property `{}`", obs.property.value),
                obs.property.span,
            ));
        }
        let w = obs.weight.value;
        if !(w > 0.0 && w <= 1.0) {
            diagnostics.push(Diagnostic::error(
                format!("weight {w} is outside (0, 1]"),
                obs.weight.span,
            ));
        }
    }
}

fn check_sequences(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    let observations: BTreeMap<&str, Option<u64>> = spec
        .observations()
        .map(|o| (o.name.value.as_str(), o.timestamp_ms))
        .collect();
    let sequences = spec.declarations.iter().filter_map(|d| match d {
        Decl::Sequence(s) | Decl::Theory(s) => Some(s),
        _ => None,
    });
    for seq in sequences {
        let mut last_t: Option<u64> = None;
        for obs_ref in &seq.observations {
            let Some(timestamp) = observations.get(obs_ref.value.as_str()) else {
                diagnostics.push(Diagnostic::error(
                    format!("unknown observation `{}`", obs_ref.value),
                    obs_ref.span,
                ));
                continue;
            };
            if let Some(t) = timestamp {
                if let Some(prev) = last_t {
                    if *t < prev {
                        diagnostics.push(Diagnostic::error(
                            format!(
                                "non-chronological timestamps in sequence `{}`: \
                                 t={t} after t={prev}",
                                seq.name.value
                            ),
                            obs_ref.span,
                        ));
                    }
                }
                last_t = Some(*t);
            }
        }
    }
}

fn check_statements(spec: &CaseSpec, diagnostics: &mut Vec<Diagnostic>) {
    let sequences: BTreeSet<&str> = spec
        .declarations
        .iter()
        .filter_map(|d| match d {
            Decl::Sequence(s) | Decl::Theory(s) => Some(s.name.value.as_str()),
            _ => None,
        })
        .collect();
    for statement in spec.statement_decls() {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for seq_ref in &statement.sequences {
            if !sequences.contains(seq_ref.value.as_str()) {
                diagnostics.push(Diagnostic::error(
                    format!("unknown sequence `{}`", seq_ref.value),
                    seq_ref.span,
                ));
            }
            if !seen.insert(&seq_ref.value) {
                diagnostics.push(Diagnostic::error(
                    format!(
                        "duplicate sequence `{}` in statement `{}`",
                        seq_ref.value, statement.name.value
                    ),
                    seq_ref.span,
                ));
            }
        }
    }
}
