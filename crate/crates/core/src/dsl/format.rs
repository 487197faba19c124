//! Canonical case-file formatter.
//!
//! One declaration per line, two-space indentation per nesting level,
//! observation fields in the order (property, t, min, max, w), declaration
//! order preserved. Formatting then reparsing yields an equal spec.

use alloc::format;
use alloc::string::String;

use super::ast::{CaseSpec, Decl, PropertyMembers};
use crate::model::Slack;

pub fn format_case(spec: &CaseSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("case \"{}\" {{\n", spec.name));

    out.push_str("  machine {\n");
    out.push_str("    states {\n");
    for state in &spec.machine.states {
        out.push_str("      ");
        out.push_str(&state.name.value);
        if state.init {
            out.push_str(" init");
        }
        if state.is_final {
            out.push_str(" final");
        }
        out.push_str(";\n");
    }
    out.push_str("    }\n");
    out.push_str("    events {\n");
    for event in &spec.machine.events {
        out.push_str(&format!("      {}\n", event.value));
    }
    out.push_str("    }\n");
    out.push_str("    transitions {\n");
    for t in &spec.machine.transitions {
        out.push_str(&format!(
            "      {} --{}--> {};\n",
            t.from.value, t.event.value, t.to.value
        ));
    }
    out.push_str("    }\n");
    out.push_str("  }\n");

    for property in &spec.properties {
        match &property.members {
            PropertyMembers::Any => {
                out.push_str(&format!("  property {} = any;\n", property.name.value));
            }
            PropertyMembers::Named(members) => {
                let list: String = members
                    .iter()
                    .map(|m| m.value.as_str())
                    .collect::<alloc::vec::Vec<_>>()
                    .join(", ");
                out.push_str(&format!(
                    "  property {} = {{{list}}};\n",
                    property.name.value
                ));
            }
        }
    }

    for decl in &spec.declarations {
        match decl {
            Decl::Observation(o) => {
                out.push_str(&format!(
                    "  observation {} = ({}",
                    o.name.value, o.property.value
                ));
                if let Some(t) = o.timestamp_ms {
                    out.push_str(&format!(", t={t}"));
                }
                let max = match o.max_slack {
                    Slack::Finite(v) => format!("{v}"),
                    Slack::Unbounded => String::from("*"),
                };
                out.push_str(&format!(
                    ", min={}, max={max}, w={});\n",
                    o.min_steps, o.weight.value
                ));
            }
            Decl::Sequence(s) | Decl::Theory(s) => {
                let kw = if matches!(decl, Decl::Sequence(_)) {
                    "sequence"
                } else {
                    "theory"
                };
                let list: String = s
                    .observations
                    .iter()
                    .map(|o| o.value.as_str())
                    .collect::<alloc::vec::Vec<_>>()
                    .join(", ");
                out.push_str(&format!("  {kw} {} = [{list}];\n", s.name.value));
            }
            Decl::Evidence(e) => {
                let list: String = e
                    .sequences
                    .iter()
                    .map(|s| s.value.as_str())
                    .collect::<alloc::vec::Vec<_>>()
                    .join(", ");
                out.push_str(&format!("  evidence {} = {{{list}}};\n", e.name.value));
            }
        }
    }

    out.push_str("}\n");
    out
}
