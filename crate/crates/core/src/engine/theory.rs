//! Checking and ranking investigator theories against the evidence.

use alloc::string::String;
use alloc::vec::Vec;

use super::search::reconstruct;
use super::subsets::{maximal_consistent_subsets, ConsistentSubset};
use super::EngineError;
use crate::model::{
    aggregate_credibility, Backtrace, EvidentialStatement, ModelError, ObservationSequence,
    ReconConfig, StateMachine,
};

/// Outcome of checking one theory. A theory agrees with the evidence when
/// some shared run explains both; the backtraces are those shared runs. On
/// disagreement the diagnosis lists the maximal consistent subsets of
/// evidence plus theory. `complete` drops when the backtrace cap truncated
/// the list.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryVerdict {
    pub agrees: bool,
    pub backtraces: Vec<Backtrace>,
    pub diagnosis: Vec<ConsistentSubset>,
    pub complete: bool,
}

pub fn check_theory(
    machine: &StateMachine,
    es: &EvidentialStatement,
    theory: &ObservationSequence,
    cfg: &ReconConfig,
) -> Result<TheoryVerdict, EngineError> {
    let combined = es.with_sequence(theory.clone()).map_err(|e| match e {
        ModelError::DuplicateSequenceLabel(label) => EngineError::DuplicateSequenceLabel(label),
        other => EngineError::InvalidEvidence(other),
    })?;
    let reconstruction = reconstruct(machine, &combined, cfg)?;
    if reconstruction.backtraces.is_empty() {
        Ok(TheoryVerdict {
            agrees: false,
            backtraces: Vec::new(),
            diagnosis: maximal_consistent_subsets(machine, &combined, cfg)?,
            complete: true,
        })
    } else {
        Ok(TheoryVerdict {
            agrees: true,
            backtraces: reconstruction.backtraces,
            diagnosis: Vec::new(),
            complete: !reconstruction.truncated,
        })
    }
}

/// Checks every theory and orders them: agreeing theories first, preferring
/// more observations, then higher cumulative weight (the aggregator applied
/// to the theory's own observation weights), then label; disagreeing
/// theories follow by label.
pub fn rank_theories(
    machine: &StateMachine,
    es: &EvidentialStatement,
    theories: &[ObservationSequence],
    cfg: &ReconConfig,
) -> Result<Vec<(String, TheoryVerdict)>, EngineError> {
    let mut ranked: Vec<(String, usize, f64, TheoryVerdict)> = Vec::new();
    for theory in theories {
        let verdict = check_theory(machine, es, theory, cfg)?;
        let weights: Vec<_> = theory.observations.iter().map(|o| o.weight).collect();
        let cumulative = aggregate_credibility(&weights, cfg.aggregator);
        ranked.push((
            theory.label.clone(),
            theory.observations.len(),
            cumulative,
            verdict,
        ));
    }
    ranked.sort_by(|a, b| {
        use core::cmp::Ordering;
        match (a.3.agrees, b.3.agrees) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (true, true) => {
                b.1.cmp(&a.1)
                    .then_with(|| b.2.total_cmp(&a.2))
                    .then_with(|| a.0.cmp(&b.0))
            }
            (false, false) => a.0.cmp(&b.0),
        }
    });
    Ok(ranked
        .into_iter()
        .map(|(label, _, _, verdict)| (label, verdict))
        .collect())
}
