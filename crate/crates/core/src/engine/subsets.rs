//! Diagnosis of jointly unexplainable evidence.
//!
//! When no run satisfies every witness story at once, some story is wrong:
//! a lying witness, a faulty sensor, or a component that does not behave as
//! specified. The diagnosis lists every subset-maximal set of stories that
//! still admits an explanation, so the excluded stories are the candidate
//! false accounts.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::search::reconstruct;
use super::{statement_score, validate_inputs, EngineError};
use crate::model::{Backtrace, EvidentialStatement, ReconConfig, StateMachine};

const LATTICE_GUARD: usize = 16;

/// One maximal consistent subset of the statement's stories.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentSubset {
    pub included: BTreeSet<String>,
    pub excluded: BTreeSet<String>,
    /// Aggregate credibility of the included stories' observations.
    pub score: f64,
    /// Top-ranked backtrace explaining the included stories.
    pub witness: Backtrace,
}

/// All subset-maximal sets of sequences admitting at least one backtrace,
/// ranked by (size descending, score descending, label set ascending).
pub fn maximal_consistent_subsets(
    machine: &StateMachine,
    es: &EvidentialStatement,
    cfg: &ReconConfig,
) -> Result<Vec<ConsistentSubset>, EngineError> {
    let labels: Vec<String> = es.sequence_labels().into_iter().collect();
    if labels.len() > LATTICE_GUARD {
        return Err(EngineError::SubsetLatticeGuard(labels.len()));
    }
    validate_inputs(machine, es, cfg)?;

    let witness_cfg = ReconConfig {
        max_backtraces: 1,
        ..cfg.clone()
    };
    let mut maximal_masks: Vec<u32> = Vec::new();
    let mut results = Vec::new();
    for size in (0..=labels.len()).rev() {
        for mask in 0u32..1 << labels.len() {
            if mask.count_ones() as usize != size {
                continue;
            }
            if maximal_masks.iter().any(|m| mask & m == mask) {
                continue;
            }
            let included: BTreeSet<String> = labels
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.clone())
                .collect();
            let subset = es.restricted_to(&included);
            let reconstruction = reconstruct(machine, &subset, &witness_cfg)?;
            let Some(witness) = reconstruction.backtraces.into_iter().next() else {
                continue;
            };
            maximal_masks.push(mask);
            let excluded = labels
                .iter()
                .filter(|l| !included.contains(*l))
                .cloned()
                .collect();
            results.push(ConsistentSubset {
                score: statement_score(&subset, cfg),
                included,
                excluded,
                witness,
            });
        }
    }

    results.sort_by(|a, b| {
        b.included
            .len()
            .cmp(&a.included.len())
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| a.included.cmp(&b.included))
    });
    Ok(results)
}
