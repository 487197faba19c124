//! Explanation semantics and the inverse transition computation.
//!
//! [`reconstruct`] enumerates every run of the machine consistent with all
//! witness stories of an evidential statement, ranked from most to least
//! credible. It searches the product of the machine with one segment-tracking
//! automaton per story: the machine is the case-specific part, the tracker
//! construction the generic part. [`enumerate_runs_oracle`] recomputes the
//! same answer by exhaustive forward enumeration and exists solely to
//! cross-check the product search on small instances.

mod explain;
mod oracle;
mod search;
mod subsets;
mod theory;

pub use explain::explains;
pub use oracle::enumerate_runs_oracle;
pub use search::reconstruct;
pub use subsets::{maximal_consistent_subsets, ConsistentSubset};
pub use theory::{check_theory, rank_theories, TheoryVerdict};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{
    machine_is_valid, validate_machine, Backtrace, EvidentialStatement, ModelError, ReconConfig,
    Severity, StateMachine,
};

/// Ranked reconstruction output. `truncated` distinguishes a list cut at the
/// backtrace cap from a genuinely empty explanation set.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub backtraces: Vec<Backtrace>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid evidence: {0}")]
    InvalidEvidence(ModelError),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("oracle scale guard: max_run_length {0} exceeds 12")]
    OracleScaleGuard(usize),

    #[error("subset lattice guard: {0} sequences exceed 16")]
    SubsetLatticeGuard(usize),

    #[error("sequence label `{0}` already exists in the statement")]
    DuplicateSequenceLabel(String),
}

/// Common preconditions: a valid machine, a sane configuration, and
/// chronologically ordered evidence.
pub(crate) fn validate_inputs(
    machine: &StateMachine,
    es: &EvidentialStatement,
    cfg: &ReconConfig,
) -> Result<(), EngineError> {
    if cfg.max_run_length < 1 {
        return Err(EngineError::InvalidConfig(
            "max_run_length must be >= 1".into(),
        ));
    }
    if cfg.max_backtraces < 1 {
        return Err(EngineError::InvalidConfig(
            "max_backtraces must be >= 1".into(),
        ));
    }
    if !machine_is_valid(machine) {
        let first = validate_machine(machine)
            .into_iter()
            .find(|i| i.severity() == Severity::Error)
            .expect("invalid machine has an error finding");
        return Err(EngineError::InvalidMachine(first.to_string()));
    }
    for seq in es.sequences() {
        seq.check_chronology()
            .map_err(EngineError::InvalidEvidence)?;
    }
    Ok(())
}

/// Bounds on the state count of any run explained by every story: the
/// intersection of all per-sequence duration intervals with
/// `[1, max_run_length]`. `None` means no length is feasible.
pub(crate) fn feasible_lengths(
    es: &EvidentialStatement,
    cfg: &ReconConfig,
) -> Option<(usize, usize)> {
    let mut lo: u64 = 1;
    let mut hi: u64 = cfg.max_run_length as u64;
    for seq in es.sequences() {
        let interval = seq.length_interval();
        lo = lo.max(interval.lo);
        if let Some(h) = interval.hi {
            hi = hi.min(h);
        }
    }
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// The score shared by every backtrace of a statement: the aggregate of all
/// observation weights of all included stories.
pub(crate) fn statement_score(es: &EvidentialStatement, cfg: &ReconConfig) -> f64 {
    crate::model::aggregate_credibility(&es.all_weights(), cfg.aggregator)
}

pub(crate) fn assemble_backtrace(
    run: crate::model::Run,
    es: &EvidentialStatement,
    score: f64,
) -> Backtrace {
    let partitions = es
        .sequences()
        .iter()
        .map(|seq| {
            let partition = explain::first_partition(&run.states, seq)
                .expect("emitted run must be explained by every sequence");
            (seq.label.clone(), partition)
        })
        .collect();
    Backtrace {
        run,
        partitions,
        score,
        included_sequences: es.sequence_labels(),
    }
}
