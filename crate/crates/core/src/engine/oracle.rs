//! Exhaustive verification oracle for the product search.
//!
//! Enumerates every run of the machine by plain forward depth-first search,
//! filters by [`explains`] against every story, and ranks exactly like
//! [`reconstruct`](super::reconstruct). Deliberately naive; the scale guard
//! keeps it honest.

use alloc::vec::Vec;

use super::explain::explains;
use super::{statement_score, validate_inputs, EngineError, Reconstruction};
use crate::model::{Backtrace, EvidentialStatement, Partition, ReconConfig, Run, StateMachine};

const ORACLE_MAX_RUN_LENGTH: usize = 12;

pub fn enumerate_runs_oracle(
    machine: &StateMachine,
    es: &EvidentialStatement,
    cfg: &ReconConfig,
) -> Result<Reconstruction, EngineError> {
    if cfg.max_run_length > ORACLE_MAX_RUN_LENGTH {
        return Err(EngineError::OracleScaleGuard(cfg.max_run_length));
    }
    validate_inputs(machine, es, cfg)?;

    let anchored = cfg.anchor_final && !machine.final_states.is_empty();
    let mut explained: Vec<(Run, Vec<(&str, Partition)>)> = Vec::new();
    for initial in &machine.initial {
        let mut states = alloc::vec![initial.clone()];
        let mut events = Vec::new();
        visit(
            machine,
            es,
            cfg,
            anchored,
            &mut states,
            &mut events,
            &mut explained,
        );
    }

    explained.sort_by(|(a, _), (b, _)| {
        a.states
            .len()
            .cmp(&b.states.len())
            .then_with(|| a.events.cmp(&b.events))
            .then_with(|| a.states.cmp(&b.states))
    });

    let truncated = explained.len() > cfg.max_backtraces;
    explained.truncate(cfg.max_backtraces);

    let score = statement_score(es, cfg);
    let backtraces = explained
        .into_iter()
        .map(|(run, partitions)| Backtrace {
            run,
            partitions: partitions
                .into_iter()
                .map(|(label, p)| (label.into(), p))
                .collect(),
            score,
            included_sequences: es.sequence_labels(),
        })
        .collect();
    Ok(Reconstruction {
        backtraces,
        truncated,
    })
}

fn visit<'a>(
    machine: &StateMachine,
    es: &'a EvidentialStatement,
    cfg: &ReconConfig,
    anchored: bool,
    states: &mut Vec<alloc::string::String>,
    events: &mut Vec<alloc::string::String>,
    explained: &mut Vec<(Run, Vec<(&'a str, Partition)>)>,
) {
    let run = Run {
        states: states.clone(),
        events: events.clone(),
    };
    let anchor_ok = !anchored
        || machine
            .final_states
            .contains(run.states.last().expect("non-empty run"));
    if anchor_ok {
        let witnesses: Option<Vec<(&str, Partition)>> = es
            .sequences()
            .iter()
            .map(|seq| {
                explains(machine, &run, seq)
                    .into_iter()
                    .next()
                    .map(|p| (seq.label.as_str(), p))
            })
            .collect();
        if let Some(partitions) = witnesses {
            explained.push((run, partitions));
        }
    }

    if states.len() == cfg.max_run_length {
        return;
    }
    let current = states.last().expect("non-empty run").clone();
    // Duplicate declarations collapse; the relation is a set.
    let steps: alloc::collections::BTreeSet<(&str, &str)> = machine
        .transitions_from(&current)
        .map(|t| (t.event.as_str(), t.to.as_str()))
        .collect();
    for (event, to) in steps {
        states.push(to.into());
        events.push(event.into());
        visit(machine, es, cfg, anchored, states, events, explained);
        states.pop();
        events.pop();
    }
}
