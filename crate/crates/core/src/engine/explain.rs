//! Matching one witness story onto one run.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{Observation, ObservationSequence, Partition, Run, Slack, StateMachine};

/// All partitions of the run's state list into `|os|` ordered segments where
/// segment `i` satisfies observation `i`'s property at every state and has a
/// length within its duration bounds. Segments cover the run exactly; empty
/// segments arise only from `min = 0`. Partitions come back in lexicographic
/// order of their boundary indices; an empty result means the story does not
/// explain the run.
pub fn explains(machine: &StateMachine, run: &Run, os: &ObservationSequence) -> Vec<Partition> {
    debug_assert!(run.validate(machine, false).is_ok());
    let mut results = Vec::new();
    let mut boundaries = Vec::with_capacity(os.observations.len() + 1);
    boundaries.push(0usize);
    collect(
        &run.states,
        &os.observations,
        0,
        &mut boundaries,
        &mut results,
    );
    results
}

fn collect(
    states: &[String],
    observations: &[Observation],
    start: usize,
    boundaries: &mut Vec<usize>,
    results: &mut Vec<Partition>,
) {
    let Some(obs) = observations.first() else {
        if start == states.len() {
            results.push(Partition {
                boundaries: boundaries.clone(),
            });
        }
        return;
    };
    for end in segment_ends(states, obs, start) {
        boundaries.push(end);
        collect(states, &observations[1..], end, boundaries, results);
        boundaries.pop();
    }
}

/// Lexicographically least witness partition, if any.
pub(crate) fn first_partition(states: &[String], os: &ObservationSequence) -> Option<Partition> {
    let mut boundaries = Vec::with_capacity(os.observations.len() + 1);
    boundaries.push(0usize);
    if first(states, &os.observations, 0, &mut boundaries) {
        Some(Partition { boundaries })
    } else {
        None
    }
}

fn first(
    states: &[String],
    observations: &[Observation],
    start: usize,
    boundaries: &mut Vec<usize>,
) -> bool {
    let Some(obs) = observations.first() else {
        return start == states.len();
    };
    for end in segment_ends(states, obs, start) {
        boundaries.push(end);
        if first(states, &observations[1..], end, boundaries) {
            return true;
        }
        boundaries.pop();
    }
    false
}

/// Admissible segment ends for one observation starting at `start`, in
/// ascending order: every prefix of property-satisfying states whose length
/// is within the duration bounds.
fn segment_ends(
    states: &[String],
    obs: &Observation,
    start: usize,
) -> core::ops::RangeInclusive<usize> {
    let min_end = start + obs.min_steps as usize;
    let max_end = match obs.max_slack {
        Slack::Finite(max) => min_end.saturating_add(max as usize),
        Slack::Unbounded => usize::MAX,
    }
    .min(states.len());
    let satisfied = states[start..]
        .iter()
        .take_while(|q| obs.property.holds_at(q))
        .count();
    let limit = max_end.min(start + satisfied);
    min_end..=limit
}
