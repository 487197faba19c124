//! Deterministic scenario replay: a scheduled event sequence driven through
//! a machine, emitting both the ground-truth run and a synthetic blackbox
//! log, so end-to-end fixtures have known answers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::blackbox::{
    is_identifier, seal, BlackboxRecord, LogLevel, RecordDraft, DEFAULT_PRECISION,
};
use hindsight_core::model::{machine_is_valid, Run, StateMachine};

/// A replay script: timed events, per-state sensor emissions, and the
/// sampling period.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `(t_ms, event)` pairs, strictly increasing in time.
    pub entries: Vec<(u64, String)>,
    /// Channels emitted each sample tick while in a state.
    pub sensor_map: BTreeMap<String, Vec<(String, f64)>>,
    pub sample_period_ms: u64,
}

/// A parsed `.sched` file: the schedule plus the sampling horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub schedule: Schedule,
    pub t_end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("simulator requires exactly one initial state, found {0}")]
    MultipleInitialStates(usize),

    #[error("sample period must be positive")]
    ZeroPeriod,

    #[error("schedule times must be strictly increasing at t={0}")]
    NonIncreasingSchedule(u64),

    #[error("schedule references undeclared event `{0}`")]
    UnknownEvent(String),

    #[error("sensor map references undeclared state `{0}`")]
    UnknownState(String),

    #[error("channel `{0}` is not a valid identifier")]
    BadChannel(String),

    #[error("scheduled event `{event}` at t={t_ms} is not enabled from `{state}`")]
    DisabledEvent {
        t_ms: u64,
        event: String,
        state: String,
    },

    #[error("scheduled event `{event}` at t={t_ms} is ambiguous from `{state}`")]
    AmbiguousEvent {
        t_ms: u64,
        event: String,
        state: String,
    },
}

/// Replays the schedule from the single initial state. Events take effect at
/// their scheduled time; the sample at exactly that time reflects the
/// post-transition state. Samples are emitted every period from t=0 through
/// `t_end_ms`, one record per configured channel of the current state, with
/// valid sequence numbers and checksums throughout.
pub fn simulate(
    machine: &StateMachine,
    schedule: &Schedule,
    t_end_ms: u64,
) -> Result<(Run, Vec<BlackboxRecord>), SimError> {
    if !machine_is_valid(machine) {
        let issue = hindsight_core::model::validate_machine(machine)
            .into_iter()
            .find(|i| i.severity() == hindsight_core::model::Severity::Error)
            .expect("invalid machine has an error finding");
        return Err(SimError::InvalidMachine(issue.to_string()));
    }
    if machine.initial.len() != 1 {
        return Err(SimError::MultipleInitialStates(machine.initial.len()));
    }
    if schedule.sample_period_ms == 0 {
        return Err(SimError::ZeroPeriod);
    }
    let mut last_t = None;
    for (t, event) in &schedule.entries {
        if last_t.is_some_and(|prev| *t <= prev) {
            return Err(SimError::NonIncreasingSchedule(*t));
        }
        last_t = Some(*t);
        if !machine.events.contains(event) {
            return Err(SimError::UnknownEvent(event.clone()));
        }
    }
    for (state, channels) in &schedule.sensor_map {
        if !machine.states.contains(state) {
            return Err(SimError::UnknownState(state.clone()));
        }
        for (channel, _) in channels {
            if !is_identifier(channel) {
                return Err(SimError::BadChannel(channel.clone()));
            }
        }
    }

    let mut current = machine
        .initial
        .iter()
        .next()
        .expect("validated non-empty initial")
        .clone();
    let mut states = vec![current.clone()];
    let mut events = Vec::new();
    let mut records = Vec::new();
    let mut seq = 0u64;
    let mut next_entry = 0usize;

    let apply = |t_ms: u64,
                 event: &str,
                 current: &mut String,
                 states: &mut Vec<String>,
                 events: &mut Vec<String>|
     -> Result<(), SimError> {
        let targets: BTreeSet<&str> = machine
            .transitions_from(current)
            .filter(|t| t.event == event)
            .map(|t| t.to.as_str())
            .collect();
        match targets.len() {
            0 => Err(SimError::DisabledEvent {
                t_ms,
                event: event.to_string(),
                state: current.clone(),
            }),
            1 => {
                let target = targets.into_iter().next().expect("one target");
                *current = target.to_string();
                states.push(current.clone());
                events.push(event.to_string());
                Ok(())
            }
            _ => Err(SimError::AmbiguousEvent {
                t_ms,
                event: event.to_string(),
                state: current.clone(),
            }),
        }
    };

    let mut t = 0u64;
    loop {
        while next_entry < schedule.entries.len() && schedule.entries[next_entry].0 <= t {
            let (entry_t, event) = schedule.entries[next_entry].clone();
            apply(entry_t, &event, &mut current, &mut states, &mut events)?;
            next_entry += 1;
        }
        if let Some(channels) = schedule.sensor_map.get(&current) {
            for (channel, value) in channels {
                let draft = RecordDraft::new(seq, t, channel, *value, LogLevel::Normal);
                records.push(seal(&draft, DEFAULT_PRECISION).0);
                seq += 1;
            }
        }
        match t.checked_add(schedule.sample_period_ms) {
            Some(next) if next <= t_end_ms => t = next,
            _ => break,
        }
    }
    // Entries beyond the sampling horizon still shape the truth run.
    while next_entry < schedule.entries.len() {
        let (entry_t, event) = schedule.entries[next_entry].clone();
        apply(entry_t, &event, &mut current, &mut states, &mut events)?;
        next_entry += 1;
    }

    Ok((Run { states, events }, records))
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("schedule line {line}: {message}")]
pub struct ScheduleParseError {
    pub line: usize,
    pub message: String,
}

/// Parses a `.sched` file. Statements, one per line, each ending with `;`:
/// `period <ms>;`, `end <ms>;`, `sensor <state> <channel>=<value>;`,
/// `at <t_ms> fire <event>;`. `//` comments and blank lines are skipped.
pub fn parse_schedule(text: &str) -> Result<ScheduleSpec, ScheduleParseError> {
    let mut period: Option<u64> = None;
    let mut end: Option<u64> = None;
    let mut entries: Vec<(u64, String)> = Vec::new();
    let mut sensor_map: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let err = |message: String| ScheduleParseError {
            line: line_no,
            message,
        };
        let line = raw_line.split("//").next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let Some(statement) = line.strip_suffix(';') else {
            return Err(err(format!("missing `;` after `{line}`")));
        };
        let tokens: Vec<&str> = statement.split_whitespace().collect();
        match tokens.as_slice() {
            ["period", ms] => {
                let value = ms
                    .parse::<u64>()
                    .map_err(|_| err(format!("malformed period `{ms}`")))?;
                if period.replace(value).is_some() {
                    return Err(err("duplicate `period`".into()));
                }
            }
            ["end", ms] => {
                let value = ms
                    .parse::<u64>()
                    .map_err(|_| err(format!("malformed end time `{ms}`")))?;
                if end.replace(value).is_some() {
                    return Err(err("duplicate `end`".into()));
                }
            }
            ["sensor", state, emission] => {
                let (channel, value) = emission
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `channel=value`, got `{emission}`")))?;
                let value: f64 = value
                    .parse()
                    .map_err(|_| err(format!("malformed sensor value `{value}`")))?;
                sensor_map
                    .entry(state.to_string())
                    .or_default()
                    .push((channel.to_string(), value));
            }
            ["at", t_ms, "fire", event] => {
                let t = t_ms
                    .parse::<u64>()
                    .map_err(|_| err(format!("malformed time `{t_ms}`")))?;
                entries.push((t, event.to_string()));
            }
            _ => return Err(err(format!("unrecognized statement `{statement}`"))),
        }
    }

    let period = period.ok_or(ScheduleParseError {
        line: 0,
        message: "missing `period` statement".into(),
    })?;
    let t_end_ms = end.ok_or(ScheduleParseError {
        line: 0,
        message: "missing `end` statement".into(),
    })?;
    Ok(ScheduleSpec {
        schedule: Schedule {
            entries,
            sensor_map,
            sample_period_ms: period,
        },
        t_end_ms,
    })
}

/// Renders a truth run for the `--truth` output file.
pub fn render_truth(run: &Run) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{run}");
    out
}
