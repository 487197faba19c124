//! Shared fixtures: the three-state brake-line model and its evidence.

use hindsight_core::model::{
    Observation, ObservationSequence, PropertyDef, ReconConfig, Slack, StateMachine, Transition,
    Weight,
};

pub fn brake() -> StateMachine {
    StateMachine {
        states: ["ok", "leak", "fail"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        events: ["hold", "wear", "burst"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        transitions: vec![
            Transition::new("ok", "hold", "ok"),
            Transition::new("ok", "wear", "leak"),
            Transition::new("leak", "hold", "leak"),
            Transition::new("leak", "burst", "fail"),
        ],
        initial: ["ok".to_string()].into_iter().collect(),
        final_states: Default::default(),
    }
}

pub fn obs(property: PropertyDef, min: u32, max: Slack, w: f64) -> Observation {
    Observation::new(property, None, min, max, Weight::new(w).unwrap())
}

pub fn p_ok() -> PropertyDef {
    PropertyDef::named("P_ok", ["ok"])
}

pub fn p_leak() -> PropertyDef {
    PropertyDef::named("P_leak", ["leak"])
}

pub fn p_fail() -> PropertyDef {
    PropertyDef::named("P_fail", ["fail"])
}

/// The pressure-sensor story: anything for a while, then failure observed.
pub fn os_sensor() -> ObservationSequence {
    ObservationSequence::new(
        "os_sensor",
        vec![
            obs(PropertyDef::any(), 0, Slack::Unbounded, 0.9),
            obs(p_fail(), 1, Slack::Finite(0), 0.9),
        ],
    )
}

/// A witness claiming the line was fine the whole time.
pub fn os_w() -> ObservationSequence {
    ObservationSequence::new("os_w", vec![obs(p_ok(), 3, Slack::Finite(0), 0.5)])
}

/// Full wear-then-burst theory.
pub fn t1() -> ObservationSequence {
    ObservationSequence::new(
        "T1",
        vec![
            obs(p_ok(), 1, Slack::Unbounded, 1.0),
            obs(p_leak(), 1, Slack::Unbounded, 1.0),
            obs(p_fail(), 1, Slack::Finite(0), 1.0),
        ],
    )
}

/// Impossible theory: failure straight from ok, no leak phase.
pub fn t2() -> ObservationSequence {
    ObservationSequence::new(
        "T2",
        vec![
            obs(p_ok(), 1, Slack::Unbounded, 1.0),
            obs(p_fail(), 1, Slack::Finite(0), 1.0),
        ],
    )
}

/// Shorter agreeing theory: something happened, then failure.
pub fn t_short() -> ObservationSequence {
    ObservationSequence::new(
        "T_short",
        vec![
            obs(PropertyDef::any(), 0, Slack::Unbounded, 1.0),
            obs(p_fail(), 1, Slack::Finite(0), 1.0),
        ],
    )
}

pub fn cfg(max_run_length: usize, max_backtraces: usize) -> ReconConfig {
    ReconConfig {
        max_run_length,
        max_backtraces,
        ..ReconConfig::default()
    }
}
