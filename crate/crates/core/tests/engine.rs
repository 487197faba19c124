//! Engine behavior on the brake fixture, pinned value by value.

mod common;

use common::*;
use hindsight_core::engine::{
    check_theory, enumerate_runs_oracle, maximal_consistent_subsets, rank_theories, reconstruct,
    EngineError,
};
use hindsight_core::model::{
    EvidentialStatement, ObservationSequence, Partition, PropertyDef, ReconConfig, Run, Slack,
    StateMachine, Transition,
};

fn es_sensor() -> EvidentialStatement {
    EvidentialStatement::new("es1", vec![os_sensor()]).unwrap()
}

#[test]
fn brake_sensor_evidence_yields_exactly_three_backtraces() {
    let result = reconstruct(&brake(), &es_sensor(), &cfg(4, 1000)).unwrap();
    assert!(!result.truncated);
    assert_eq!(result.backtraces.len(), 3);

    let expected = [
        (
            Run::new(["ok", "leak", "fail"], ["wear", "burst"]),
            vec![0, 2, 3],
        ),
        (
            Run::new(["ok", "ok", "leak", "fail"], ["hold", "wear", "burst"]),
            vec![0, 3, 4],
        ),
        (
            Run::new(["ok", "leak", "leak", "fail"], ["wear", "hold", "burst"]),
            vec![0, 3, 4],
        ),
    ];
    for (bt, (run, boundaries)) in result.backtraces.iter().zip(&expected) {
        assert_eq!(&bt.run, run);
        assert!((bt.score - 0.81).abs() < 1e-9);
        assert_eq!(
            bt.partitions["os_sensor"],
            Partition {
                boundaries: boundaries.clone()
            }
        );
        assert_eq!(
            bt.included_sequences,
            ["os_sensor".to_string()].into_iter().collect()
        );
    }
}

#[test]
fn reconstruct_matches_oracle_on_the_brake_fixture() {
    let config = cfg(4, 1000);
    let engine = reconstruct(&brake(), &es_sensor(), &config).unwrap();
    let oracle = enumerate_runs_oracle(&brake(), &es_sensor(), &config).unwrap();
    assert_eq!(engine, oracle);
}

#[test]
fn empty_evidence_constrains_nothing() {
    let es = EvidentialStatement::empty("es");
    let result = reconstruct(&brake(), &es, &cfg(1, 1000)).unwrap();
    assert!(!result.truncated);
    assert_eq!(result.backtraces.len(), 1);
    assert_eq!(
        result.backtraces[0].run,
        Run::new(["ok"], Vec::<&str>::new())
    );
    assert_eq!(result.backtraces[0].score, 1.0);
    assert!(result.backtraces[0].partitions.is_empty());
}

#[test]
fn length_interval_pruning_forces_empty_result() {
    let es = EvidentialStatement::new(
        "es",
        vec![ObservationSequence::new(
            "long",
            vec![obs(PropertyDef::any(), 5, Slack::Finite(0), 1.0)],
        )],
    )
    .unwrap();
    let result = reconstruct(&brake(), &es, &cfg(4, 1000)).unwrap();
    assert!(result.backtraces.is_empty());
    assert!(!result.truncated);
}

#[test]
fn truncation_is_reported_distinctly_from_empty() {
    let result = reconstruct(&brake(), &es_sensor(), &cfg(4, 2)).unwrap();
    assert!(result.truncated);
    assert_eq!(result.backtraces.len(), 2);
    assert_eq!(
        result.backtraces[0].run,
        Run::new(["ok", "leak", "fail"], ["wear", "burst"])
    );
    let oracle = enumerate_runs_oracle(&brake(), &es_sensor(), &cfg(4, 2)).unwrap();
    assert_eq!(result, oracle);
}

#[test]
fn anchoring_restricts_runs_to_final_states() {
    let mut machine = brake();
    machine.final_states.insert("fail".to_string());
    let es = EvidentialStatement::empty("es");
    let anchored = reconstruct(&machine, &es, &cfg(3, 1000)).unwrap();
    assert!(anchored
        .backtraces
        .iter()
        .all(|bt| bt.run.states.last().unwrap() == "fail"));
    assert_eq!(anchored.backtraces.len(), 1); // [ok, leak, fail]

    let mut unanchored_cfg = cfg(3, 1000);
    unanchored_cfg.anchor_final = false;
    let unanchored = reconstruct(&machine, &es, &unanchored_cfg).unwrap();
    assert!(unanchored.backtraces.len() > 1);
}

#[test]
fn oracle_handles_degenerate_machines() {
    // No transitions at all: a two-step story can never be realized.
    let lone = StateMachine {
        states: ["s0".to_string()].into_iter().collect(),
        events: ["tick".to_string()].into_iter().collect(),
        transitions: vec![],
        initial: ["s0".to_string()].into_iter().collect(),
        final_states: Default::default(),
    };
    let p_s0 = PropertyDef::named("P_s0", ["s0"]);
    let es = EvidentialStatement::new(
        "es",
        vec![ObservationSequence::new(
            "w",
            vec![obs(p_s0.clone(), 2, Slack::Finite(0), 1.0)],
        )],
    )
    .unwrap();
    let result = enumerate_runs_oracle(&lone, &es, &cfg(8, 1000)).unwrap();
    assert!(result.backtraces.is_empty());

    // One self-loop: a three-step story is realized by exactly one run.
    let looper = StateMachine {
        transitions: vec![Transition::new("s0", "tick", "s0")],
        ..lone
    };
    let es = EvidentialStatement::new(
        "es",
        vec![ObservationSequence::new(
            "w",
            vec![obs(p_s0, 3, Slack::Finite(0), 1.0)],
        )],
    )
    .unwrap();
    let result = enumerate_runs_oracle(&looper, &es, &cfg(8, 1000)).unwrap();
    assert_eq!(result.backtraces.len(), 1);
    assert_eq!(
        result.backtraces[0].run,
        Run::new(["s0", "s0", "s0"], ["tick", "tick"])
    );
    assert_eq!(reconstruct(&looper, &es, &cfg(8, 1000)).unwrap(), result);
}

#[test]
fn oracle_refuses_beyond_scale_guard() {
    let result = enumerate_runs_oracle(&brake(), &es_sensor(), &cfg(13, 1000));
    assert_eq!(result, Err(EngineError::OracleScaleGuard(13)));
}

#[test]
fn theory_t1_agrees_with_shortest_wear_then_burst_run() {
    let verdict = check_theory(&brake(), &es_sensor(), &t1(), &cfg(6, 1000)).unwrap();
    assert!(verdict.agrees);
    assert!(verdict.complete);
    assert!(verdict.diagnosis.is_empty());
    assert_eq!(
        verdict.backtraces[0].run,
        Run::new(["ok", "leak", "fail"], ["wear", "burst"])
    );

    // Cross-checked against the oracle over the combined statement.
    let combined = es_sensor().with_sequence(t1()).unwrap();
    let oracle = enumerate_runs_oracle(&brake(), &combined, &cfg(6, 1000)).unwrap();
    assert_eq!(verdict.backtraces, oracle.backtraces);
}

#[test]
fn theory_t2_disagrees_and_is_diagnosed() {
    let verdict = check_theory(&brake(), &es_sensor(), &t2(), &cfg(6, 1000)).unwrap();
    assert!(!verdict.agrees);
    assert!(verdict.backtraces.is_empty());
    // T2 alone is unrealizable (no ok -> fail transition), so the only
    // maximal consistent subset is the sensor story.
    assert_eq!(verdict.diagnosis.len(), 1);
    let subset = &verdict.diagnosis[0];
    assert_eq!(
        subset.included,
        ["os_sensor".to_string()].into_iter().collect()
    );
    assert_eq!(subset.excluded, ["T2".to_string()].into_iter().collect());
    assert!((subset.score - 0.81).abs() < 1e-9);
}

#[test]
fn vacuous_theory_agrees_trivially() {
    let es = EvidentialStatement::empty("es");
    let theory = ObservationSequence::new("T0", vec![]);
    let verdict = check_theory(&brake(), &es, &theory, &cfg(4, 1000)).unwrap();
    // An empty story cannot cover any run; nothing is explained.
    assert!(!verdict.agrees);

    // A single unconstrained observation, by contrast, is vacuously realized.
    let theory = ObservationSequence::new(
        "T0",
        vec![obs(PropertyDef::any(), 0, Slack::Unbounded, 1.0)],
    );
    let verdict = check_theory(&brake(), &es, &theory, &cfg(4, 1000)).unwrap();
    assert!(verdict.agrees);
    assert_eq!(verdict.backtraces[0].run.states, ["ok"]);
}

#[test]
fn duplicate_theory_label_is_rejected() {
    let duplicate = ObservationSequence::new("os_sensor", vec![]);
    let result = check_theory(&brake(), &es_sensor(), &duplicate, &cfg(4, 1000));
    assert_eq!(
        result,
        Err(EngineError::DuplicateSequenceLabel("os_sensor".into()))
    );
}

#[test]
fn theories_rank_by_agreement_length_weight_label() {
    let ranked = rank_theories(
        &brake(),
        &es_sensor(),
        &[t_short(), t2(), t1()],
        &cfg(6, 1000),
    )
    .unwrap();
    let labels: Vec<&str> = ranked.iter().map(|(l, _)| l.as_str()).collect();
    // T1 (3 observations) over T_short (2); disagreeing T2 last.
    assert_eq!(labels, ["T1", "T_short", "T2"]);
    assert!(ranked[0].1.agrees);
    assert!(ranked[1].1.agrees);
    assert!(!ranked[2].1.agrees);
}

#[test]
fn equal_length_theories_rank_by_cumulative_weight() {
    let heavy = ObservationSequence::new(
        "B_heavy",
        vec![
            obs(PropertyDef::any(), 0, Slack::Unbounded, 0.9),
            obs(p_fail(), 1, Slack::Finite(0), 0.9),
        ],
    );
    let light = ObservationSequence::new(
        "A_light",
        vec![
            obs(PropertyDef::any(), 0, Slack::Unbounded, 0.5),
            obs(p_fail(), 1, Slack::Finite(0), 0.5),
        ],
    );
    let ranked = rank_theories(&brake(), &es_sensor(), &[light, heavy], &cfg(6, 1000)).unwrap();
    let labels: Vec<&str> = ranked.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, ["B_heavy", "A_light"]);
}

#[test]
fn jointly_unexplainable_evidence_splits_into_two_subsets() {
    let es = EvidentialStatement::new("es2", vec![os_sensor(), os_w()]).unwrap();
    let subsets = maximal_consistent_subsets(&brake(), &es, &cfg(4, 1000)).unwrap();
    assert_eq!(subsets.len(), 2);

    assert_eq!(
        subsets[0].included,
        ["os_sensor".to_string()].into_iter().collect()
    );
    assert!((subsets[0].score - 0.81).abs() < 1e-9);
    assert_eq!(
        subsets[0].witness.run,
        Run::new(["ok", "leak", "fail"], ["wear", "burst"])
    );

    assert_eq!(
        subsets[1].included,
        ["os_w".to_string()].into_iter().collect()
    );
    assert!((subsets[1].score - 0.5).abs() < 1e-9);
    assert_eq!(
        subsets[1].witness.run,
        Run::new(["ok", "ok", "ok"], ["hold", "hold"])
    );
}

#[test]
fn jointly_explainable_evidence_is_a_single_full_subset() {
    let es = EvidentialStatement::new("es", vec![os_sensor(), t_short()]).unwrap();
    let subsets = maximal_consistent_subsets(&brake(), &es, &cfg(4, 1000)).unwrap();
    assert_eq!(subsets.len(), 1);
    assert_eq!(subsets[0].included.len(), 2);
    assert!(subsets[0].excluded.is_empty());
}

#[test]
fn empty_statement_has_the_empty_subset() {
    let es = EvidentialStatement::empty("es");
    let subsets = maximal_consistent_subsets(&brake(), &es, &cfg(4, 1000)).unwrap();
    assert_eq!(subsets.len(), 1);
    assert!(subsets[0].included.is_empty());
    assert_eq!(subsets[0].score, 1.0);
}

#[test]
fn subset_lattice_guard() {
    let sequences: Vec<ObservationSequence> = (0..17)
        .map(|i| {
            ObservationSequence::new(
                &format!("s{i:02}"),
                vec![obs(PropertyDef::any(), 0, Slack::Unbounded, 1.0)],
            )
        })
        .collect();
    let es = EvidentialStatement::new("es", sequences).unwrap();
    let result = maximal_consistent_subsets(&brake(), &es, &cfg(4, 1000));
    assert_eq!(result, Err(EngineError::SubsetLatticeGuard(17)));
}

#[test]
fn invalid_machine_is_rejected() {
    let mut machine = brake();
    machine.initial.clear();
    let result = reconstruct(&machine, &EvidentialStatement::empty("es"), &cfg(4, 1000));
    assert!(matches!(result, Err(EngineError::InvalidMachine(_))));
}

#[test]
fn reconstruction_is_deterministic() {
    let config = ReconConfig::default();
    let first = reconstruct(&brake(), &es_sensor(), &config).unwrap();
    let second = reconstruct(&brake(), &es_sensor(), &config).unwrap();
    assert_eq!(first, second);
    let report_a = hindsight_core::report::backtrace_report("es1", &first);
    let report_b = hindsight_core::report::backtrace_report("es1", &second);
    assert_eq!(report_a.as_bytes(), report_b.as_bytes());
}
