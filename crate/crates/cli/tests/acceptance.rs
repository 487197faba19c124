//! Acceptance suite: one test per shipping criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hindsight::blackbox::{scan_log, LogLevel, RecordDraft};
use hindsight::logio::{read_log, BlackboxLog};
use hindsight_core::dsl::{format_case, parse_case};
use hindsight_core::engine::{
    enumerate_runs_oracle, maximal_consistent_subsets, rank_theories, reconstruct,
};
use hindsight_core::model::{
    Aggregator, EvidentialStatement, Observation, ObservationSequence, PropertyDef, ReconConfig,
    Run, Slack, StateMachine, Transition, Weight,
};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn hindsight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hindsight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn brake_fixture() -> hindsight_core::dsl::CaseSpec {
    let source = std::fs::read_to_string(fixture_dir().join("brake.fcase")).unwrap();
    parse_case(&source).unwrap()
}

// --- criterion 1: oracle equivalence on random instances ------------------

fn random_instance(rng: &mut ChaCha20Rng) -> (StateMachine, EvidentialStatement, ReconConfig) {
    let n_states = rng.random_range(1..=5usize);
    let n_events = rng.random_range(1..=3usize);
    let state = |i: usize| format!("s{i}");
    let event = |i: usize| format!("e{i}");

    let transitions = (0..rng.random_range(0..=10usize))
        .map(|_| {
            Transition::new(
                &state(rng.random_range(0..n_states)),
                &event(rng.random_range(0..n_events)),
                &state(rng.random_range(0..n_states)),
            )
        })
        .collect();
    let mut initial: BTreeSet<String> = (0..n_states)
        .filter(|_| rng.random_bool(0.4))
        .map(state)
        .collect();
    if initial.is_empty() {
        initial.insert(state(rng.random_range(0..n_states)));
    }
    let final_states: BTreeSet<String> = (0..n_states)
        .filter(|_| rng.random_bool(0.2))
        .map(state)
        .collect();
    let machine = StateMachine {
        states: (0..n_states).map(state).collect(),
        events: (0..n_events).map(event).collect(),
        transitions,
        initial,
        final_states,
    };

    let weights = [0.25, 0.5, 0.75, 1.0];
    let sequences = (0..rng.random_range(0..=2usize))
        .map(|s| {
            let observations = (0..rng.random_range(0..=3usize))
                .map(|_| {
                    let property = if rng.random_bool(0.25) {
                        PropertyDef::any()
                    } else {
                        let members: Vec<String> = (0..n_states)
                            .filter(|_| rng.random_bool(0.5))
                            .map(state)
                            .collect();
                        PropertyDef::named("p", members)
                    };
                    let max_slack = if rng.random_bool(0.3) {
                        Slack::Unbounded
                    } else {
                        Slack::Finite(rng.random_range(0..=3))
                    };
                    Observation::new(
                        property,
                        None,
                        rng.random_range(0..=3),
                        max_slack,
                        Weight::new(weights[rng.random_range(0..weights.len())]).unwrap(),
                    )
                })
                .collect();
            ObservationSequence::new(&format!("os{s}"), observations)
        })
        .collect();
    let es = EvidentialStatement::new("es", sequences).unwrap();

    let caps = [1usize, 4, 40, 10_000];
    let cfg = ReconConfig {
        max_run_length: rng.random_range(1..=8),
        max_backtraces: caps[rng.random_range(0..caps.len())],
        aggregator: Aggregator::Product,
        anchor_final: rng.random_bool(0.5),
    };
    (machine, es, cfg)
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0001);
    let instances = 500;
    for i in 0..instances {
        let (machine, es, cfg) = random_instance(&mut rng);
        let engine = reconstruct(&machine, &es, &cfg).unwrap();
        let oracle = enumerate_runs_oracle(&machine, &es, &cfg).unwrap();
        assert_eq!(
            engine, oracle,
            "instance {i} diverged: machine={machine:?} es={es:?} cfg={cfg:?}"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "oracle equivalence took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 1: reconstruct equals oracle on {instances} random instances \
         ({elapsed:?})"
    );
}

// --- criterion 2: brake fixture backtraces --------------------------------

#[test]
fn criterion_2_brake_backtraces() {
    let spec = brake_fixture();
    let machine = spec.machine();
    let es = spec.statement("es1").unwrap();
    let cfg = ReconConfig {
        max_run_length: 4,
        ..ReconConfig::default()
    };
    let result = reconstruct(&machine, &es, &cfg).unwrap();
    assert!(!result.truncated);
    assert_eq!(result.backtraces.len(), 3);
    let runs: Vec<&Run> = result.backtraces.iter().map(|bt| &bt.run).collect();
    assert_eq!(
        *runs[0],
        Run::new(["ok", "leak", "fail"], ["wear", "burst"])
    );
    assert_eq!(
        *runs[1],
        Run::new(["ok", "ok", "leak", "fail"], ["hold", "wear", "burst"])
    );
    assert_eq!(
        *runs[2],
        Run::new(["ok", "leak", "leak", "fail"], ["wear", "hold", "burst"])
    );
    for bt in &result.backtraces {
        assert!(
            (bt.score - 0.81).abs() <= 1e-9,
            "score {} off 0.81",
            bt.score
        );
    }
    println!("[PASS] criterion 2: brake evidence yields exactly 3 backtraces at 0.81");
}

// --- criterion 3: theory verdicts ------------------------------------------

#[test]
fn criterion_3_theory_verdicts() {
    let case = fixture_dir().join("brake.fcase");
    let case = case.to_str().unwrap();
    let agree = hindsight(&["theory", case, "--evidence", "es1", "--theory", "T1"]);
    assert_eq!(exit_code(&agree), 0);
    let disagree = hindsight(&["theory", case, "--evidence", "es1", "--theory", "T2"]);
    assert_eq!(exit_code(&disagree), 1);

    let spec = brake_fixture();
    let machine = spec.machine();
    let es = spec.statement("es1").unwrap();
    let theories = [spec.theory("T_short").unwrap(), spec.theory("T1").unwrap()];
    let cfg = ReconConfig {
        max_run_length: 6,
        ..ReconConfig::default()
    };
    let ranked = rank_theories(&machine, &es, &theories, &cfg).unwrap();
    let labels: Vec<&str> = ranked.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, ["T1", "T_short"], "longer theory preferred");
    println!("[PASS] criterion 3: T1 agrees (0), T2 refuted (1), T1 ranked above T_short");
}

// --- criterion 4: consistency diagnosis ------------------------------------

#[test]
fn criterion_4_consistency_diagnosis() {
    let spec = brake_fixture();
    let machine = spec.machine();
    let es = spec.statement("es2").unwrap();
    let cfg = ReconConfig {
        max_run_length: 4,
        ..ReconConfig::default()
    };
    let subsets = maximal_consistent_subsets(&machine, &es, &cfg).unwrap();
    assert_eq!(subsets.len(), 2);
    assert_eq!(
        subsets[0].included,
        ["os_sensor".to_string()]
            .into_iter()
            .collect::<BTreeSet<_>>()
    );
    assert!((subsets[0].score - 0.81).abs() <= 1e-9);
    assert_eq!(
        subsets[1].included,
        ["os_w".to_string()].into_iter().collect::<BTreeSet<_>>()
    );
    assert!((subsets[1].score - 0.5).abs() <= 1e-9);
    println!("[PASS] criterion 4: diagnosis splits es2 into os_sensor (0.81) then os_w (0.5)");
}

// --- criterion 5: parser round-trip ----------------------------------------

fn random_case_text(rng: &mut ChaCha20Rng) -> String {
    let n_states = rng.random_range(1..=5usize);
    let n_events = rng.random_range(1..=3usize);
    let n_props = rng.random_range(0..=3usize);
    let n_obs = rng.random_range(0..=6usize);
    let n_seqs = rng.random_range(0..=3usize);
    let n_stmts = rng.random_range(0..=2usize);
    let weights = ["0.1", "0.25", "0.333333333", "0.5", "0.75", "0.9", "1.0"];

    let mut src = String::from("case \"generated\" {\n  machine {\n    states {\n");
    for s in 0..n_states {
        let mut line = format!("      s{s}");
        if s == 0 || rng.random_bool(0.2) {
            line.push_str(" init");
        }
        if rng.random_bool(0.2) {
            line.push_str(" final");
        }
        src.push_str(&line);
        src.push_str(";\n");
    }
    src.push_str("    }\n    events {\n");
    for e in 0..n_events {
        src.push_str(&format!("      e{e}\n"));
    }
    src.push_str("    }\n    transitions {\n");
    for _ in 0..rng.random_range(0..=8usize) {
        src.push_str(&format!(
            "      s{} --e{}--> s{};\n",
            rng.random_range(0..n_states),
            rng.random_range(0..n_events),
            rng.random_range(0..n_states)
        ));
    }
    src.push_str("    }\n  }\n");

    for p in 0..n_props {
        if rng.random_bool(0.25) {
            src.push_str(&format!("  property P{p} = any;\n"));
        } else {
            let count = rng.random_range(1..=n_states);
            let members: Vec<String> = (0..count).map(|i| format!("s{i}")).collect();
            src.push_str(&format!("  property P{p} = {{{}}};\n", members.join(", ")));
        }
    }
    for o in 0..n_obs {
        let property = if n_props > 0 && rng.random_bool(0.7) {
            format!("P{}", rng.random_range(0..n_props))
        } else {
            "any".to_string()
        };
        let t = if rng.random_bool(0.5) {
            format!(", t={}", 1000 * o as u64)
        } else {
            String::new()
        };
        let max = if rng.random_bool(0.3) {
            "*".to_string()
        } else {
            format!("{}", rng.random_range(0..=5u32))
        };
        src.push_str(&format!(
            "  observation o{o} = ({property}{t}, min={}, max={max}, w={});\n",
            rng.random_range(0..=5u32),
            weights[rng.random_range(0..weights.len())]
        ));
    }
    for q in 0..n_seqs {
        let keyword = if rng.random_bool(0.3) {
            "theory"
        } else {
            "sequence"
        };
        let refs: Vec<String> = (0..n_obs)
            .filter(|_| rng.random_bool(0.4))
            .map(|o| format!("o{o}"))
            .collect();
        src.push_str(&format!("  {keyword} q{q} = [{}];\n", refs.join(", ")));
    }
    for t in 0..n_stmts {
        let refs: Vec<String> = (0..n_seqs)
            .filter(|_| rng.random_bool(0.5))
            .map(|q| format!("q{q}"))
            .collect();
        src.push_str(&format!("  evidence es{t} = {{{}}};\n", refs.join(", ")));
    }
    src.push_str("}\n");
    src
}

#[test]
fn criterion_5_parser_round_trip() {
    let mut corpus: Vec<String> = Vec::new();
    let mut fixture_count = 0usize;
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "fcase")
            && path.file_name().is_some_and(|n| n != "malformed.fcase")
        {
            corpus.push(std::fs::read_to_string(path).unwrap());
            fixture_count += 1;
        }
    }
    assert!(fixture_count >= 20, "only {fixture_count} fixture cases");

    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0005);
    let generated = 200;
    for _ in 0..generated {
        corpus.push(random_case_text(&mut rng));
    }

    for (i, source) in corpus.iter().enumerate() {
        let first = parse_case(source).unwrap_or_else(|d| panic!("case {i}: {d:?}"));
        let formatted = format_case(&first);
        let second = parse_case(&formatted).unwrap_or_else(|d| panic!("case {i}: {d:?}"));
        assert_eq!(first, second, "round trip diverged on case {i}");
        assert_eq!(
            format_case(&second),
            formatted,
            "formatting not idempotent on case {i}"
        );
    }
    println!(
        "[PASS] criterion 5: parse.format.parse = parse on {fixture_count} fixtures and \
         {generated} generated cases"
    );
}

// --- criterion 6: blackbox integrity ----------------------------------------

#[test]
fn criterion_6_blackbox_integrity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flip.bblog");
    let mut log = BlackboxLog::create(&path).unwrap();
    for i in 0..10u64 {
        let channel = if i % 2 == 0 {
            "speed_kmh"
        } else {
            "pressure_kpa"
        };
        let level = if i % 3 == 0 {
            LogLevel::Elevated
        } else {
            LogLevel::Normal
        };
        log.append(RecordDraft::new(
            i,
            500 * i,
            channel,
            42.5 + i as f64,
            level,
        ))
        .unwrap();
    }
    let pristine = std::fs::read(&path).unwrap();
    let (_, clean_report) = scan_log(&pristine);
    assert!(clean_report.is_clean());

    // Every byte of every record body, flipped one at a time.
    let mut flips = 0usize;
    let mut offset = 0usize;
    for (line_no, line) in pristine.split(|&b| b == b'\n').enumerate() {
        for i in 0..line.len() {
            let mut corrupted = pristine.clone();
            corrupted[offset + i] ^= 0xff;
            let (_, report) = scan_log(&corrupted);
            assert_eq!(
                report.crc_failures.len(),
                1,
                "flip at line {} byte {i}: {report:?}",
                line_no + 1
            );
            assert_eq!(report.crc_failures[0].line, line_no + 1);
            assert!(!report.torn_trailing_record);
            assert_eq!(report.records_read, 9);
            flips += 1;
        }
        offset += line.len() + 1;
    }

    // Truncation mid final record: torn only, earlier records intact.
    let cut = &pristine[..pristine.len() - 9];
    let (records, report) = scan_log(cut);
    assert_eq!(records.len(), 9);
    assert!(report.torn_trailing_record);
    assert!(report.crc_failures.is_empty());
    assert!(report.sequence_gaps.is_empty());
    assert!(report.timestamp_regressions.is_empty());

    // Sequence-gap and timestamp-regression appends are rejected.
    let mut log = BlackboxLog::open_append(&path).unwrap();
    assert!(log
        .append(RecordDraft::new(
            11,
            6000,
            "speed_kmh",
            1.0,
            LogLevel::Normal
        ))
        .is_err());
    assert!(log
        .append(RecordDraft::new(
            10,
            100,
            "speed_kmh",
            1.0,
            LogLevel::Normal
        ))
        .is_err());
    let (_, still_clean) = read_log(&path).unwrap();
    assert!(still_clean.is_clean());

    println!("[PASS] criterion 6: {flips} byte flips each yield one crc failure; torn tail and bad appends handled");
}

// --- criterion 7: closed loop -----------------------------------------------

#[test]
fn criterion_7_closed_loop() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sim.bblog");
    let truth_path = dir.path().join("truth.txt");
    let fragment_path = dir.path().join("fragment.fcase");
    let case_path = dir.path().join("loop_case.fcase");
    let fixtures = fixture_dir();

    let sim = hindsight(&[
        "simulate",
        fixtures.join("brake.fcase").to_str().unwrap(),
        "--schedule",
        fixtures.join("loop.sched").to_str().unwrap(),
        "--out",
        log.to_str().unwrap(),
        "--truth",
        truth_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&sim), 0);
    let truth = std::fs::read_to_string(&truth_path).unwrap();
    assert_eq!(truth.trim_end(), "ok -wear-> leak -burst-> fail");

    let ingest = hindsight(&[
        "ingest",
        log.to_str().unwrap(),
        "--rules",
        fixtures.join("brake.rules").to_str().unwrap(),
        "--out",
        fragment_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&ingest), 0);

    // Compose the investigator's case: the machine, the property bindings,
    // the ingested fragment, and a padded story piecing the derived
    // observations together.
    let fragment = std::fs::read_to_string(&fragment_path).unwrap();
    let mut case = String::from(
        "case \"brake_loop\" {\n  machine {\n    states {\n      ok init;\n      leak;\n      fail;\n    }\n    events {\n      hold\n      wear\n      burst\n    }\n    transitions {\n      ok --hold--> ok;\n      ok --wear--> leak;\n      leak --hold--> leak;\n      leak --burst--> fail;\n    }\n  }\n  property P_ok = {ok};\n  property P_fail = {fail};\n",
    );
    for line in fragment.lines() {
        case.push_str("  ");
        case.push_str(line);
        case.push('\n');
    }
    case.push_str(
        "  observation pad = (any, min=0, max=*, w=1.0);\n  sequence pieced_story = [P_ok_0, pad, P_fail_0];\n  evidence es_loop = {pieced_story};\n}\n",
    );
    std::fs::write(&case_path, case).unwrap();

    let recon = hindsight(&[
        "reconstruct",
        case_path.to_str().unwrap(),
        "--evidence",
        "es_loop",
        "--max-len",
        "8",
        "--oracle",
    ]);
    assert_eq!(exit_code(&recon), 0);
    let stdout = std::str::from_utf8(&recon.stdout).unwrap();
    let top_run = stdout
        .lines()
        .find_map(|l| l.trim_start().strip_prefix("run: "))
        .expect("a top-ranked run");
    assert_eq!(top_run, truth.trim_end(), "top backtrace must match truth");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 5, "closed loop took {elapsed:?}");
    println!(
        "[PASS] criterion 7: simulate -> ingest -> reconstruct recovers {top_run} ({elapsed:?})"
    );
}

// --- criterion 8: CLI determinism -------------------------------------------

#[test]
fn criterion_8_cli_determinism() {
    let fixtures = fixture_dir();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("det.bblog");
    let truth = dir.path().join("det_truth.txt");
    let fragment = dir.path().join("det_fragment.fcase");
    let brake = fixtures.join("brake.fcase");
    let brake = brake.to_str().unwrap();

    let mut invocations: Vec<Vec<String>> = Vec::new();
    for entry in std::fs::read_dir(&fixtures).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "fcase") {
            let p = path.to_str().unwrap().to_string();
            invocations.push(vec!["check".into(), p.clone()]);
            if path.file_name().is_some_and(|n| n != "malformed.fcase") {
                invocations.push(vec!["fmt".into(), p, "--stdout".into()]);
            }
        }
    }
    for args in [
        vec!["reconstruct", brake, "--evidence", "es1", "--max-len", "12"],
        vec!["reconstruct", brake, "--evidence", "es1"],
        vec!["reconstruct", brake, "--evidence", "es2", "--max-len", "6"],
        vec!["theory", brake, "--evidence", "es1", "--theory", "T1"],
        vec!["theory", brake, "--evidence", "es1", "--theory", "T2"],
        vec![
            "theory",
            brake,
            "--evidence",
            "es1",
            "--theory",
            "T1",
            "--theory",
            "T_short",
            "--theory",
            "T2",
        ],
    ] {
        invocations.push(args.into_iter().map(String::from).collect());
    }
    let sim_args: Vec<String> = [
        "simulate",
        brake,
        "--schedule",
        fixtures.join("brake.sched").to_str().unwrap(),
        "--out",
        log.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let ingest_args: Vec<String> = [
        "ingest",
        log.to_str().unwrap(),
        "--rules",
        fixtures.join("brake.rules").to_str().unwrap(),
        "--out",
        fragment.to_str().unwrap(),
    ]
    .into_iter()
    .map(String::from)
    .collect();

    let mut checked = 0usize;
    let mut run_pair = |args: &[String], produced: &[&Path]| {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = hindsight(&argv);
        let first_files: Vec<Vec<u8>> =
            produced.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let second = hindsight(&argv);
        let second_files: Vec<Vec<u8>> =
            produced.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first.status.code(), second.status.code(), "{argv:?}");
        assert_eq!(first.stdout, second.stdout, "{argv:?}");
        assert_eq!(first.stderr, second.stderr, "{argv:?}");
        assert_eq!(first_files, second_files, "{argv:?}");
        checked += 1;
    };

    for args in &invocations {
        run_pair(args, &[]);
    }
    run_pair(&sim_args, &[&log, &truth]);
    let verify_args = vec!["verify".to_string(), log.to_str().unwrap().to_string()];
    run_pair(&verify_args, &[]);
    run_pair(&ingest_args, &[&fragment]);

    println!("[PASS] criterion 8: {checked} invocations byte-identical across repeated runs");
}
