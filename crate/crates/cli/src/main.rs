//! Investigator command line: validate case files, reconstruct backtraces,
//! check theories, verify and ingest blackbox logs, run simulations, and
//! format cases.
//!
//! Exit codes: 0 success (or theory agrees), 1 clean negative findings (no
//! explanation, theory disagrees, case or integrity findings), 2 usage,
//! validation, or internal errors. Reports go to standard output,
//! diagnostics to standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hindsight::blackbox::{derive_observations, parse_rules, render_fragment, RecordDraft};
use hindsight::logio::{read_log, BlackboxLog};
use hindsight::sim::{parse_schedule, render_truth, simulate};
use hindsight_core::dsl::{check_case, format_case, has_errors, parse_case, CaseSpec, Diagnostic};
use hindsight_core::engine::{check_theory, enumerate_runs_oracle, rank_theories, reconstruct};
use hindsight_core::model::{Aggregator, ReconConfig, Severity};
use hindsight_core::report;

#[derive(Parser)]
#[command(
    name = "hindsight",
    version,
    about = "Forensic case reconstruction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a case file.
    Check { case: PathBuf },
    /// Compute ranked backtraces for an evidential statement.
    Reconstruct {
        case: PathBuf,
        #[command(flatten)]
        recon: ReconArgs,
        /// Cross-check against the exhaustive oracle (max-len 12 or less).
        #[arg(long)]
        oracle: bool,
    },
    /// Check one theory (or rank several) against an evidential statement.
    Theory {
        case: PathBuf,
        #[command(flatten)]
        recon: ReconArgs,
        /// Theory label; repeat to rank several.
        #[arg(long = "theory", required = true)]
        theories: Vec<String>,
    },
    /// Verify the integrity of a blackbox log.
    Verify { log: PathBuf },
    /// Derive evidence from a blackbox log via threshold rules.
    Ingest {
        log: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Output case-fragment file.
        #[arg(long)]
        out: PathBuf,
        /// Statement label for the derived evidence.
        #[arg(long, default_value = "ingested")]
        label: String,
        /// Proceed even if the log has integrity findings.
        #[arg(long)]
        accept_findings: bool,
    },
    /// Replay a schedule through the case machine, writing a blackbox log
    /// and the ground-truth run.
    Simulate {
        case: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Output blackbox log.
        #[arg(long)]
        out: PathBuf,
        /// Output ground-truth run file.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Canonically format a case file in place (or to standard output).
    Fmt {
        case: PathBuf,
        #[arg(long)]
        stdout: bool,
    },
}

#[derive(Args)]
struct ReconArgs {
    /// Evidential statement label.
    #[arg(long)]
    evidence: String,
    /// Run length cap in states.
    #[arg(long = "max-len", default_value_t = 64)]
    max_len: usize,
    /// Backtrace list cap.
    #[arg(long = "max-traces", default_value_t = 1000)]
    max_traces: usize,
    #[arg(long, value_enum, default_value_t = AggregatorArg::Product)]
    aggregator: AggregatorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregatorArg {
    Product,
    Min,
    Mean,
}

impl ReconArgs {
    fn config(&self) -> ReconConfig {
        ReconConfig {
            max_run_length: self.max_len,
            max_backtraces: self.max_traces,
            aggregator: match self.aggregator {
                AggregatorArg::Product => Aggregator::Product,
                AggregatorArg::Min => Aggregator::Minimum,
                AggregatorArg::Mean => Aggregator::Mean,
            },
            anchor_final: true,
        }
    }
}

/// Clean negative findings exit as 1, never conflated with errors (2).
enum Outcome {
    Success,
    Findings,
}

type CmdResult = Result<Outcome, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { case } => cmd_check(&case),
        Command::Reconstruct {
            case,
            recon,
            oracle,
        } => cmd_reconstruct(&case, &recon, oracle),
        Command::Theory {
            case,
            recon,
            theories,
        } => cmd_theory(&case, &recon, &theories),
        Command::Verify { log } => cmd_verify(&log),
        Command::Ingest {
            log,
            rules,
            out,
            label,
            accept_findings,
        } => cmd_ingest(&log, &rules, &out, &label, accept_findings),
        Command::Simulate {
            case,
            schedule,
            out,
            truth,
        } => cmd_simulate(&case, &schedule, &out, &truth),
        Command::Fmt { case, stdout } => cmd_fmt(&case, stdout),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Findings) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for diagnostic in diagnostics {
        eprintln!("{diagnostic}");
    }
}

/// Loads a case for commands that operate on it; parse or check errors are
/// validation failures here, not findings.
fn load_case(path: &Path) -> Result<CaseSpec, String> {
    let source = read_text(path)?;
    let spec = parse_case(&source).map_err(|diagnostics| {
        print_diagnostics(&diagnostics);
        format!("{} does not parse", path.display())
    })?;
    let diagnostics = check_case(&spec);
    print_diagnostics(&diagnostics);
    if has_errors(&diagnostics) {
        return Err(format!("{} has check errors", path.display()));
    }
    Ok(spec)
}

fn cmd_check(path: &Path) -> CmdResult {
    let source = read_text(path)?;
    let spec = match parse_case(&source) {
        Ok(spec) => spec,
        Err(diagnostics) => {
            print_diagnostics(&diagnostics);
            return Ok(Outcome::Findings);
        }
    };
    let diagnostics = check_case(&spec);
    print_diagnostics(&diagnostics);
    if has_errors(&diagnostics) {
        return Ok(Outcome::Findings);
    }
    println!(
        "ok: case \"{}\" (states={} events={} transitions={} properties={} observations={} sequences={} theories={} statements={})",
        spec.name,
        spec.machine.states.len(),
        spec.machine.events.len(),
        spec.machine.transitions.len(),
        spec.properties.len(),
        spec.observations().count(),
        spec.sequence_decls().count(),
        spec.theory_decls().count(),
        spec.statement_decls().count(),
    );
    Ok(Outcome::Success)
}

fn cmd_reconstruct(path: &Path, recon: &ReconArgs, oracle: bool) -> CmdResult {
    let spec = load_case(path)?;
    let machine = spec.machine();
    let es = spec.statement(&recon.evidence).map_err(|e| e.to_string())?;
    let cfg = recon.config();
    let result = reconstruct(&machine, &es, &cfg).map_err(|e| e.to_string())?;
    if oracle {
        let reference = enumerate_runs_oracle(&machine, &es, &cfg).map_err(|e| e.to_string())?;
        if reference != result {
            return Err(
                "oracle mismatch: reconstruction disagrees with exhaustive enumeration".into(),
            );
        }
    }
    print!("{}", report::backtrace_report(&recon.evidence, &result));
    if result.backtraces.is_empty() {
        Ok(Outcome::Findings)
    } else {
        Ok(Outcome::Success)
    }
}

fn cmd_theory(path: &Path, recon: &ReconArgs, theories: &[String]) -> CmdResult {
    let spec = load_case(path)?;
    let machine = spec.machine();
    let es = spec.statement(&recon.evidence).map_err(|e| e.to_string())?;
    let cfg = recon.config();
    if let [label] = theories {
        let theory = spec.theory(label).map_err(|e| e.to_string())?;
        let verdict = check_theory(&machine, &es, &theory, &cfg).map_err(|e| e.to_string())?;
        print!("{}", report::theory_report(label, &verdict));
        return Ok(if verdict.agrees {
            Outcome::Success
        } else {
            Outcome::Findings
        });
    }
    let lowered: Vec<_> = theories
        .iter()
        .map(|label| spec.theory(label))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ranked = rank_theories(&machine, &es, &lowered, &cfg).map_err(|e| e.to_string())?;
    print!("{}", report::ranking_report(&ranked));
    if ranked.iter().any(|(_, verdict)| verdict.agrees) {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Findings)
    }
}

fn cmd_verify(path: &Path) -> CmdResult {
    let (_, integrity) = read_log(path).map_err(|e| e.to_string())?;
    println!("{integrity}");
    if integrity.is_clean() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Findings)
    }
}

fn cmd_ingest(
    log: &Path,
    rules_path: &Path,
    out: &Path,
    label: &str,
    accept_findings: bool,
) -> CmdResult {
    let (records, integrity) = read_log(log).map_err(|e| e.to_string())?;
    if !integrity.is_clean() {
        eprintln!("{integrity}");
        if !accept_findings {
            eprintln!("refusing to ingest; pass --accept-findings to proceed");
            return Ok(Outcome::Findings);
        }
    }
    let rules = parse_rules(&read_text(rules_path)?).map_err(|e| e.to_string())?;
    let statement = derive_observations(&records, &rules, label).map_err(|e| e.to_string())?;
    let fragment = render_fragment(&log.display().to_string(), &statement);
    fs::write(out, fragment).map_err(|e| format!("cannot write {}: {e}", out.display()))?;

    println!("records: {}", records.len());
    println!("rules: {}", rules.len());
    for seq in statement.sequences() {
        let n = seq.observations.len();
        if n == 0 {
            println!("sequence {}: 0 observations (rule never fired)", seq.label);
        } else if n == 1 {
            println!("sequence {}: 1 observation", seq.label);
        } else {
            println!("sequence {}: {n} observations", seq.label);
        }
    }
    println!("wrote {}", out.display());
    Ok(Outcome::Success)
}

fn cmd_simulate(case: &Path, schedule_path: &Path, out: &Path, truth_path: &Path) -> CmdResult {
    let spec = load_case(case)?;
    let machine = spec.machine();
    let schedule_spec = parse_schedule(&read_text(schedule_path)?).map_err(|e| e.to_string())?;
    let (truth, records) = simulate(&machine, &schedule_spec.schedule, schedule_spec.t_end_ms)
        .map_err(|e| e.to_string())?;

    let mut log = BlackboxLog::create(out).map_err(|e| e.to_string())?;
    for record in &records {
        let draft = RecordDraft::new(
            record.seq,
            record.t_ms,
            &record.channel,
            record.value,
            record.level,
        );
        log.append(draft).map_err(|e| e.to_string())?;
    }
    fs::write(truth_path, render_truth(&truth))
        .map_err(|e| format!("cannot write {}: {e}", truth_path.display()))?;

    println!("truth: {truth}");
    println!("samples: {}", records.len());
    println!("wrote {}", out.display());
    println!("wrote {}", truth_path.display());
    Ok(Outcome::Success)
}

fn cmd_fmt(path: &Path, to_stdout: bool) -> CmdResult {
    let source = read_text(path)?;
    let spec = match parse_case(&source) {
        Ok(spec) => spec,
        Err(diagnostics) => {
            print_diagnostics(&diagnostics);
            return Ok(Outcome::Findings);
        }
    };
    let diagnostics = check_case(&spec);
    if has_errors(&diagnostics) {
        print_diagnostics(&diagnostics);
        return Ok(Outcome::Findings);
    }
    print_diagnostics(
        &diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
            .cloned()
            .collect::<Vec<_>>(),
    );
    let formatted = format_case(&spec);
    if to_stdout {
        print!("{formatted}");
    } else {
        fs::write(path, formatted).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(Outcome::Success)
}
