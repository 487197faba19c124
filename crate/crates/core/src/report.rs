//! Stable text reports for reconstruction results.
//!
//! Field order and number formatting are fixed (scores always carry nine
//! fractional digits) so reports can be golden-tested and diffed across
//! investigations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{ConsistentSubset, Reconstruction, TheoryVerdict};
use crate::model::Backtrace;

fn push_backtrace(out: &mut String, rank: usize, bt: &Backtrace) {
    out.push_str(&format!(
        "{rank}. score={:.9} states={}\n",
        bt.score,
        bt.run.states.len()
    ));
    out.push_str(&format!("   run: {}\n", bt.run));
    for (label, partition) in &bt.partitions {
        out.push_str(&format!("   {label}: {partition}\n"));
    }
}

/// The ranked backtrace listing for one reconstruction.
pub fn backtrace_report(evidence_label: &str, reconstruction: &Reconstruction) -> String {
    let mut out = String::new();
    out.push_str(&format!("evidence: {evidence_label}\n"));
    out.push_str(&format!(
        "backtraces: {}\n",
        reconstruction.backtraces.len()
    ));
    out.push_str(&format!("truncated: {}\n", reconstruction.truncated));
    for (i, bt) in reconstruction.backtraces.iter().enumerate() {
        out.push('\n');
        push_backtrace(&mut out, i + 1, bt);
    }
    out
}

fn push_subsets(out: &mut String, subsets: &[ConsistentSubset]) {
    out.push_str(&format!("maximal consistent subsets: {}\n", subsets.len()));
    for (i, subset) in subsets.iter().enumerate() {
        out.push('\n');
        out.push_str(&format!("{}. score={:.9}\n", i + 1, subset.score));
        out.push_str(&format!("   included: {{{}}}\n", join(&subset.included)));
        out.push_str(&format!("   excluded: {{{}}}\n", join(&subset.excluded)));
        out.push_str(&format!("   witness: {}\n", subset.witness.run));
    }
}

fn join(labels: &alloc::collections::BTreeSet<String>) -> String {
    labels
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// The verdict for a single theory: its backtraces when it agrees, the
/// consistency diagnosis when it does not.
pub fn theory_report(theory_label: &str, verdict: &TheoryVerdict) -> String {
    let mut out = String::new();
    out.push_str(&format!("theory: {theory_label}\n"));
    out.push_str(&format!("agrees: {}\n", verdict.agrees));
    out.push_str(&format!("complete: {}\n", verdict.complete));
    if verdict.agrees {
        out.push_str(&format!("backtraces: {}\n", verdict.backtraces.len()));
        for (i, bt) in verdict.backtraces.iter().enumerate() {
            out.push('\n');
            push_backtrace(&mut out, i + 1, bt);
        }
    } else {
        push_subsets(&mut out, &verdict.diagnosis);
    }
    out
}

/// Summary ordering of several theories, most preferred first.
pub fn ranking_report(ranked: &[(String, TheoryVerdict)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("theories: {}\n", ranked.len()));
    for (i, (label, verdict)) in ranked.iter().enumerate() {
        out.push_str(&format!(
            "{}. {label} agrees={} backtraces={} complete={}\n",
            i + 1,
            verdict.agrees,
            verdict.backtraces.len(),
            verdict.complete
        ));
    }
    out
}

/// The standalone consistency diagnosis listing.
pub fn subsets_report(subsets: &[ConsistentSubset]) -> String {
    let mut out = String::new();
    push_subsets(&mut out, subsets);
    out
}
