//! Core library for forensic event reconstruction over finite-state incident
//! models.
//!
//! A case pairs a nondeterministic state machine (the modeled system) with
//! weighted evidence: observations of named state properties, each holding
//! for a bounded number of computation steps. The [`engine`] enumerates every
//! run of the machine consistent with all evidence, ranked by credibility,
//! checks investigator theories against the evidence, and diagnoses
//! inconsistent evidence via maximal consistent subsets. The [`dsl`] module
//! parses, checks, and canonically formats the textual case-file language.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file IO, the blackbox
//! telemetry log format, and the command-line front end live in the companion
//! `hindsight` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dsl;
pub mod engine;
pub mod model;
pub mod report;

pub use model::{
    aggregate_credibility, validate_machine, Aggregator, EvidentialStatement, Observation,
    ObservationSequence, PropertyDef, ReconConfig, Run, StateMachine, Weight,
};
