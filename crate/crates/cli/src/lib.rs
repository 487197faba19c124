//! Vehicle-side companion to `hindsight-core`: the durable blackbox log
//! format with per-record integrity, threshold-rule ingestion of raw
//! telemetry into evidential form, and a deterministic scenario simulator
//! for building fixtures with known answers.

pub mod blackbox;
pub mod logio;
pub mod sim;
