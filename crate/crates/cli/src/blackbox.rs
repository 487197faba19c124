//! Durable blackbox log format and threshold-rule ingestion.
//!
//! A log is JSON Lines, one record per line, canonical field order
//! `(seq, t_ms, channel, value, level, crc)`. Values are serialized with a
//! fixed decimal precision so every byte of a record is reproducible. The
//! CRC-32 (IEEE) covers the canonical serialization of the record minus the
//! `crc` field itself; readers recompute it from the raw line bytes, so
//! corruption is detected without trusting the record contents. A truncated
//! final line is reported as torn and ignored rather than mistaken for
//! corruption.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use hindsight_core::model::{
    EvidentialStatement, ModelError, Observation, ObservationSequence, PropertyDef, Slack, Weight,
};

/// Serialized decimal places for channel values unless overridden.
pub const DEFAULT_PRECISION: u8 = 3;

/// Per-sample logging detail level; carried for reporting, no ingestion
/// semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Normal,
    Elevated,
}

impl LogLevel {
    fn as_str(self) -> &'static str {
        match self {
            LogLevel::Normal => "normal",
            LogLevel::Elevated => "elevated",
        }
    }
}

/// One durable telemetry sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackboxRecord {
    pub seq: u64,
    pub t_ms: u64,
    pub channel: String,
    pub value: f64,
    pub level: LogLevel,
    pub crc: u32,
}

/// Record fields minus the integrity checksum; what callers hand to append.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDraft {
    pub seq: u64,
    pub t_ms: u64,
    pub channel: String,
    pub value: f64,
    pub level: LogLevel,
}

impl RecordDraft {
    pub fn new(seq: u64, t_ms: u64, channel: &str, value: f64, level: LogLevel) -> Self {
        RecordDraft {
            seq,
            t_ms,
            channel: channel.to_string(),
            value,
            level,
        }
    }
}

/// `[A-Za-z][A-Za-z0-9_]*`, the shape shared with case-file identifiers.
pub fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Canonical serialization of a draft: the record without its `crc` field.
pub fn canonical_body(draft: &RecordDraft, precision: u8) -> String {
    format!(
        "{{\"seq\":{},\"t_ms\":{},\"channel\":\"{}\",\"value\":{:.prec$},\"level\":\"{}\"}}",
        draft.seq,
        draft.t_ms,
        draft.channel,
        draft.value,
        draft.level.as_str(),
        prec = precision as usize,
    )
}

/// Computes the checksum and renders the full log line. The returned record
/// carries the value exactly as serialized, so reading the line back yields
/// an equal record.
pub fn seal(draft: &RecordDraft, precision: u8) -> (BlackboxRecord, String) {
    let body = canonical_body(draft, precision);
    let crc = crc32fast::hash(body.as_bytes());
    let line = format!("{},\"crc\":{}}}", &body[..body.len() - 1], crc);
    let stored: f64 = format!("{:.prec$}", draft.value, prec = precision as usize)
        .parse()
        .expect("fixed-precision decimal reparses");
    let record = BlackboxRecord {
        seq: draft.seq,
        t_ms: draft.t_ms,
        channel: draft.channel.clone(),
        value: stored,
        level: draft.level,
        crc,
    };
    (record, line)
}

#[derive(Debug, Deserialize)]
struct Body {
    seq: u64,
    t_ms: u64,
    channel: String,
    value: f64,
    level: LogLevel,
}

/// Verification outcome for one log line.
#[derive(Debug, Clone, PartialEq)]
pub enum LineOutcome {
    Valid(BlackboxRecord),
    /// Checksum mismatch or unparseable line; `seq` is reported when the
    /// body still parses enough to name it.
    Corrupt {
        seq: Option<u64>,
    },
}

fn body_seq(body: &[u8]) -> Option<u64> {
    serde_json::from_slice::<serde_json::Value>(body)
        .ok()?
        .get("seq")?
        .as_u64()
}

const CRC_MARKER: &[u8] = b",\"crc\":";

fn rfind_marker(line: &[u8]) -> Option<usize> {
    line.windows(CRC_MARKER.len())
        .rposition(|window| window == CRC_MARKER)
}

/// Checks one raw line: locate the trailing `crc` field, recompute the
/// checksum over the canonical prefix bytes, then parse. Works on bytes so
/// arbitrary corruption (including invalid UTF-8) is still classified.
pub fn verify_line(line: &[u8]) -> LineOutcome {
    let Some(split_at) = rfind_marker(line) else {
        return LineOutcome::Corrupt { seq: None };
    };
    let (prefix, suffix) = line.split_at(split_at);
    let mut body = Vec::with_capacity(prefix.len() + 1);
    body.extend_from_slice(prefix);
    body.push(b'}');
    let digits = suffix
        .strip_prefix(CRC_MARKER)
        .and_then(|s| s.strip_suffix(b"}"))
        .and_then(|s| std::str::from_utf8(s).ok());
    let Some(expected) = digits.and_then(|d| d.parse::<u32>().ok()) else {
        return LineOutcome::Corrupt {
            seq: body_seq(&body),
        };
    };
    let actual = crc32fast::hash(&body);
    if actual != expected {
        return LineOutcome::Corrupt {
            seq: body_seq(&body),
        };
    }
    match serde_json::from_slice::<Body>(&body) {
        Ok(parsed) => LineOutcome::Valid(BlackboxRecord {
            seq: parsed.seq,
            t_ms: parsed.t_ms,
            channel: parsed.channel,
            value: parsed.value,
            level: parsed.level,
            crc: actual,
        }),
        Err(_) => LineOutcome::Corrupt {
            seq: body_seq(&body),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcFailure {
    /// 1-based line number.
    pub line: usize,
    pub seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceGap {
    pub line: usize,
    pub expected: u64,
    pub found: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestampRegression {
    pub line: usize,
    pub previous: u64,
    pub found: u64,
}

/// Audit result of reading a log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntegrityReport {
    pub records_read: usize,
    pub crc_failures: Vec<CrcFailure>,
    pub sequence_gaps: Vec<SequenceGap>,
    pub timestamp_regressions: Vec<TimestampRegression>,
    pub torn_trailing_record: bool,
}

impl IntegrityReport {
    pub fn is_clean(&self) -> bool {
        self.crc_failures.is_empty()
            && self.sequence_gaps.is_empty()
            && self.timestamp_regressions.is_empty()
            && !self.torn_trailing_record
    }
}

impl fmt::Display for IntegrityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.records_read)?;
        writeln!(f, "crc_failures: {}", self.crc_failures.len())?;
        for failure in &self.crc_failures {
            match failure.seq {
                Some(seq) => writeln!(f, "  line {} seq {seq}", failure.line)?,
                None => writeln!(f, "  line {}", failure.line)?,
            }
        }
        writeln!(f, "sequence_gaps: {}", self.sequence_gaps.len())?;
        for gap in &self.sequence_gaps {
            writeln!(
                f,
                "  line {} expected {} found {}",
                gap.line, gap.expected, gap.found
            )?;
        }
        writeln!(
            f,
            "timestamp_regressions: {}",
            self.timestamp_regressions.len()
        )?;
        for regression in &self.timestamp_regressions {
            writeln!(
                f,
                "  line {} previous {} found {}",
                regression.line, regression.previous, regression.found
            )?;
        }
        writeln!(f, "torn_trailing_record: {}", self.torn_trailing_record)?;
        write!(f, "clean: {}", self.is_clean())
    }
}

/// Verifies a whole log image. Corrupt lines are excluded from sequence and
/// timestamp analysis; an incomplete final line counts as torn, not corrupt.
pub fn scan_log(contents: &[u8]) -> (Vec<BlackboxRecord>, IntegrityReport) {
    let mut records = Vec::new();
    let mut report = IntegrityReport::default();

    let terminated = contents.ends_with(b"\n");
    let mut pieces: Vec<&[u8]> = contents.split(|&b| b == b'\n').collect();
    // A trailing newline leaves one empty piece; drop it.
    if terminated {
        pieces.pop();
    }
    let last_index = pieces.len().saturating_sub(1);

    let mut last_seq: Option<u64> = None;
    let mut last_t: Option<u64> = None;
    for (index, piece) in pieces.iter().enumerate() {
        if piece.is_empty() {
            continue;
        }
        let line_no = index + 1;
        let is_torn_candidate = !terminated && index == last_index;
        match verify_line(piece) {
            LineOutcome::Valid(record) => {
                let expected = last_seq.map_or(0, |s| s + 1);
                if record.seq != expected {
                    report.sequence_gaps.push(SequenceGap {
                        line: line_no,
                        expected,
                        found: record.seq,
                    });
                }
                last_seq = Some(record.seq);
                if let Some(prev) = last_t {
                    if record.t_ms < prev {
                        report.timestamp_regressions.push(TimestampRegression {
                            line: line_no,
                            previous: prev,
                            found: record.t_ms,
                        });
                    }
                }
                last_t = Some(record.t_ms);
                records.push(record);
            }
            LineOutcome::Corrupt { seq } => {
                if is_torn_candidate {
                    report.torn_trailing_record = true;
                } else {
                    report.crc_failures.push(CrcFailure { line: line_no, seq });
                }
            }
        }
    }
    report.records_read = records.len();
    (records, report)
}

/// Comparison against a safety threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Gt,
    Ge,
    Lt,
    Le,
}

impl Comparator {
    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            ">" => Comparator::Gt,
            ">=" => Comparator::Ge,
            "<" => Comparator::Lt,
            "<=" => Comparator::Le,
            _ => return None,
        })
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
        })
    }
}

/// Maps a channel crossing a threshold to a named property with a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRule {
    pub channel: String,
    pub comparator: Comparator,
    pub threshold: f64,
    pub property: String,
    pub weight: Weight,
}

impl ThresholdRule {
    pub fn satisfied(&self, value: f64) -> bool {
        match self.comparator {
            Comparator::Gt => value > self.threshold,
            Comparator::Ge => value >= self.threshold,
            Comparator::Lt => value < self.threshold,
            Comparator::Le => value <= self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("rules line {line}: {message}")]
pub struct RuleParseError {
    pub line: usize,
    pub message: String,
}

/// Parses a `.rules` file: one rule per line,
/// `channel comparator threshold -> property_name w=WEIGHT`;
/// `#` comments and blank lines are skipped.
pub fn parse_rules(text: &str) -> Result<Vec<ThresholdRule>, RuleParseError> {
    let mut rules: Vec<ThresholdRule> = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| RuleParseError {
            line: line_no,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 6 || tokens[3] != "->" {
            return Err(err(format!(
                "expected `channel comparator threshold -> property w=WEIGHT`, got `{line}`"
            )));
        }
        let channel = tokens[0];
        if !is_identifier(channel) {
            return Err(err(format!("channel `{channel}` is not an identifier")));
        }
        let comparator = Comparator::parse(tokens[1])
            .ok_or_else(|| err(format!("unknown comparator `{}`", tokens[1])))?;
        let threshold: f64 = tokens[2]
            .parse()
            .map_err(|_| err(format!("malformed threshold `{}`", tokens[2])))?;
        let property = tokens[4];
        if !is_identifier(property) || property == "any" {
            return Err(err(format!("property `{property}` is not a valid name")));
        }
        let weight_text = tokens[5]
            .strip_prefix("w=")
            .ok_or_else(|| err(format!("expected `w=WEIGHT`, got `{}`", tokens[5])))?;
        let weight_value: f64 = weight_text
            .parse()
            .map_err(|_| err(format!("malformed weight `{weight_text}`")))?;
        let weight = Weight::new(weight_value).map_err(|e| err(e.to_string()))?;
        if rules.iter().any(|r| r.property == property) {
            return Err(err(format!("duplicate property `{property}`")));
        }
        rules.push(ThresholdRule {
            channel: channel.to_string(),
            comparator,
            threshold,
            property: property.to_string(),
            weight,
        });
    }
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("rule channel `{0}` does not appear in the log")]
    UnknownChannel(String),

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Converts verified telemetry into evidential form: per rule, each maximal
/// run of consecutive satisfying samples on that channel becomes one
/// observation timestamped at the excursion start, with an exact duration of
/// the sample count; the rule's observations form one sequence labeled by
/// the property name. Properties are emitted as bare names to be bound to
/// case declarations later.
pub fn derive_observations(
    records: &[BlackboxRecord],
    rules: &[ThresholdRule],
    statement_label: &str,
) -> Result<EvidentialStatement, IngestError> {
    let mut sequences = Vec::with_capacity(rules.len());
    for rule in rules {
        let samples: Vec<&BlackboxRecord> = records
            .iter()
            .filter(|r| r.channel == rule.channel)
            .collect();
        if samples.is_empty() {
            return Err(IngestError::UnknownChannel(rule.channel.clone()));
        }
        let mut observations = Vec::new();
        let mut excursion: Option<(u64, u32)> = None;
        for sample in samples {
            if rule.satisfied(sample.value) {
                excursion = match excursion {
                    None => Some((sample.t_ms, 1)),
                    Some((start, count)) => Some((start, count + 1)),
                };
            } else if let Some((start, count)) = excursion.take() {
                observations.push(excursion_observation(rule, start, count));
            }
        }
        if let Some((start, count)) = excursion {
            observations.push(excursion_observation(rule, start, count));
        }
        sequences.push(ObservationSequence {
            label: rule.property.clone(),
            observations,
        });
    }
    EvidentialStatement::new(statement_label, sequences).map_err(IngestError::from)
}

fn excursion_observation(rule: &ThresholdRule, start_t_ms: u64, samples: u32) -> Observation {
    Observation {
        property: PropertyDef::named(&rule.property, Vec::<String>::new()),
        timestamp_ms: Some(start_t_ms),
        min_steps: samples,
        max_slack: Slack::Finite(0),
        weight: rule.weight,
    }
}

/// Renders a derived statement as case-file declarations, ready to paste
/// into a `case` block alongside the machine and property declarations.
pub fn render_fragment(source_name: &str, es: &EvidentialStatement) -> String {
    let mut out = String::new();
    out.push_str(&format!("// derived from {source_name}\n"));
    for seq in es.sequences() {
        if seq.observations.is_empty() {
            out.push_str(&format!("// rule for `{}` never fired\n", seq.label));
        }
        for (i, obs) in seq.observations.iter().enumerate() {
            let t = obs
                .timestamp_ms
                .map(|t| format!(", t={t}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "observation {}_{i} = ({}{t}, min={}, max=0, w={});\n",
                seq.label,
                obs.property.name,
                obs.min_steps,
                obs.weight.get()
            ));
        }
        let refs: Vec<String> = (0..seq.observations.len())
            .map(|i| format!("{}_{i}", seq.label))
            .collect();
        out.push_str(&format!(
            "sequence {} = [{}];\n",
            seq.label,
            refs.join(", ")
        ));
    }
    let labels: Vec<String> = es.sequences().iter().map(|s| s.label.clone()).collect();
    out.push_str(&format!(
        "evidence {} = {{{}}};\n",
        es.label,
        labels.join(", ")
    ));
    out
}

/// Channel-specific serialization precision with a default.
#[derive(Debug, Clone, Default)]
pub struct PrecisionMap {
    per_channel: BTreeMap<String, u8>,
}

impl PrecisionMap {
    pub fn with_channel(mut self, channel: &str, precision: u8) -> Self {
        self.per_channel.insert(channel.to_string(), precision);
        self
    }

    pub fn for_channel(&self, channel: &str) -> u8 {
        self.per_channel
            .get(channel)
            .copied()
            .unwrap_or(DEFAULT_PRECISION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crc_implementation_matches_reference_vectors() {
        // IEEE CRC-32 of "123456789" and of a canonical record body,
        // computed independently with zlib.
        assert_eq!(crc32fast::hash(b"123456789"), 3421780262);
        let draft = RecordDraft::new(0, 1000, "speed_kmh", 100.0, LogLevel::Normal);
        let body = canonical_body(&draft, DEFAULT_PRECISION);
        assert_eq!(
            body,
            "{\"seq\":0,\"t_ms\":1000,\"channel\":\"speed_kmh\",\"value\":100.000,\"level\":\"normal\"}"
        );
        assert_eq!(crc32fast::hash(body.as_bytes()), 168249103);

        let draft = RecordDraft::new(1, 2000, "pressure_kpa", 0.0, LogLevel::Elevated);
        let body = canonical_body(&draft, DEFAULT_PRECISION);
        assert_eq!(crc32fast::hash(body.as_bytes()), 1594070967);
    }

    #[test]
    fn sealed_lines_verify_and_round_trip() {
        let draft = RecordDraft::new(0, 1000, "speed_kmh", 100.0, LogLevel::Normal);
        let (record, line) = seal(&draft, DEFAULT_PRECISION);
        assert_eq!(
            line,
            format!(
                "{{\"seq\":0,\"t_ms\":1000,\"channel\":\"speed_kmh\",\"value\":100.000,\"level\":\"normal\",\"crc\":{}}}",
                record.crc
            )
        );
        assert_eq!(verify_line(line.as_bytes()), LineOutcome::Valid(record));
    }

    #[test]
    fn corrupt_lines_report_their_seq_when_parseable() {
        let (_, line) = seal(
            &RecordDraft::new(7, 1000, "speed_kmh", 99.5, LogLevel::Normal),
            DEFAULT_PRECISION,
        );
        let tampered = line.replace("99.5", "11.5");
        assert_eq!(
            verify_line(tampered.as_bytes()),
            LineOutcome::Corrupt { seq: Some(7) }
        );
        assert_eq!(verify_line(b"garbage"), LineOutcome::Corrupt { seq: None });
    }

    fn sample_log(n: u64) -> String {
        let mut contents = String::new();
        for seq in 0..n {
            let draft = RecordDraft::new(
                seq,
                1000 * seq,
                "pressure_kpa",
                800.0 - seq as f64,
                LogLevel::Normal,
            );
            let (_, line) = seal(&draft, DEFAULT_PRECISION);
            contents.push_str(&line);
            contents.push('\n');
        }
        contents
    }

    #[test]
    fn clean_log_scans_clean() {
        let (records, report) = scan_log(sample_log(5).as_bytes());
        assert_eq!(records.len(), 5);
        assert!(report.is_clean());
        assert_eq!(report.records_read, 5);
    }

    #[test]
    fn torn_final_record_is_flagged_not_corrupt() {
        let full = sample_log(3);
        let cut = &full.as_bytes()[..full.len() - 7];
        let (records, report) = scan_log(cut);
        assert_eq!(records.len(), 2);
        assert!(report.torn_trailing_record);
        assert!(report.crc_failures.is_empty());
        assert!(report.sequence_gaps.is_empty());
    }

    #[test]
    fn gaps_and_regressions_are_located() {
        let mut contents = String::new();
        for (seq, t) in [(0u64, 1000u64), (1, 2000), (3, 1500)] {
            let (_, line) = seal(
                &RecordDraft::new(seq, t, "c1", 1.0, LogLevel::Normal),
                DEFAULT_PRECISION,
            );
            contents.push_str(&line);
            contents.push('\n');
        }
        let (records, report) = scan_log(contents.as_bytes());
        assert_eq!(records.len(), 3);
        assert_eq!(
            report.sequence_gaps,
            vec![SequenceGap {
                line: 3,
                expected: 2,
                found: 3
            }]
        );
        assert_eq!(
            report.timestamp_regressions,
            vec![TimestampRegression {
                line: 3,
                previous: 2000,
                found: 1500
            }]
        );
    }

    #[test]
    fn rules_parse_and_reject_malformed_lines() {
        let rules = parse_rules(
            "# thresholds\n\
             speed_kmh > 120.0 -> P_speeding w=0.95\n\
             \n\
             pressure_kpa <= 100 -> P_fail w=0.9\n",
        )
        .unwrap();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[0].comparator, Comparator::Gt);
        assert!(rules[0].satisfied(121.0));
        assert!(!rules[0].satisfied(120.0));

        let err = parse_rules("speed_kmh >> 120 -> P w=0.5").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains(">>"));

        let err = parse_rules("a > 1 -> P w=0.5\nb > 2 -> P w=0.5").unwrap_err();
        assert!(err.message.contains("duplicate property"));

        let err = parse_rules("a > 1 -> P w=1.5").unwrap_err();
        assert!(err.message.contains("outside (0, 1]"));
    }

    fn speeding_records() -> Vec<BlackboxRecord> {
        [
            (1000u64, 100.0f64),
            (2000, 130.0),
            (3000, 135.0),
            (4000, 110.0),
        ]
        .iter()
        .enumerate()
        .map(|(i, &(t, v))| {
            seal(
                &RecordDraft::new(i as u64, t, "speed_kmh", v, LogLevel::Normal),
                DEFAULT_PRECISION,
            )
            .0
        })
        .collect()
    }

    #[test]
    fn one_excursion_becomes_one_observation() {
        let rules = parse_rules("speed_kmh > 120 -> P_speeding w=0.95").unwrap();
        let es = derive_observations(&speeding_records(), &rules, "ingested").unwrap();
        assert_eq!(es.sequences().len(), 1);
        let seq = &es.sequences()[0];
        assert_eq!(seq.label, "P_speeding");
        assert_eq!(seq.observations.len(), 1);
        let obs = &seq.observations[0];
        assert_eq!(obs.property.name, "P_speeding");
        assert_eq!(obs.timestamp_ms, Some(2000));
        assert_eq!(obs.min_steps, 2);
        assert_eq!(obs.max_slack, Slack::Finite(0));
        assert_eq!(obs.weight.get(), 0.95);
    }

    #[test]
    fn unsatisfied_rule_keeps_an_empty_sequence() {
        let rules = parse_rules("speed_kmh > 500 -> P_wild w=0.5").unwrap();
        let es = derive_observations(&speeding_records(), &rules, "ingested").unwrap();
        assert_eq!(es.sequences().len(), 1);
        assert!(es.sequences()[0].observations.is_empty());
    }

    #[test]
    fn separated_excursions_stay_chronological() {
        let records: Vec<BlackboxRecord> = [
            (0u64, 130.0f64),
            (1000, 100.0),
            (2000, 140.0),
            (3000, 150.0),
        ]
        .iter()
        .enumerate()
        .map(|(i, &(t, v))| {
            seal(
                &RecordDraft::new(i as u64, t, "speed_kmh", v, LogLevel::Normal),
                DEFAULT_PRECISION,
            )
            .0
        })
        .collect();
        let rules = parse_rules("speed_kmh > 120 -> P_speeding w=0.95").unwrap();
        let es = derive_observations(&records, &rules, "ingested").unwrap();
        let seq = &es.sequences()[0];
        assert_eq!(seq.observations.len(), 2);
        assert_eq!(seq.observations[0].timestamp_ms, Some(0));
        assert_eq!(seq.observations[0].min_steps, 1);
        assert_eq!(seq.observations[1].timestamp_ms, Some(2000));
        assert_eq!(seq.observations[1].min_steps, 2);
        assert!(seq.check_chronology().is_ok());
    }

    #[test]
    fn unknown_channel_is_rejected() {
        let rules = parse_rules("altitude_m > 10 -> P_high w=0.5").unwrap();
        let err = derive_observations(&speeding_records(), &rules, "ingested").unwrap_err();
        assert_eq!(err, IngestError::UnknownChannel("altitude_m".to_string()));
    }

    #[test]
    fn fragments_render_as_case_declarations() {
        let rules = parse_rules("speed_kmh > 120 -> P_speeding w=0.95").unwrap();
        let es = derive_observations(&speeding_records(), &rules, "ingested").unwrap();
        let fragment = render_fragment("trip.bblog", &es);
        assert!(fragment
            .contains("observation P_speeding_0 = (P_speeding, t=2000, min=2, max=0, w=0.95);"));
        assert!(fragment.contains("sequence P_speeding = [P_speeding_0];"));
        assert!(fragment.contains("evidence ingested = {P_speeding};"));
    }
}
