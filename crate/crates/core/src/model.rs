//! Domain types of the evidential context model.
//!
//! An observation claims that a named property held for a bounded number of
//! computation steps; a chronologically ordered list of observations is one
//! witness story; the unordered set of all stories is the evidential
//! statement about an incident. Runs of the incident machine are candidate
//! event histories; a partition maps one story onto one run segment by
//! segment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Validation failures when constructing model values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("weight {0} is outside (0, 1]")]
    WeightOutOfRange(f64),

    #[error("duplicate sequence label `{0}` in evidential statement")]
    DuplicateSequenceLabel(String),

    #[error("observation references unknown property `{0}`")]
    UnknownProperty(String),

    #[error("non-chronological timestamps in sequence `{label}`: t={later} after t={earlier}")]
    NonChronological {
        label: String,
        earlier: u64,
        later: u64,
    },

    #[error("run is empty")]
    EmptyRun,

    #[error("run has {states} states but {events} events")]
    RunArityMismatch { states: usize, events: usize },

    #[error("run starts at `{0}`, which is not an initial state")]
    RunNotInitial(String),

    #[error("run ends at `{0}`, which is not a final state")]
    RunNotFinal(String),

    #[error("run step {index} uses undeclared transition `{from} --{event}--> {to}`")]
    RunBadStep {
        index: usize,
        from: String,
        event: String,
        to: String,
    },
}

/// Finding severity, shared by machine validation and case-file checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// The state set a property denotes: an explicit set or every state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateSet {
    /// Holds at every state (the builtin `any` property).
    Universal,
    /// Holds exactly at the named states. An empty set arises only from
    /// telemetry ingestion, where the property is a bare name to be bound to
    /// a case declaration later; it holds at no state until bound.
    Named(BTreeSet<String>),
}

/// A named state-set predicate; the `P` of an observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PropertyDef {
    pub name: String,
    pub member_states: StateSet,
}

impl PropertyDef {
    /// The builtin universal property.
    pub fn any() -> Self {
        PropertyDef {
            name: "any".to_string(),
            member_states: StateSet::Universal,
        }
    }

    pub fn named<I: IntoIterator<Item = S>, S: Into<String>>(name: &str, states: I) -> Self {
        PropertyDef {
            name: name.to_string(),
            member_states: StateSet::Named(states.into_iter().map(Into::into).collect()),
        }
    }

    /// Whether the property holds at the given state.
    pub fn holds_at(&self, state: &str) -> bool {
        match &self.member_states {
            StateSet::Universal => true,
            StateSet::Named(states) => states.contains(state),
        }
    }
}

/// A credibility weight in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Weight(f64);

impl Weight {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Weight(value))
        } else {
            Err(ModelError::WeightOutOfRange(value))
        }
    }

    /// A weight of exactly 1.0.
    pub fn one() -> Self {
        Weight(1.0)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Upper slack on an observation's duration above its minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slack {
    Finite(u32),
    Unbounded,
}

/// One witnessed property with duration bounds and credibility (the model's
/// `o = (P, t, min, max, w)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub property: PropertyDef,
    /// Optional wall-clock timestamp in milliseconds. Participates in
    /// chronology validation and reporting only, never in segment matching.
    pub timestamp_ms: Option<u64>,
    /// Minimum duration in computation steps (states visited).
    pub min_steps: u32,
    /// Admissible slack above the minimum; a segment of length `l` matches
    /// when `min <= l` and, for finite slack, `l <= min + max`.
    pub max_slack: Slack,
    pub weight: Weight,
}

impl Observation {
    pub fn new(
        property: PropertyDef,
        timestamp_ms: Option<u64>,
        min_steps: u32,
        max_slack: Slack,
        weight: Weight,
    ) -> Self {
        Observation {
            property,
            timestamp_ms,
            min_steps,
            max_slack,
            weight,
        }
    }

    /// Whether a segment of `len` states satisfies the duration bounds.
    pub fn admits_len(&self, len: usize) -> bool {
        if len < self.min_steps as usize {
            return false;
        }
        match self.max_slack {
            Slack::Unbounded => true,
            Slack::Finite(max) => len <= self.min_steps as usize + max as usize,
        }
    }
}

/// Duration interval implied by a sequence: any explained run has a state
/// count within `[lo, hi]` (`hi` of `None` means unbounded).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthInterval {
    pub lo: u64,
    pub hi: Option<u64>,
}

/// An ordered witness story (the model's `os = {o_1, ..., o_n}`).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    pub label: String,
    pub observations: Vec<Observation>,
}

impl ObservationSequence {
    pub fn new(label: &str, observations: Vec<Observation>) -> Self {
        ObservationSequence {
            label: label.to_string(),
            observations,
        }
    }

    /// Sum of duration bounds over the sequence. Appending an observation
    /// never decreases either endpoint.
    pub fn length_interval(&self) -> LengthInterval {
        let lo = self
            .observations
            .iter()
            .map(|o| o.min_steps as u64)
            .sum::<u64>();
        let mut hi = Some(0u64);
        for obs in &self.observations {
            hi = match (hi, obs.max_slack) {
                (Some(acc), Slack::Finite(max)) => Some(acc + obs.min_steps as u64 + max as u64),
                _ => None,
            };
        }
        LengthInterval { lo, hi }
    }

    /// Checks that observations carrying timestamps are non-decreasing in
    /// time. Observations without timestamps are skipped.
    pub fn check_chronology(&self) -> Result<(), ModelError> {
        let mut last: Option<u64> = None;
        for obs in &self.observations {
            if let Some(t) = obs.timestamp_ms {
                if let Some(prev) = last {
                    if t < prev {
                        return Err(ModelError::NonChronological {
                            label: self.label.clone(),
                            earlier: prev,
                            later: t,
                        });
                    }
                }
                last = Some(t);
            }
        }
        Ok(())
    }
}

/// The unordered set of witness stories about one incident (the model's
/// `es = {os_1, ..., os_m}`). Sequences are kept sorted by label, so equality
/// is insensitive to declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialStatement {
    pub label: String,
    sequences: Vec<ObservationSequence>,
}

impl EvidentialStatement {
    pub fn new(label: &str, mut sequences: Vec<ObservationSequence>) -> Result<Self, ModelError> {
        sequences.sort_by(|a, b| a.label.cmp(&b.label));
        for pair in sequences.windows(2) {
            if pair[0].label == pair[1].label {
                return Err(ModelError::DuplicateSequenceLabel(pair[0].label.clone()));
            }
        }
        Ok(EvidentialStatement {
            label: label.to_string(),
            sequences,
        })
    }

    pub fn empty(label: &str) -> Self {
        EvidentialStatement {
            label: label.to_string(),
            sequences: Vec::new(),
        }
    }

    /// Sequences in label order.
    pub fn sequences(&self) -> &[ObservationSequence] {
        &self.sequences
    }

    pub fn sequence_labels(&self) -> BTreeSet<String> {
        self.sequences.iter().map(|s| s.label.clone()).collect()
    }

    /// A new statement with one more story.
    pub fn with_sequence(&self, os: ObservationSequence) -> Result<Self, ModelError> {
        let mut sequences = self.sequences.clone();
        sequences.push(os);
        EvidentialStatement::new(&self.label, sequences)
    }

    /// A new statement restricted to the given labels.
    pub fn restricted_to(&self, labels: &BTreeSet<String>) -> Self {
        EvidentialStatement {
            label: self.label.clone(),
            sequences: self
                .sequences
                .iter()
                .filter(|s| labels.contains(&s.label))
                .cloned()
                .collect(),
        }
    }

    /// Rebinds every observation's property to the declaration with the same
    /// name. Statements derived from telemetry carry bare property names;
    /// they must be bound to case declarations before reconstruction.
    pub fn bind_properties(&self, defs: &[PropertyDef]) -> Result<Self, ModelError> {
        let by_name: BTreeMap<&str, &PropertyDef> =
            defs.iter().map(|d| (d.name.as_str(), d)).collect();
        let mut sequences = Vec::with_capacity(self.sequences.len());
        for seq in &self.sequences {
            let mut observations = Vec::with_capacity(seq.observations.len());
            for obs in &seq.observations {
                let property = if obs.property.name == "any" {
                    PropertyDef::any()
                } else {
                    (*by_name
                        .get(obs.property.name.as_str())
                        .ok_or_else(|| ModelError::UnknownProperty(obs.property.name.clone()))?)
                    .clone()
                };
                observations.push(Observation {
                    property,
                    ..obs.clone()
                });
            }
            sequences.push(ObservationSequence {
                label: seq.label.clone(),
                observations,
            });
        }
        Ok(EvidentialStatement {
            label: self.label.clone(),
            sequences,
        })
    }

    /// All observation weights, sequences in label order.
    pub fn all_weights(&self) -> Vec<Weight> {
        self.sequences
            .iter()
            .flat_map(|s| s.observations.iter().map(|o| o.weight))
            .collect()
    }
}

/// One transition triple of the incident machine.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub from: String,
    pub event: String,
    pub to: String,
}

impl Transition {
    pub fn new(from: &str, event: &str, to: &str) -> Self {
        Transition {
            from: from.to_string(),
            event: event.to_string(),
            to: to.to_string(),
        }
    }
}

/// The incident model: a labeled, possibly nondeterministic state machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    pub states: BTreeSet<String>,
    pub events: BTreeSet<String>,
    /// Declared transition relation; duplicates are tolerated (flagged by
    /// validation) and collapse to a set for reconstruction.
    pub transitions: Vec<Transition>,
    pub initial: BTreeSet<String>,
    /// Empty means the model is unanchored at the end.
    pub final_states: BTreeSet<String>,
}

impl StateMachine {
    pub fn transitions_from<'a>(
        &'a self,
        state: &'a str,
    ) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| t.from == state)
    }
}

/// One machine validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineIssue {
    UndeclaredTransitionState { index: usize, state: String },
    UndeclaredTransitionEvent { index: usize, event: String },
    UndeclaredInitialState { state: String },
    UndeclaredFinalState { state: String },
    EmptyInitialSet,
    UnreachableState { state: String },
    DuplicateTransition { index: usize },
}

impl MachineIssue {
    pub fn severity(&self) -> Severity {
        match self {
            MachineIssue::UnreachableState { .. } | MachineIssue::DuplicateTransition { .. } => {
                Severity::Warning
            }
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for MachineIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineIssue::UndeclaredTransitionState { state, .. } => {
                write!(f, "transition references undeclared state `{state}`")
            }
            MachineIssue::UndeclaredTransitionEvent { event, .. } => {
                write!(f, "transition references undeclared event `{event}`")
            }
            MachineIssue::UndeclaredInitialState { state } => {
                write!(f, "initial state `{state}` is not declared")
            }
            MachineIssue::UndeclaredFinalState { state } => {
                write!(f, "final state `{state}` is not declared")
            }
            MachineIssue::EmptyInitialSet => f.write_str("empty initial set"),
            MachineIssue::UnreachableState { state } => {
                write!(f, "state `{state}` is unreachable from the initial states")
            }
            MachineIssue::DuplicateTransition { index } => {
                write!(f, "duplicate transition (declaration {})", index + 1)
            }
        }
    }
}

/// Validates a machine. An empty result means no findings; warning-level
/// findings (unreachable states, duplicate transitions) do not make the
/// machine invalid.
pub fn validate_machine(m: &StateMachine) -> Vec<MachineIssue> {
    let mut issues = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, t) in m.transitions.iter().enumerate() {
        for state in [&t.from, &t.to] {
            if !m.states.contains(state) {
                issues.push(MachineIssue::UndeclaredTransitionState {
                    index,
                    state: state.clone(),
                });
            }
        }
        if !m.events.contains(&t.event) {
            issues.push(MachineIssue::UndeclaredTransitionEvent {
                index,
                event: t.event.clone(),
            });
        }
        if !seen.insert((t.from.clone(), t.event.clone(), t.to.clone())) {
            issues.push(MachineIssue::DuplicateTransition { index });
        }
    }
    for state in &m.initial {
        if !m.states.contains(state) {
            issues.push(MachineIssue::UndeclaredInitialState {
                state: state.clone(),
            });
        }
    }
    for state in &m.final_states {
        if !m.states.contains(state) {
            issues.push(MachineIssue::UndeclaredFinalState {
                state: state.clone(),
            });
        }
    }
    if m.initial.is_empty() {
        issues.push(MachineIssue::EmptyInitialSet);
    }

    // Forward reachability from the initial states over declared transitions.
    let mut reached: BTreeSet<&str> = m
        .initial
        .iter()
        .filter(|s| m.states.contains(*s))
        .map(String::as_str)
        .collect();
    let mut frontier: Vec<&str> = reached.iter().copied().collect();
    while let Some(state) = frontier.pop() {
        for t in m.transitions_from(state) {
            if m.states.contains(&t.to) && reached.insert(&t.to) {
                frontier.push(&t.to);
            }
        }
    }
    for state in &m.states {
        if !reached.contains(state.as_str()) {
            issues.push(MachineIssue::UnreachableState {
                state: state.clone(),
            });
        }
    }
    issues
}

/// Whether validation produced no error-level findings.
pub fn machine_is_valid(m: &StateMachine) -> bool {
    validate_machine(m)
        .iter()
        .all(|i| i.severity() != Severity::Error)
}

/// One traced execution: `n` states joined by `n − 1` events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Run {
    pub states: Vec<String>,
    pub events: Vec<String>,
}

impl Run {
    pub fn new<S: Into<String>>(
        states: impl IntoIterator<Item = S>,
        events: impl IntoIterator<Item = S>,
    ) -> Self {
        Run {
            states: states.into_iter().map(Into::into).collect(),
            events: events.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len_states(&self) -> usize {
        self.states.len()
    }

    /// Structural validity against a machine. Final-state anchoring is only
    /// enforced when `anchor_final` is set and the machine declares final
    /// states.
    pub fn validate(&self, m: &StateMachine, anchor_final: bool) -> Result<(), ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::EmptyRun);
        }
        if self.events.len() + 1 != self.states.len() {
            return Err(ModelError::RunArityMismatch {
                states: self.states.len(),
                events: self.events.len(),
            });
        }
        if !m.initial.contains(&self.states[0]) {
            return Err(ModelError::RunNotInitial(self.states[0].clone()));
        }
        let last = self.states.last().expect("non-empty");
        if anchor_final && !m.final_states.is_empty() && !m.final_states.contains(last) {
            return Err(ModelError::RunNotFinal(last.clone()));
        }
        for (index, event) in self.events.iter().enumerate() {
            let step = Transition::new(&self.states[index], event, &self.states[index + 1]);
            if !m.transitions.contains(&step) {
                return Err(ModelError::RunBadStep {
                    index,
                    from: step.from,
                    event: step.event,
                    to: step.to,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, state) in self.states.iter().enumerate() {
            if i > 0 {
                write!(f, " -{}-> ", self.events[i - 1])?;
            }
            f.write_str(state)?;
        }
        Ok(())
    }
}

/// Segment boundaries mapping one story onto one run: `k + 1` indices
/// `0 = b_0 <= ... <= b_k = n`, one segment `[b_{i-1}, b_i)` per observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    pub boundaries: Vec<usize>,
}

impl Partition {
    /// Whether this partition is a valid witness for `os` over the states of
    /// `run`: exact cover, duration bounds, and property satisfaction.
    pub fn is_valid_for(&self, run: &Run, os: &ObservationSequence) -> bool {
        let n = run.states.len();
        let k = os.observations.len();
        if self.boundaries.len() != k + 1 {
            return false;
        }
        if self.boundaries[0] != 0 || self.boundaries[k] != n {
            return false;
        }
        for (i, obs) in os.observations.iter().enumerate() {
            let (start, end) = (self.boundaries[i], self.boundaries[i + 1]);
            if start > end || end > n {
                return false;
            }
            if !obs.admits_len(end - start) {
                return false;
            }
            if !run.states[start..end]
                .iter()
                .all(|q| obs.property.holds_at(q))
            {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.boundaries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("]")
    }
}

/// One reconstructed explanation: a run, one witness partition per story,
/// and the aggregated credibility of the included stories.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtrace {
    pub run: Run,
    /// Lexicographically least witness partition per sequence label.
    pub partitions: BTreeMap<String, Partition>,
    pub score: f64,
    pub included_sequences: BTreeSet<String>,
}

/// Credibility aggregation method over observation weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Product,
    Minimum,
    Mean,
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Product => f.write_str("product"),
            Aggregator::Minimum => f.write_str("min"),
            Aggregator::Mean => f.write_str("mean"),
        }
    }
}

/// Aggregates a weight multiset into a single credibility score. Weights are
/// folded in sorted order so the result is insensitive to input permutation.
/// An empty multiset constrains nothing and aggregates to 1.0.
pub fn aggregate_credibility(weights: &[Weight], method: Aggregator) -> f64 {
    if weights.is_empty() {
        return 1.0;
    }
    let mut values: Vec<f64> = weights.iter().map(|w| w.get()).collect();
    values.sort_unstable_by(f64::total_cmp);
    match method {
        Aggregator::Product => values.iter().product(),
        Aggregator::Minimum => values[0],
        Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Reconstruction limits and scoring configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconConfig {
    /// Runs longer than this many states are never considered.
    pub max_run_length: usize,
    /// Result list is truncated here; truncation is reported distinctly from
    /// an empty result.
    pub max_backtraces: usize,
    pub aggregator: Aggregator,
    /// When set and the machine declares final states, runs must end there.
    pub anchor_final: bool,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            max_run_length: 64,
            max_backtraces: 1000,
            aggregator: Aggregator::Product,
            anchor_final: true,
        }
    }
}
