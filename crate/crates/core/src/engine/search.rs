//! Backtrace reconstruction over the product of the machine with one
//! segment-tracking automaton per witness story.
//!
//! Each tracker is the NFA of its story's segment structure: state
//! `(i, c)` means observation `i` has consumed `c` run states in its current
//! segment, with `c` saturating at `min` when the slack is unbounded. A
//! segment may close (advance to observation `i + 1`) once `c >= min`. The
//! product is determinized per story by carrying the set of live tracker
//! states, so each machine run corresponds to exactly one product path.
//!
//! Accepting product configurations are computed first; a backward fixpoint
//! over the reachable product graph then marks, for every node, the exact
//! numbers of further steps that can still reach acceptance. Runs are finally
//! read out forward along feasible nodes only, by increasing state count.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    assemble_backtrace, feasible_lengths, statement_score, validate_inputs, EngineError,
    Reconstruction,
};
use crate::model::{
    EvidentialStatement, ObservationSequence, ReconConfig, Run, Slack, StateMachine,
};

/// Computes all backtraces consistent with the evidential statement, ranked
/// by (score descending, run state count ascending, event labels ascending,
/// state labels ascending). The list is complete up to
/// `cfg.max_run_length` and truncated at `cfg.max_backtraces`; truncation is
/// reported via [`Reconstruction::truncated`].
pub fn reconstruct(
    machine: &StateMachine,
    es: &EvidentialStatement,
    cfg: &ReconConfig,
) -> Result<Reconstruction, EngineError> {
    validate_inputs(machine, es, cfg)?;
    let Some((lo, hi)) = feasible_lengths(es, cfg) else {
        return Ok(Reconstruction {
            backtraces: Vec::new(),
            truncated: false,
        });
    };

    let interned = Interned::build(machine, cfg);
    let trackers: Vec<Tracker> = es
        .sequences()
        .iter()
        .map(|seq| Tracker::build(seq, &interned.state_names, cfg.max_run_length))
        .collect();
    let graph = ProductGraph::build(&interned, &trackers);
    let feasible = graph.feasibility(cfg.max_run_length);

    let (raw_runs, truncated) = enumerate_ranked(&graph, &feasible, lo, hi, cfg.max_backtraces);

    let score = statement_score(es, cfg);
    let backtraces = raw_runs
        .into_iter()
        .map(|raw| assemble_backtrace(raw.into_run(&interned), es, score))
        .collect();
    Ok(Reconstruction {
        backtraces,
        truncated,
    })
}

/// Machine view with dense ids. States and events are numbered in label
/// order, so comparing id sequences is comparing label sequences.
pub(crate) struct Interned {
    pub state_names: Vec<String>,
    pub event_names: Vec<String>,
    /// Outgoing `(event, target)` pairs per state, sorted and deduplicated.
    pub forward: Vec<Vec<(u32, u32)>>,
    pub initial: Vec<u32>,
    pub is_final: Vec<bool>,
    pub anchored: bool,
}

impl Interned {
    pub(crate) fn build(machine: &StateMachine, cfg: &ReconConfig) -> Self {
        let state_names: Vec<String> = machine.states.iter().cloned().collect();
        let event_names: Vec<String> = machine.events.iter().cloned().collect();
        let state_id = |name: &str| {
            state_names
                .binary_search_by(|s| s.as_str().cmp(name))
                .expect("validated machine references declared states") as u32
        };
        let event_id = |name: &str| {
            event_names
                .binary_search_by(|e| e.as_str().cmp(name))
                .expect("validated machine references declared events") as u32
        };

        let mut forward = vec![Vec::new(); state_names.len()];
        for t in &machine.transitions {
            let edge = (event_id(&t.event), state_id(&t.to));
            let out: &mut Vec<(u32, u32)> = &mut forward[state_id(&t.from) as usize];
            if let Err(slot) = out.binary_search(&edge) {
                out.insert(slot, edge);
            }
        }
        let mut is_final = vec![false; state_names.len()];
        for name in &machine.final_states {
            is_final[state_id(name) as usize] = true;
        }
        Interned {
            initial: machine.initial.iter().map(|s| state_id(s)).collect(),
            anchored: cfg.anchor_final && !machine.final_states.is_empty(),
            state_names,
            event_names,
            forward,
            is_final,
        }
    }
}

/// Fixed-width bit set; doubles as an ordered map key for product nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn empty(bits: usize) -> Self {
        BitSet {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub(crate) fn insert(&mut self, index: u32) {
        self.words[index as usize / 64] |= 1u64 << (index % 64);
    }

    pub(crate) fn contains(&self, index: u32) -> bool {
        self.words[index as usize / 64] & (1u64 << (index % 64)) != 0
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }
}

/// Segment-tracking NFA for one story, evaluated over interned state ids.
pub(crate) struct Tracker {
    /// `satisfies[i][q]`: observation `i`'s property holds at state `q`.
    satisfies: Vec<Vec<bool>>,
    min: Vec<u32>,
    /// Highest representable in-segment count per observation; clamped to the
    /// run-length cap, saturating at `min` for unbounded slack.
    cap: Vec<u32>,
    unbounded: Vec<bool>,
    offset: Vec<u32>,
    total: u32,
}

impl Tracker {
    pub(crate) fn build(
        os: &ObservationSequence,
        state_names: &[String],
        max_run_length: usize,
    ) -> Self {
        let limit = u32::try_from(max_run_length).unwrap_or(u32::MAX);
        let mut satisfies = Vec::new();
        let mut min = Vec::new();
        let mut cap = Vec::new();
        let mut unbounded = Vec::new();
        let mut offset = Vec::new();
        let mut next = 0u32;
        for obs in &os.observations {
            satisfies.push(
                state_names
                    .iter()
                    .map(|q| obs.property.holds_at(q))
                    .collect(),
            );
            min.push(obs.min_steps);
            let (c, u) = match obs.max_slack {
                Slack::Finite(max) => (obs.min_steps.saturating_add(max).min(limit), false),
                Slack::Unbounded => (obs.min_steps.min(limit), true),
            };
            cap.push(c);
            unbounded.push(u);
            offset.push(next);
            next += c + 1;
        }
        Tracker {
            satisfies,
            min,
            cap,
            unbounded,
            offset,
            total: next + 1,
        }
    }

    fn terminal(&self) -> u32 {
        self.total - 1
    }

    /// Start of observation `i`, or the terminal past the last observation.
    fn segment_start(&self, i: usize) -> u32 {
        self.offset.get(i).copied().unwrap_or(self.terminal())
    }

    /// Closes every satisfied segment: `(i, c)` with `c >= min_i` enables
    /// `(i + 1, 0)`. Ascending order lets zero-minimum segments cascade.
    fn close(&self, bits: &mut BitSet) {
        for i in 0..self.min.len() {
            let base = self.offset[i];
            let closable = (self.min[i]..=self.cap[i]).any(|c| bits.contains(base + c));
            if closable {
                bits.insert(self.segment_start(i + 1));
            }
        }
    }

    /// Live tracker states before any run state is consumed.
    pub(crate) fn initial_set(&self) -> BitSet {
        let mut bits = BitSet::empty(self.total as usize);
        bits.insert(self.segment_start(0));
        self.close(&mut bits);
        bits
    }

    /// Consumes one run state and recloses. An empty result means the story
    /// can no longer explain any extension of the current prefix.
    pub(crate) fn step(&self, bits: &BitSet, q: u32) -> BitSet {
        let mut next = BitSet::empty(self.total as usize);
        for i in 0..self.min.len() {
            if !self.satisfies[i][q as usize] {
                continue;
            }
            let base = self.offset[i];
            for c in 0..=self.cap[i] {
                if !bits.contains(base + c) {
                    continue;
                }
                if c < self.cap[i] {
                    next.insert(base + c + 1);
                } else if self.unbounded[i] {
                    next.insert(base + c);
                }
            }
        }
        self.close(&mut next);
        next
    }

    pub(crate) fn accepting(&self, bits: &BitSet) -> bool {
        bits.contains(self.terminal())
    }
}

struct Node {
    state: u32,
    trackers: Vec<BitSet>,
}

struct ProductGraph {
    nodes: Vec<Node>,
    /// Outgoing `(event, target node)` per node, in `(event, target state)`
    /// order.
    edges: Vec<Vec<(u32, u32)>>,
    accepting: Vec<bool>,
    /// Start node per initial machine state that every story tolerates as a
    /// first run state.
    starts: Vec<u32>,
}

impl ProductGraph {
    fn build(interned: &Interned, trackers: &[Tracker]) -> Self {
        let mut graph = ProductGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            accepting: Vec::new(),
            starts: Vec::new(),
        };
        let mut index: BTreeMap<(u32, Vec<BitSet>), u32> = BTreeMap::new();
        let mut worklist: Vec<u32> = Vec::new();

        let initial_sets: Vec<BitSet> = trackers.iter().map(Tracker::initial_set).collect();
        for &q0 in &interned.initial {
            if let Some(sets) = step_all(trackers, &initial_sets, q0) {
                let id = intern_node(
                    interned,
                    trackers,
                    &mut graph,
                    &mut index,
                    &mut worklist,
                    q0,
                    sets,
                );
                if !graph.starts.contains(&id) {
                    graph.starts.push(id);
                }
            }
        }

        while let Some(id) = worklist.pop() {
            let (state, sets) = {
                let node = &graph.nodes[id as usize];
                (node.state, node.trackers.clone())
            };
            let mut out = Vec::new();
            for &(event, target) in &interned.forward[state as usize] {
                if let Some(next_sets) = step_all(trackers, &sets, target) {
                    let next_id = intern_node(
                        interned,
                        trackers,
                        &mut graph,
                        &mut index,
                        &mut worklist,
                        target,
                        next_sets,
                    );
                    out.push((event, next_id));
                }
            }
            graph.edges[id as usize] = out;
        }
        graph
    }

    /// For every node, the set of remaining step counts `r` (edges still to
    /// take) from which an accepting configuration is reachable in exactly
    /// `r` steps. Bit 0 marks accepting nodes themselves; a run of `n` states
    /// is readable from a start node iff bit `n - 1` is set there.
    fn feasibility(&self, max_run_length: usize) -> Vec<BitSet> {
        let bits = max_run_length;
        let mut feasible: Vec<BitSet> = self
            .accepting
            .iter()
            .map(|&acc| {
                let mut b = BitSet::empty(bits);
                if acc {
                    b.insert(0);
                }
                b
            })
            .collect();
        for r in 1..max_run_length as u32 {
            for id in 0..self.nodes.len() {
                if self.edges[id]
                    .iter()
                    .any(|&(_, target)| feasible[target as usize].contains(r - 1))
                {
                    feasible[id].insert(r);
                }
            }
        }
        feasible
    }
}

fn step_all(trackers: &[Tracker], sets: &[BitSet], q: u32) -> Option<Vec<BitSet>> {
    let mut next = Vec::with_capacity(sets.len());
    for (tracker, bits) in trackers.iter().zip(sets) {
        let stepped = tracker.step(bits, q);
        if stepped.is_empty() {
            return None;
        }
        next.push(stepped);
    }
    Some(next)
}

#[allow(clippy::too_many_arguments)]
fn intern_node(
    interned: &Interned,
    trackers: &[Tracker],
    graph: &mut ProductGraph,
    index: &mut BTreeMap<(u32, Vec<BitSet>), u32>,
    worklist: &mut Vec<u32>,
    state: u32,
    sets: Vec<BitSet>,
) -> u32 {
    match index.entry((state, sets)) {
        Entry::Occupied(entry) => *entry.get(),
        Entry::Vacant(entry) => {
            let id = graph.nodes.len() as u32;
            let (state, sets) = entry.key().clone();
            let accepting = (!interned.anchored || interned.is_final[state as usize])
                && trackers
                    .iter()
                    .zip(&sets)
                    .all(|(tracker, bits)| tracker.accepting(bits));
            graph.nodes.push(Node {
                state,
                trackers: sets,
            });
            graph.edges.push(Vec::new());
            graph.accepting.push(accepting);
            entry.insert(id);
            worklist.push(id);
            id
        }
    }
}

/// A run in interned form. Deriving `Ord` with events first gives exactly the
/// ranking tie-break order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct RawRun {
    events: Vec<u32>,
    states: Vec<u32>,
}

impl RawRun {
    fn into_run(self, interned: &Interned) -> Run {
        Run {
            states: self
                .states
                .iter()
                .map(|&q| interned.state_names[q as usize].clone())
                .collect(),
            events: self
                .events
                .iter()
                .map(|&e| interned.event_names[e as usize].clone())
                .collect(),
        }
    }
}

/// Reads runs out of the product graph by increasing state count, each layer
/// sorted by (event labels, state labels). Keeps at most `max_backtraces`
/// runs; reports whether anything was cut.
fn enumerate_ranked(
    graph: &ProductGraph,
    feasible: &[BitSet],
    lo: usize,
    hi: usize,
    max_backtraces: usize,
) -> (Vec<RawRun>, bool) {
    let mut results: Vec<RawRun> = Vec::new();
    for n in lo..=hi {
        let remaining = (n - 1) as u32;
        let live_starts: Vec<u32> = graph
            .starts
            .iter()
            .copied()
            .filter(|&s| feasible[s as usize].contains(remaining))
            .collect();
        if live_starts.is_empty() {
            continue;
        }
        let slots = max_backtraces - results.len();
        if slots == 0 {
            // Full already and a later layer still has runs.
            return (results, true);
        }

        // Keep the layer's `slots` smallest runs in a bounded max-heap.
        let mut layer: BinaryHeap<RawRun> = BinaryHeap::new();
        let mut layer_count = 0usize;
        for start in live_starts {
            let mut states = vec![graph.nodes[start as usize].state];
            let mut events = Vec::new();
            descend(
                graph,
                feasible,
                start,
                remaining,
                &mut states,
                &mut events,
                &mut layer,
                &mut layer_count,
                slots,
            );
        }
        results.extend(layer.into_sorted_vec());
        if layer_count > slots {
            return (results, true);
        }
    }
    (results, false)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    graph: &ProductGraph,
    feasible: &[BitSet],
    node: u32,
    remaining: u32,
    states: &mut Vec<u32>,
    events: &mut Vec<u32>,
    layer: &mut BinaryHeap<RawRun>,
    layer_count: &mut usize,
    slots: usize,
) {
    if remaining == 0 {
        debug_assert!(graph.accepting[node as usize]);
        *layer_count += 1;
        layer.push(RawRun {
            events: events.clone(),
            states: states.clone(),
        });
        if layer.len() > slots {
            layer.pop();
        }
        return;
    }
    for &(event, target) in &graph.edges[node as usize] {
        if !feasible[target as usize].contains(remaining - 1) {
            continue;
        }
        events.push(event);
        states.push(graph.nodes[target as usize].state);
        descend(
            graph,
            feasible,
            target,
            remaining - 1,
            states,
            events,
            layer,
            layer_count,
            slots,
        );
        states.pop();
        events.pop();
    }
}
