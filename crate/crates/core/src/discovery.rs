//! Alpha-algorithm process discovery and token-replay conformance.
//!
//! The miner is the plain alpha algorithm: it only looks at the set of
//! direct successions in the log, so trace order and multiplicity do not
//! matter. Its usual blind spots (length-one and length-two loops,
//! non-free-choice constructs) are not worked around.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::event_log::{Trace, TraceSet};
use crate::petri::{fire, Designation, Marking, PetriError, PetriNet, SINK_PLACE, SOURCE_PLACE};

/// Alphabets are encoded as bitmasks during place enumeration.
pub const MAX_ALPHABET: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscoveryError {
    #[error("trace set is empty")]
    EmptyLog,
    #[error("trace `{0}` is empty")]
    EmptyTrace(String),
    #[error("alphabet of {0} actions exceeds the supported {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("action `{0}` has no transition in the net")]
    UnknownAction(String),
    #[error(transparent)]
    Petri(#[from] PetriError),
}

/// Ordering relation between two actions as seen from the first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// a -> b
    Causality,
    /// b -> a
    Reverse,
    /// a || b
    Parallel,
    /// a # b
    Unrelated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FootprintMatrix {
    /// Sorted.
    pub alphabet: Vec<String>,
    /// Pairs (a, b) with a immediately followed by b somewhere in the log.
    pub direct_succession: BTreeSet<(String, String)>,
}

impl FootprintMatrix {
    pub fn follows(&self, a: &str, b: &str) -> bool {
        self.direct_succession.contains(&(a.to_string(), b.to_string()))
    }

    pub fn relation(&self, a: &str, b: &str) -> Relation {
        match (self.follows(a, b), self.follows(b, a)) {
            (true, true) => Relation::Parallel,
            (true, false) => Relation::Causality,
            (false, true) => Relation::Reverse,
            (false, false) => Relation::Unrelated,
        }
    }
}

pub fn footprint(traces: &TraceSet) -> Result<FootprintMatrix, DiscoveryError> {
    if traces.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    let direct_succession = traces
        .traces
        .iter()
        .flat_map(|t| t.actions.windows(2).map(|w| (w[0].clone(), w[1].clone())))
        .collect();
    Ok(FootprintMatrix {
        alphabet: traces.alphabet.iter().cloned().collect(),
        direct_succession,
    })
}

pub type PlaceSets = (BTreeSet<String>, BTreeSet<String>);

/// Canonical id of the place connecting the actions of `a` to those of `b`.
pub fn place_id(a: &BTreeSet<String>, b: &BTreeSet<String>) -> String {
    let join = |s: &BTreeSet<String>| s.iter().map(String::as_str).collect::<Vec<_>>().join(",");
    format!("p({{{}}},{{{}}})", join(a), join(b))
}

fn check_traces(traces: &TraceSet) -> Result<(), DiscoveryError> {
    if traces.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    if let Some(t) = traces.traces.iter().find(|t| t.actions.is_empty()) {
        return Err(DiscoveryError::EmptyTrace(t.process_id.clone()));
    }
    if traces.alphabet.len() > MAX_ALPHABET {
        return Err(DiscoveryError::AlphabetTooLarge(traces.alphabet.len()));
    }
    Ok(())
}

/// Collapses identical action sequences, keeping the first occurrence.
fn distinct(traces: &TraceSet) -> TraceSet {
    let mut seen = BTreeSet::new();
    TraceSet::new(
        traces
            .traces
            .iter()
            .filter(|t| seen.insert(t.actions.clone()))
            .cloned()
            .collect(),
    )
}

/// Every non-empty subset of `candidates` whose members are pairwise
/// unrelated (self-pairs included), as bitmasks.
fn unrelated_cliques(candidates: u64, unrelated: &[u64]) -> Vec<u64> {
    fn grow(set: u64, allowed: u64, unrelated: &[u64], out: &mut Vec<u64>) {
        let mut rest = allowed;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let next = set | (1 << i);
            out.push(next);
            grow(next, rest & unrelated[i], unrelated, out);
        }
    }
    let self_unrelated = (0..unrelated.len())
        .filter(|&i| unrelated[i] & (1 << i) != 0)
        .fold(0u64, |m, i| m | (1 << i));
    let mut out = Vec::new();
    grow(0, candidates & self_unrelated, unrelated, &mut out);
    out
}

/// The maximal pairs (A, B) of the alpha algorithm, sorted.
pub fn alpha_places(traces: &TraceSet) -> Result<Vec<PlaceSets>, DiscoveryError> {
    check_traces(traces)?;
    let fp = footprint(&distinct(traces))?;
    let n = fp.alphabet.len();
    let rel = |i: usize, j: usize| fp.relation(&fp.alphabet[i], &fp.alphabet[j]);
    let mask_where = |i: usize, r: Relation| (0..n).filter(|&j| rel(i, j) == r).fold(0u64, |m, j| m | (1 << j));
    let unrelated: Vec<u64> = (0..n).map(|i| mask_where(i, Relation::Unrelated)).collect();
    let causes: Vec<u64> = (0..n).map(|i| mask_where(i, Relation::Causality)).collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    let mut x_w: Vec<(u64, u64)> = Vec::new();
    for a in unrelated_cliques(all, &unrelated) {
        let successors = (0..n)
            .filter(|&i| a & (1 << i) != 0)
            .fold(all, |m, i| m & causes[i]);
        if successors == 0 {
            continue;
        }
        x_w.extend(unrelated_cliques(successors, &unrelated).into_iter().map(|b| (a, b)));
    }
    let subset = |x: u64, y: u64| x & !y == 0;
    let names = |m: u64| -> BTreeSet<String> {
        (0..n).filter(|&i| m & (1 << i) != 0).map(|i| fp.alphabet[i].clone()).collect()
    };
    let mut y_w: Vec<PlaceSets> = x_w
        .iter()
        .filter(|&&(a, b)| {
            !x_w.iter()
                .any(|&(a2, b2)| (a2, b2) != (a, b) && subset(a, a2) && subset(b, b2))
        })
        .map(|&(a, b)| (names(a), names(b)))
        .collect();
    y_w.sort();
    Ok(y_w)
}

/// Mines a workflow net with one transition per action plus a designated
/// source and sink place.
pub fn alpha_discover(traces: &TraceSet) -> Result<PetriNet, DiscoveryError> {
    let y_w = alpha_places(traces)?;
    let firsts: BTreeSet<&str> = traces.traces.iter().map(|t| t.actions[0].as_str()).collect();
    let lasts: BTreeSet<&str> = traces
        .traces
        .iter()
        .map(|t| t.actions[t.actions.len() - 1].as_str())
        .collect();

    let mut net = PetriNet::new();
    for a in &traces.alphabet {
        net.add_transition(a.clone(), a.clone())?;
    }
    net.add_place(SOURCE_PLACE)?;
    net.designate(SOURCE_PLACE, Designation::Source)?;
    net.add_place(SINK_PLACE)?;
    net.designate(SINK_PLACE, Designation::Sink)?;
    for t in firsts {
        net.add_input_arc(SOURCE_PLACE, t)?;
    }
    for t in lasts {
        net.add_output_arc(t, SINK_PLACE)?;
    }
    for (a, b) in &y_w {
        let p = place_id(a, b);
        net.add_place(p.clone())?;
        for t in a {
            net.add_output_arc(t, &p)?;
        }
        for t in b {
            net.add_input_arc(&p, t)?;
        }
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayResult {
    pub fits: bool,
    pub missing_tokens: u64,
    pub remaining_tokens: u64,
    pub final_marking: Marking,
}

/// Token replay from one token on the source place. Disabled transitions
/// are force-fired after recording one missing token per empty input place.
pub fn replay_trace(net: &PetriNet, trace: &Trace) -> Result<ReplayResult, DiscoveryError> {
    let source = net.designated(Designation::Source).ok_or(PetriError::NoBoundary)?;
    let sink = net.designated(Designation::Sink).ok_or(PetriError::NoBoundary)?;
    let mut m = Marking::from_pairs([(source, 1)]);
    let mut missing = 0u64;
    for action in &trace.actions {
        let t = net
            .transition_by_label(action)
            .ok_or_else(|| DiscoveryError::UnknownAction(action.clone()))?;
        for p in net.preset(t) {
            if m.get(p) == 0 {
                missing += 1;
                m.add(p, 1);
            }
        }
        m = fire(net, &m, t)?;
    }
    let remaining = m.total() - u64::from(m.get(sink));
    let fits = missing == 0 && m == Marking::from_pairs([(sink, 1)]);
    Ok(ReplayResult { fits, missing_tokens: missing, remaining_tokens: remaining, final_marking: m })
}

/// Fraction of traces that replay perfectly.
pub fn fitness(net: &PetriNet, traces: &TraceSet) -> Result<f64, DiscoveryError> {
    if traces.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    let mut fitting = 0usize;
    for t in &traces.traces {
        if replay_trace(net, t)?.fits {
            fitting += 1;
        }
    }
    Ok(fitting as f64 / traces.len() as f64)
}
