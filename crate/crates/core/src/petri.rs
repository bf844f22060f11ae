//! Place/transition nets with unit arc weights: markings, the token game,
//! source/sink stripping, reachability graphs and PNML/DOT serialization.
//!
//! All collections are ordered, so every traversal and every serialized
//! artifact is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::event_log::xml_escape;

pub const DEFAULT_BOUND: usize = 10_000;
pub const SOURCE_PLACE: &str = "source";
pub const SINK_PLACE: &str = "sink";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PetriError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate arc {0}")]
    DuplicateArc(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("net has no designated source and sink place")]
    NoBoundary,
    #[error("every place has a non-empty preset; an explicit initial marking is required")]
    MarkingRequired,
    #[error("reachability graph exceeds {0} nodes")]
    BoundExceeded(usize),
    #[error("bad marking `{0}`: expected place=count")]
    BadMarking(String),
    #[error("PNML: {0}")]
    Pnml(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Designation {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    /// place -> transition
    Input { place: String, transition: String },
    /// transition -> place
    Output { transition: String, place: String },
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arc::Input { place, transition } => write!(f, "{place} -> {transition}"),
            Arc::Output { transition, place } => write!(f, "{transition} -> {place}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PetriNet {
    places: BTreeMap<String, Option<Designation>>,
    /// transition id -> label
    transitions: BTreeMap<String, String>,
    pre: BTreeMap<String, BTreeSet<String>>,
    post: BTreeMap<String, BTreeSet<String>>,
}

impl PetriNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> Result<(), PetriError> {
        let id = id.into();
        if self.places.contains_key(&id) || self.transitions.contains_key(&id) {
            return Err(PetriError::DuplicateNode(id));
        }
        self.places.insert(id, None);
        Ok(())
    }

    /// Marks `id` as the unique source or sink place, clearing any previous holder.
    pub fn designate(&mut self, id: &str, d: Designation) -> Result<(), PetriError> {
        if !self.places.contains_key(id) {
            return Err(PetriError::UnknownPlace(id.to_string()));
        }
        for v in self.places.values_mut() {
            if *v == Some(d) {
                *v = None;
            }
        }
        self.places.insert(id.to_string(), Some(d));
        Ok(())
    }

    pub fn add_transition(&mut self, id: impl Into<String>, label: impl Into<String>) -> Result<(), PetriError> {
        let id = id.into();
        if self.places.contains_key(&id) || self.transitions.contains_key(&id) {
            return Err(PetriError::DuplicateNode(id));
        }
        self.pre.insert(id.clone(), BTreeSet::new());
        self.post.insert(id.clone(), BTreeSet::new());
        self.transitions.insert(id, label.into());
        Ok(())
    }

    pub fn add_arc(&mut self, arc: Arc) -> Result<(), PetriError> {
        let (place, transition, side) = match &arc {
            Arc::Input { place, transition } => (place, transition, &mut self.pre),
            Arc::Output { transition, place } => (place, transition, &mut self.post),
        };
        if !self.places.contains_key(place) {
            return Err(PetriError::UnknownPlace(place.clone()));
        }
        let set = side
            .get_mut(transition)
            .ok_or_else(|| PetriError::UnknownTransition(transition.clone()))?;
        if !set.insert(place.clone()) {
            return Err(PetriError::DuplicateArc(arc.to_string()));
        }
        Ok(())
    }

    pub fn add_input_arc(&mut self, place: &str, transition: &str) -> Result<(), PetriError> {
        self.add_arc(Arc::Input { place: place.into(), transition: transition.into() })
    }

    pub fn add_output_arc(&mut self, transition: &str, place: &str) -> Result<(), PetriError> {
        self.add_arc(Arc::Output { transition: transition.into(), place: place.into() })
    }

    pub fn places(&self) -> impl Iterator<Item = &str> {
        self.places.keys().map(String::as_str)
    }

    pub fn has_place(&self, id: &str) -> bool {
        self.places.contains_key(id)
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn designation(&self, place: &str) -> Option<Designation> {
        self.places.get(place).copied().flatten()
    }

    pub fn designated(&self, d: Designation) -> Option<&str> {
        self.places
            .iter()
            .find(|(_, v)| **v == Some(d))
            .map(|(k, _)| k.as_str())
    }

    /// Transition ids in sorted order.
    pub fn transitions(&self) -> impl Iterator<Item = &str> {
        self.transitions.keys().map(String::as_str)
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn label(&self, transition: &str) -> Option<&str> {
        self.transitions.get(transition).map(String::as_str)
    }

    /// First transition carrying `label`, in id order.
    pub fn transition_by_label(&self, label: &str) -> Option<&str> {
        self.transitions
            .iter()
            .find(|(_, l)| l.as_str() == label)
            .map(|(id, _)| id.as_str())
    }

    pub fn preset(&self, transition: &str) -> &BTreeSet<String> {
        &self.pre[transition]
    }

    pub fn postset(&self, transition: &str) -> &BTreeSet<String> {
        &self.post[transition]
    }

    /// Transitions producing into `place`.
    pub fn place_preset(&self, place: &str) -> BTreeSet<&str> {
        self.post
            .iter()
            .filter(|(_, ps)| ps.contains(place))
            .map(|(t, _)| t.as_str())
            .collect()
    }

    /// Transitions consuming from `place`.
    pub fn place_postset(&self, place: &str) -> BTreeSet<&str> {
        self.pre
            .iter()
            .filter(|(_, ps)| ps.contains(place))
            .map(|(t, _)| t.as_str())
            .collect()
    }

    /// All arcs in sorted order.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs: Vec<Arc> = self
            .pre
            .iter()
            .flat_map(|(t, ps)| ps.iter().map(move |p| Arc::Input { place: p.clone(), transition: t.clone() }))
            .chain(
                self.post
                    .iter()
                    .flat_map(|(t, ps)| ps.iter().map(move |p| Arc::Output { transition: t.clone(), place: p.clone() })),
            )
            .collect();
        arcs.sort();
        arcs
    }

    pub fn arc_count(&self) -> usize {
        self.pre.values().chain(self.post.values()).map(BTreeSet::len).sum()
    }

    fn remove_place(&mut self, id: &str) {
        self.places.remove(id);
        for set in self.pre.values_mut().chain(self.post.values_mut()) {
            set.remove(id);
        }
    }
}

/// Token counts per place; zero counts are never stored, so equal markings
/// compare and hash equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(BTreeMap<String, u32>);

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u32)>) -> Self {
        let mut m = Marking::new();
        for (p, n) in pairs {
            m.set(p, n);
        }
        m
    }

    pub fn get(&self, place: &str) -> u32 {
        self.0.get(place).copied().unwrap_or(0)
    }

    pub fn set(&mut self, place: &str, n: u32) {
        if n == 0 {
            self.0.remove(place);
        } else {
            self.0.insert(place.to_string(), n);
        }
    }

    pub fn add(&mut self, place: &str, n: u32) {
        let v = self.get(place) + n;
        self.set(place, v);
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&n| u64::from(n)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Non-zero entries in place order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Parses `place=count` entries.
    pub fn parse_entries<'a>(entries: impl IntoIterator<Item = &'a str>) -> Result<Self, PetriError> {
        let mut m = Marking::new();
        for e in entries {
            let (p, n) = e.rsplit_once('=').ok_or_else(|| PetriError::BadMarking(e.to_string()))?;
            let n: u32 = n.trim().parse().map_err(|_| PetriError::BadMarking(e.to_string()))?;
            m.add(p.trim(), n);
        }
        Ok(m)
    }

    fn validate(&self, net: &PetriNet) -> Result<(), PetriError> {
        match self.0.keys().find(|p| !net.has_place(p)) {
            Some(p) => Err(PetriError::UnknownPlace(p.clone())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}:{n}")?;
        }
        f.write_str("}")
    }
}

pub fn enabled_transitions(net: &PetriNet, m: &Marking) -> BTreeSet<String> {
    net.transitions()
        .filter(|t| net.preset(t).iter().all(|p| m.get(p) >= 1))
        .map(str::to_string)
        .collect()
}

pub fn is_enabled(net: &PetriNet, m: &Marking, t: &str) -> bool {
    net.pre.get(t).is_some_and(|ps| ps.iter().all(|p| m.get(p) >= 1))
}

pub fn fire(net: &PetriNet, m: &Marking, t: &str) -> Result<Marking, PetriError> {
    if !net.transitions.contains_key(t) {
        return Err(PetriError::UnknownTransition(t.to_string()));
    }
    if !is_enabled(net, m, t) {
        return Err(PetriError::NotEnabled(t.to_string()));
    }
    let mut next = m.clone();
    for p in net.preset(t) {
        next.set(p, next.get(p) - 1);
    }
    for p in net.postset(t) {
        next.add(p, 1);
    }
    Ok(next)
}

/// Removes the designated source and sink places and their arcs.
pub fn strip_boundary(net: &PetriNet) -> Result<PetriNet, PetriError> {
    let (Some(source), Some(sink)) = (net.designated(Designation::Source), net.designated(Designation::Sink)) else {
        return Err(PetriError::NoBoundary);
    };
    let (source, sink) = (source.to_string(), sink.to_string());
    let mut out = net.clone();
    out.remove_place(&source);
    out.remove_place(&sink);
    Ok(out)
}

/// One token on every place no transition produces into.
pub fn default_initial_marking(net: &PetriNet) -> Result<Marking, PetriError> {
    let m = Marking::from_pairs(
        net.places()
            .filter(|p| net.place_preset(p).is_empty())
            .map(|p| (p, 1)),
    );
    if m.is_empty() {
        Err(PetriError::MarkingRequired)
    } else {
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachEdge {
    pub from: usize,
    pub transition: String,
    pub label: String,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityGraph {
    /// Markings in breadth-first discovery order; `nodes[initial]` is the start.
    pub nodes: Vec<Marking>,
    pub initial: usize,
    pub edges: Vec<ReachEdge>,
}

impl ReachabilityGraph {
    pub fn successors(&self, node: usize) -> impl Iterator<Item = &ReachEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }
}

/// Breadth-first exploration, transitions tried in id order at every node.
pub fn reachability_graph(net: &PetriNet, m0: &Marking, bound: usize) -> Result<ReachabilityGraph, PetriError> {
    m0.validate(net)?;
    if bound == 0 {
        return Err(PetriError::BoundExceeded(0));
    }
    let mut nodes = vec![m0.clone()];
    let mut index: HashMap<Marking, usize> = HashMap::from([(m0.clone(), 0)]);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let m = nodes[i].clone();
        for t in net.transitions() {
            if !is_enabled(net, &m, t) {
                continue;
            }
            let next = fire(net, &m, t)?;
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if nodes.len() >= bound {
                        return Err(PetriError::BoundExceeded(bound));
                    }
                    nodes.push(next.clone());
                    index.insert(next, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            edges.push(ReachEdge {
                from: i,
                transition: t.to_string(),
                label: net.label(t).unwrap_or(t).to_string(),
                to: j,
            });
        }
    }
    Ok(ReachabilityGraph { nodes, initial: 0, edges })
}

const PNML_TOOL: &str = "plantmine";

pub fn export_pnml(net: &PetriNet) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n");
    out.push_str("  <net id=\"net\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n");
    out.push_str("    <page id=\"page\">\n");
    for (p, d) in &net.places {
        let id = xml_escape(p);
        let _ = writeln!(out, "      <place id=\"{id}\">");
        let _ = writeln!(out, "        <name><text>{id}</text></name>");
        if let Some(d) = d {
            if *d == Designation::Source {
                out.push_str("        <initialMarking><text>1</text></initialMarking>\n");
            }
            let name = match d {
                Designation::Source => "source",
                Designation::Sink => "sink",
            };
            let _ = writeln!(
                out,
                "        <toolspecific tool=\"{PNML_TOOL}\" version=\"1\"><designation>{name}</designation></toolspecific>"
            );
        }
        out.push_str("      </place>\n");
    }
    for (t, label) in &net.transitions {
        let _ = writeln!(out, "      <transition id=\"{}\">", xml_escape(t));
        let _ = writeln!(out, "        <name><text>{}</text></name>", xml_escape(label));
        out.push_str("      </transition>\n");
    }
    for (i, arc) in net.arcs().iter().enumerate() {
        let (s, t) = match arc {
            Arc::Input { place, transition } => (place, transition),
            Arc::Output { transition, place } => (transition, place),
        };
        let _ = writeln!(
            out,
            "      <arc id=\"a{i}\" source=\"{}\" target=\"{}\"/>",
            xml_escape(s),
            xml_escape(t)
        );
    }
    out.push_str("    </page>\n  </net>\n</pnml>\n");
    out
}

/// Reads the PNML subset written by [`export_pnml`]: places, transitions,
/// unit arcs, initial markings and the source/sink designation.
pub fn parse_pnml(text: &str) -> Result<(PetriNet, Marking), PetriError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| PetriError::Pnml(e.to_string()))?;
    let text_child = |n: roxmltree::Node, tag: &str| -> Option<String> {
        n.children()
            .find(|c| c.has_tag_name(tag))
            .and_then(|c| c.children().find(|t| t.has_tag_name("text")))
            .and_then(|t| t.text())
            .map(|s| s.trim().to_string())
    };
    let id_of = |n: roxmltree::Node| -> Result<String, PetriError> {
        n.attribute("id")
            .map(str::to_string)
            .ok_or_else(|| PetriError::Pnml(format!("<{}> without id", n.tag_name().name())))
    };

    let mut net = PetriNet::new();
    let mut marking = Marking::new();
    for n in doc.descendants().filter(|n| n.has_tag_name("place")) {
        let id = id_of(n)?;
        net.add_place(id.clone())?;
        if let Some(tokens) = text_child(n, "initialMarking") {
            let k: u32 = tokens.parse().map_err(|_| PetriError::Pnml(format!("bad initialMarking on {id}")))?;
            marking.set(&id, k);
        }
        let designation = n
            .descendants()
            .find(|d| d.has_tag_name("designation"))
            .and_then(|d| d.text());
        match designation.map(str::trim) {
            Some("source") => net.designate(&id, Designation::Source)?,
            Some("sink") => net.designate(&id, Designation::Sink)?,
            Some(other) => return Err(PetriError::Pnml(format!("unknown designation `{other}`"))),
            None => {}
        }
    }
    for n in doc.descendants().filter(|n| n.has_tag_name("transition")) {
        let id = id_of(n)?;
        let label = text_child(n, "name").unwrap_or_else(|| id.clone());
        net.add_transition(id, label)?;
    }
    for n in doc.descendants().filter(|n| n.has_tag_name("arc")) {
        let (Some(s), Some(t)) = (n.attribute("source"), n.attribute("target")) else {
            return Err(PetriError::Pnml("arc without source/target".into()));
        };
        if net.has_place(s) {
            net.add_input_arc(s, t)?;
        } else if net.has_place(t) {
            net.add_output_arc(s, t)?;
        } else {
            return Err(PetriError::Pnml(format!("arc {s} -> {t} does not connect a place")));
        }
    }
    Ok((net, marking))
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn export_dot_net(net: &PetriNet) -> String {
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    for p in net.places() {
        let _ = writeln!(out, "  {} [shape=circle, label={}];", dot_quote(&format!("p:{p}")), dot_quote(p));
    }
    for (t, label) in &net.transitions {
        let _ = writeln!(out, "  {} [shape=box, label={}];", dot_quote(&format!("t:{t}")), dot_quote(label));
    }
    for arc in net.arcs() {
        let (s, t) = match &arc {
            Arc::Input { place, transition } => (format!("p:{place}"), format!("t:{transition}")),
            Arc::Output { transition, place } => (format!("t:{transition}"), format!("p:{place}")),
        };
        let _ = writeln!(out, "  {} -> {};", dot_quote(&s), dot_quote(&t));
    }
    out.push_str("}\n");
    out
}

pub fn export_dot_graph(g: &ReachabilityGraph) -> String {
    let mut out = String::from("digraph reachability {\n");
    for (i, m) in g.nodes.iter().enumerate() {
        let shape = if i == g.initial { "doublecircle" } else { "ellipse" };
        let _ = writeln!(out, "  M{i} [shape={shape}, label={}];", dot_quote(&m.to_string()));
    }
    for e in &g.edges {
        let _ = writeln!(out, "  M{} -> M{} [label={}];", e.from, e.to, dot_quote(&e.label));
    }
    out.push_str("}\n");
    out
}
