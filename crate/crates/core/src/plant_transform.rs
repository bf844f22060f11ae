//! From reachability graph to plant function block.
//!
//! The reachability graph is renamed into an [`Fsm`]. Its alphabet is split
//! into control actions (commands the plant receives) and sensor actions
//! (signals the plant produces). Control actions become event inputs of the
//! block and guard ECC transitions directly. Every sensor-labelled edge
//! becomes a non-deterministic transition (NDT) whose target state emits the
//! sensor event on entry. When a target cannot carry that emission itself
//! (it is also entered by other labels, it is entered by a control edge, or
//! the edge is a self-loop) a fresh intermediate state emits instead and
//! hands over to the target with a silent NDT.
//!
//! Each EC state also carries a valuation of the sensor latches, obtained
//! by propagating the effects of sensor actions from the initial valuation.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::is_identifier;
use crate::petri::ReachabilityGraph;

/// Guard keyword for non-deterministic transitions in the FB document.
pub const NDT: &str = "NDT";
pub const FB_HEADER: &str = "plantfb v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("action `{0}` is not classified by the action map")]
    UnmappedAction(String),
    #[error("sensor valuation conflict at state `{0}`")]
    InconsistentLabeling(String),
    #[error("sensor variable `{0}` has no initial value")]
    MissingInitialValue(String),
    #[error("invalid FSM: {0}")]
    InvalidFsm(String),
    #[error("action map line {line}: {msg}")]
    ActionMapParse { line: usize, msg: String },
    #[error("FB document line {line}: {msg}")]
    FbParse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FsmEdge {
    pub from: String,
    pub label: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsm {
    pub states: Vec<String>,
    pub initial: String,
    /// Deduplicated, in insertion order.
    pub edges: Vec<FsmEdge>,
    pub alphabet: BTreeSet<String>,
}

impl Fsm {
    pub fn new(states: Vec<String>, initial: impl Into<String>, edges: Vec<FsmEdge>) -> Result<Self, TransformError> {
        let initial = initial.into();
        let known: HashSet<&str> = states.iter().map(String::as_str).collect();
        if known.len() != states.len() {
            return Err(TransformError::InvalidFsm("duplicate state".into()));
        }
        if !known.contains(initial.as_str()) {
            return Err(TransformError::InvalidFsm(format!("unknown initial state `{initial}`")));
        }
        if let Some(e) = edges.iter().find(|e| !known.contains(e.from.as_str()) || !known.contains(e.to.as_str())) {
            return Err(TransformError::InvalidFsm(format!("edge {} -{}-> {} leaves the state set", e.from, e.label, e.to)));
        }
        let mut seen = HashSet::new();
        let edges: Vec<FsmEdge> = edges.into_iter().filter(|e| seen.insert(e.clone())).collect();
        let alphabet = edges.iter().map(|e| e.label.clone()).collect();
        Ok(Fsm { states, initial, edges, alphabet })
    }
}

/// Renames markings to `Q0..Qn` in breadth-first order from the initial node.
pub fn fsm_from_graph(g: &ReachabilityGraph) -> Fsm {
    let mut order = vec![usize::MAX; g.nodes.len()];
    let mut next = 0;
    let mut queue = VecDeque::from([g.initial]);
    order[g.initial] = 0;
    next += 1;
    while let Some(i) = queue.pop_front() {
        for e in g.successors(i) {
            if order[e.to] == usize::MAX {
                order[e.to] = next;
                next += 1;
                queue.push_back(e.to);
            }
        }
    }
    // nodes the builder did not reach from `initial` keep their relative order
    for o in order.iter_mut().filter(|o| **o == usize::MAX) {
        *o = next;
        next += 1;
    }
    let name = |i: usize| format!("Q{}", order[i]);
    let mut states: Vec<(usize, String)> = (0..g.nodes.len()).map(|i| (order[i], name(i))).collect();
    states.sort();
    let edges = g
        .edges
        .iter()
        .map(|e| FsmEdge { from: name(e.from), label: e.label.clone(), to: name(e.to) })
        .collect();
    Fsm::new(states.into_iter().map(|(_, s)| s).collect(), name(g.initial), edges)
        .expect("reachability graph edges stay within its nodes")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorEffect {
    pub variable: String,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionKind {
    Control,
    /// A sensor signal, optionally setting one latch.
    Sensor(Option<SensorEffect>),
}

/// Classification of actions into control and sensor events.
///
/// Text form, one entry per line (`#` starts a comment):
///
/// ```text
/// EXT: control
/// HOME_ON: sensor HOME=true
/// initial: HOME=true END=false
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionMap {
    pub entries: BTreeMap<String, ActionKind>,
    /// Latch values at the initial state, from the `initial:` line.
    pub initial_valuation: BTreeMap<String, bool>,
}

impl ActionMap {
    pub fn control(mut self, action: &str) -> Self {
        self.entries.insert(action.to_string(), ActionKind::Control);
        self
    }

    pub fn sensor(mut self, action: &str, effect: Option<(&str, bool)>) -> Self {
        let effect = effect.map(|(v, b)| SensorEffect { variable: v.to_string(), value: b });
        self.entries.insert(action.to_string(), ActionKind::Sensor(effect));
        self
    }

    pub fn kind(&self, action: &str) -> Option<&ActionKind> {
        self.entries.get(action)
    }

    pub fn effect(&self, action: &str) -> Option<&SensorEffect> {
        match self.entries.get(action) {
            Some(ActionKind::Sensor(Some(e))) => Some(e),
            _ => None,
        }
    }

    /// Variables named by any sensor effect.
    pub fn sensor_variables(&self) -> BTreeSet<String> {
        self.entries
            .values()
            .filter_map(|k| match k {
                ActionKind::Sensor(Some(e)) => Some(e.variable.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, TransformError> {
        let mut map = ActionMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| TransformError::ActionMapParse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (name, rest) = content
                .split_once(':')
                .ok_or_else(|| err("expected `NAME: kind`".into()))?;
            let (name, mut words) = (name.trim(), rest.split_whitespace());
            if name == "initial" {
                for w in words {
                    let (var, val) = parse_assignment(w).ok_or_else(|| err(format!("bad assignment `{w}`")))?;
                    map.initial_valuation.insert(var, val);
                }
                continue;
            }
            if !is_identifier(name) || name == NDT {
                return Err(err(format!("`{name}` is not a usable action name")));
            }
            if map.entries.contains_key(name) {
                return Err(err(format!("`{name}` classified twice")));
            }
            let kind = match words.next() {
                Some("control") => ActionKind::Control,
                Some("sensor") => match words.next() {
                    None => ActionKind::Sensor(None),
                    Some(w) => {
                        let (variable, value) =
                            parse_assignment(w).ok_or_else(|| err(format!("bad effect `{w}`")))?;
                        ActionKind::Sensor(Some(SensorEffect { variable, value }))
                    }
                },
                other => return Err(err(format!("unknown kind `{}`", other.unwrap_or("")))),
            };
            if let Some(extra) = words.next() {
                return Err(err(format!("unexpected `{extra}`")));
            }
            map.entries.insert(name.to_string(), kind);
        }
        Ok(map)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, kind) in &self.entries {
            match kind {
                ActionKind::Control => {
                    let _ = writeln!(out, "{name}: control");
                }
                ActionKind::Sensor(None) => {
                    let _ = writeln!(out, "{name}: sensor");
                }
                ActionKind::Sensor(Some(e)) => {
                    let _ = writeln!(out, "{name}: sensor {}={}", e.variable, e.value);
                }
            }
        }
        if !self.initial_valuation.is_empty() {
            out.push_str("initial:");
            for (v, b) in &self.initial_valuation {
                let _ = write!(out, " {v}={b}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_assignment(w: &str) -> Option<(String, bool)> {
    let (var, val) = w.split_once('=')?;
    if !is_identifier(var) {
        return None;
    }
    let val = match val {
        "true" | "TRUE" => true,
        "false" | "FALSE" => false,
        _ => return None,
    };
    Some((var.to_string(), val))
}

/// Splits the FSM alphabet into (control, sensor) actions.
pub fn classify_alphabet(fsm: &Fsm, map: &ActionMap) -> Result<(BTreeSet<String>, BTreeSet<String>), TransformError> {
    let mut control = BTreeSet::new();
    let mut sensor = BTreeSet::new();
    for a in &fsm.alphabet {
        match map.kind(a) {
            Some(ActionKind::Control) => control.insert(a.clone()),
            Some(ActionKind::Sensor(_)) => sensor.insert(a.clone()),
            None => return Err(TransformError::UnmappedAction(a.clone())),
        };
    }
    Ok((control, sensor))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcState {
    pub id: String,
    /// Output event emitted on entry.
    pub emission: Option<String>,
    pub valuation: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    Event(String),
    Ndt,
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Event(e) => f.write_str(e),
            Guard::Ndt => f.write_str(NDT),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EcTransition {
    pub from: String,
    pub guard: Guard,
    pub to: String,
}

/// Basic function block of the plant: event interface plus ECC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionBlock {
    pub name: String,
    pub event_inputs: BTreeSet<String>,
    pub event_outputs: BTreeSet<String>,
    pub sensors: BTreeSet<String>,
    pub states: Vec<EcState>,
    pub initial: String,
    pub transitions: Vec<EcTransition>,
}

impl FunctionBlock {
    pub fn state(&self, id: &str) -> Option<&EcState> {
        self.states.iter().find(|s| s.id == id)
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn transitions_from<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a EcTransition> + 'a {
        self.transitions.iter().filter(move |t| t.from == id)
    }

    pub fn emission(&self, id: &str) -> Option<&str> {
        self.state(id).and_then(|s| s.emission.as_deref())
    }
}

/// ECC skeleton of `fsm`: interface, states with emissions, transitions.
/// Valuations are left empty.
fn build_skeleton(fsm: &Fsm, map: &ActionMap, initial_valuation: &BTreeMap<String, bool>) -> Result<FunctionBlock, TransformError> {
    let (control, sensor) = classify_alphabet(fsm, map)?;
    let sensors: BTreeSet<String> = map
        .sensor_variables()
        .into_iter()
        .chain(initial_valuation.keys().cloned())
        .collect();
    if let Some(v) = sensors.iter().find(|v| !initial_valuation.contains_key(*v)) {
        return Err(TransformError::MissingInitialValue(v.clone()));
    }

    // a state emits directly when every way into it is the same sensor action
    let mut direct: BTreeMap<&str, Option<&str>> = BTreeMap::new();
    for e in &fsm.edges {
        let verdict = if sensor.contains(&e.label) && e.from != e.to { Some(e.label.as_str()) } else { None };
        direct
            .entry(e.to.as_str())
            .and_modify(|d| {
                if *d != verdict {
                    *d = None
                }
            })
            .or_insert(verdict);
    }

    let mut states: Vec<EcState> = fsm
        .states
        .iter()
        .map(|q| EcState {
            id: q.clone(),
            emission: direct.get(q.as_str()).copied().flatten().map(str::to_string),
            valuation: BTreeMap::new(),
        })
        .collect();
    let mut taken: HashSet<String> = fsm.states.iter().cloned().collect();
    let mut fresh = 0usize;
    let mut transitions = Vec::new();
    for e in &fsm.edges {
        if control.contains(&e.label) {
            transitions.push(EcTransition { from: e.from.clone(), guard: Guard::Event(e.label.clone()), to: e.to.clone() });
        } else if direct.get(e.to.as_str()).copied().flatten() == Some(e.label.as_str()) {
            transitions.push(EcTransition { from: e.from.clone(), guard: Guard::Ndt, to: e.to.clone() });
        } else {
            let id = fresh_name(&mut taken, &mut fresh, "I");
            states.push(EcState { id: id.clone(), emission: Some(e.label.clone()), valuation: BTreeMap::new() });
            transitions.push(EcTransition { from: e.from.clone(), guard: Guard::Ndt, to: id.clone() });
            transitions.push(EcTransition { from: id, guard: Guard::Ndt, to: e.to.clone() });
        }
    }
    Ok(FunctionBlock {
        name: "PLANT".into(),
        event_inputs: control,
        event_outputs: sensor,
        sensors,
        states,
        initial: fsm.initial.clone(),
        transitions,
    })
}

fn fresh_name(taken: &mut HashSet<String>, counter: &mut usize, prefix: &str) -> String {
    loop {
        let candidate = format!("{prefix}{counter}");
        *counter += 1;
        if taken.insert(candidate.clone()) {
            return candidate;
        }
    }
}

fn enter(
    map: &ActionMap,
    current: &BTreeMap<String, bool>,
    target: &EcState,
) -> BTreeMap<String, bool> {
    let mut next = current.clone();
    if let Some(effect) = target.emission.as_deref().and_then(|s| map.effect(s)) {
        next.insert(effect.variable.clone(), effect.value);
    }
    next
}

/// Recomputes every state's valuation of `fb` by propagating sensor effects
/// from `initial_valuation`. Fails when two paths disagree on a state.
/// States unreachable from the initial state keep `initial_valuation`.
pub fn label_valuations(
    fb: &FunctionBlock,
    map: &ActionMap,
    initial_valuation: &BTreeMap<String, bool>,
) -> Result<FunctionBlock, TransformError> {
    let index: BTreeMap<&str, usize> = fb.states.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    let mut assigned: Vec<Option<BTreeMap<String, bool>>> = vec![None; fb.states.len()];
    let start = index[fb.initial.as_str()];
    assigned[start] = Some(initial_valuation.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let current = assigned[i].clone().expect("queued states are assigned");
        for t in fb.transitions_from(&fb.states[i].id) {
            let j = index[t.to.as_str()];
            let next = enter(map, &current, &fb.states[j]);
            match &assigned[j] {
                Some(existing) if *existing != next => {
                    return Err(TransformError::InconsistentLabeling(fb.states[j].id.clone()))
                }
                Some(_) => {}
                None => {
                    assigned[j] = Some(next);
                    queue.push_back(j);
                }
            }
        }
    }
    let mut out = fb.clone();
    for (s, v) in out.states.iter_mut().zip(assigned) {
        s.valuation = v.unwrap_or_else(|| initial_valuation.clone());
    }
    Ok(out)
}

/// Builds the plant block for `fsm`: control edges keep their event as
/// guard, sensor edges become NDTs into emitting states. Fails with
/// [`TransformError::InconsistentLabeling`] when latch propagation is
/// ambiguous; see [`build_plant_fb_split`] for the splitting variant.
pub fn build_plant_fb(
    fsm: &Fsm,
    map: &ActionMap,
    initial_valuation: &BTreeMap<String, bool>,
) -> Result<FunctionBlock, TransformError> {
    label_valuations(&build_skeleton(fsm, map, initial_valuation)?, map, initial_valuation)
}

/// Like [`build_plant_fb`], but an EC state reached with several latch
/// valuations is duplicated once per valuation instead of failing. The
/// first valuation found keeps the original id, later ones get `<id>_v<n>`.
/// Without conflicts the result equals [`build_plant_fb`].
pub fn build_plant_fb_split(
    fsm: &Fsm,
    map: &ActionMap,
    initial_valuation: &BTreeMap<String, bool>,
) -> Result<FunctionBlock, TransformError> {
    let skeleton = build_skeleton(fsm, map, initial_valuation)?;
    if let Ok(fb) = label_valuations(&skeleton, map, initial_valuation) {
        return Ok(fb);
    }
    let index: BTreeMap<&str, usize> = skeleton.states.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    let mut taken: HashSet<String> = skeleton.states.iter().map(|s| s.id.clone()).collect();
    let mut variants: Vec<Vec<(BTreeMap<String, bool>, String)>> = vec![Vec::new(); skeleton.states.len()];
    let mut counters = vec![1usize; skeleton.states.len()];
    let mut extra: Vec<EcState> = Vec::new();
    let mut transitions = Vec::new();

    let start = index[skeleton.initial.as_str()];
    variants[start].push((initial_valuation.clone(), skeleton.initial.clone()));
    let mut queue = VecDeque::from([(start, initial_valuation.clone())]);
    while let Some((i, val)) = queue.pop_front() {
        let from = variants[i].iter().find(|(v, _)| *v == val).expect("queued variant exists").1.clone();
        for t in skeleton.transitions_from(&skeleton.states[i].id) {
            let j = index[t.to.as_str()];
            let next = enter(map, &val, &skeleton.states[j]);
            let to = match variants[j].iter().find(|(v, _)| *v == next) {
                Some((_, id)) => id.clone(),
                None => {
                    let id = if variants[j].is_empty() {
                        skeleton.states[j].id.clone()
                    } else {
                        let base = format!("{}_v", skeleton.states[j].id);
                        fresh_name(&mut taken, &mut counters[j], &base)
                    };
                    if !variants[j].is_empty() {
                        extra.push(EcState { id: id.clone(), emission: skeleton.states[j].emission.clone(), valuation: next.clone() });
                    }
                    variants[j].push((next.clone(), id.clone()));
                    queue.push_back((j, next));
                    id
                }
            };
            transitions.push(EcTransition { from: from.clone(), guard: t.guard.clone(), to });
        }
    }
    let mut states: Vec<EcState> = skeleton
        .states
        .iter()
        .zip(&variants)
        .map(|(s, vs)| EcState {
            valuation: vs.first().map_or_else(|| initial_valuation.clone(), |(v, _)| v.clone()),
            ..s.clone()
        })
        .collect();
    states.extend(extra);
    // unreachable skeleton states keep their own transitions
    for t in &skeleton.transitions {
        if variants[index[t.from.as_str()]].is_empty() {
            transitions.push(t.clone());
        }
    }
    Ok(FunctionBlock { states, transitions, ..skeleton })
}

fn join_words<'a>(words: impl IntoIterator<Item = &'a String>) -> String {
    words.into_iter().map(|w| format!(" {w}")).collect()
}

/// Line-oriented `plantfb v1` document.
pub fn export_fb(fb: &FunctionBlock) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FB_HEADER}");
    let _ = writeln!(out, "name {}", fb.name);
    let _ = writeln!(out, "inputs{}", join_words(&fb.event_inputs));
    let _ = writeln!(out, "outputs{}", join_words(&fb.event_outputs));
    let _ = writeln!(out, "sensors{}", join_words(&fb.sensors));
    let _ = writeln!(out, "initial {}", fb.initial);
    for s in &fb.states {
        let emit = s.emission.as_deref().unwrap_or("-");
        let vals: String = s.valuation.iter().map(|(k, v)| format!(" {k}={v}")).collect();
        let _ = writeln!(out, "state {} emit {emit} valuation{vals}", s.id);
    }
    for t in &fb.transitions {
        let _ = writeln!(out, "transition {} {} {}", t.from, t.guard, t.to);
    }
    out
}

pub fn parse_fb(text: &str) -> Result<FunctionBlock, TransformError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let bad = |line: usize, msg: &str| TransformError::FbParse { line, msg: msg.to_string() };
    match lines.next() {
        Some((_, FB_HEADER)) => {}
        _ => return Err(bad(1, "missing `plantfb v1` header")),
    }
    let mut fb = FunctionBlock {
        name: String::new(),
        event_inputs: BTreeSet::new(),
        event_outputs: BTreeSet::new(),
        sensors: BTreeSet::new(),
        states: Vec::new(),
        initial: String::new(),
        transitions: Vec::new(),
    };
    for (line, content) in lines {
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let key = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        let words_set = |rest: &[&str]| rest.iter().map(|w| w.to_string()).collect::<BTreeSet<_>>();
        match key {
            "name" => fb.name = rest.join(" "),
            "inputs" => fb.event_inputs = words_set(&rest),
            "outputs" => fb.event_outputs = words_set(&rest),
            "sensors" => fb.sensors = words_set(&rest),
            "initial" => fb.initial = rest.first().ok_or_else(|| bad(line, "initial without state"))?.to_string(),
            "state" => {
                let [id, "emit", emit, "valuation", vals @ ..] = &rest[..] else {
                    return Err(bad(line, "expected `state ID emit EVENT|- valuation VAR=BOOL...`"));
                };
                let mut valuation = BTreeMap::new();
                for v in vals {
                    let (k, b) = parse_assignment(v).ok_or_else(|| bad(line, "bad valuation entry"))?;
                    valuation.insert(k, b);
                }
                let emission = (*emit != "-").then(|| emit.to_string());
                fb.states.push(EcState { id: id.to_string(), emission, valuation });
            }
            "transition" => {
                let [from, guard, to] = rest[..] else {
                    return Err(bad(line, "expected `transition FROM GUARD TO`"));
                };
                let guard = if guard == NDT { Guard::Ndt } else { Guard::Event(guard.to_string()) };
                fb.transitions.push(EcTransition { from: from.into(), guard, to: to.into() });
            }
            other => return Err(bad(line, &format!("unknown key `{other}`"))),
        }
    }
    validate_fb(&fb).map_err(|msg| bad(0, &msg))?;
    Ok(fb)
}

fn validate_fb(fb: &FunctionBlock) -> Result<(), String> {
    let ids: HashSet<&str> = fb.states.iter().map(|s| s.id.as_str()).collect();
    if ids.len() != fb.states.len() {
        return Err("duplicate state id".into());
    }
    if !ids.contains(fb.initial.as_str()) {
        return Err(format!("unknown initial state `{}`", fb.initial));
    }
    if let Some(e) = fb.event_inputs.intersection(&fb.event_outputs).next() {
        return Err(format!("event `{e}` is both input and output"));
    }
    for s in &fb.states {
        if let Some(e) = &s.emission {
            if !fb.event_outputs.contains(e) {
                return Err(format!("state `{}` emits undeclared `{e}`", s.id));
            }
        }
        if s.valuation.keys().collect::<BTreeSet<_>>() != fb.sensors.iter().collect() {
            return Err(format!("state `{}` does not value exactly the declared sensors", s.id));
        }
    }
    for t in &fb.transitions {
        if !ids.contains(t.from.as_str()) || !ids.contains(t.to.as_str()) {
            return Err(format!("transition {} -> {} references an unknown state", t.from, t.to));
        }
        if let Guard::Event(e) = &t.guard {
            if !fb.event_inputs.contains(e) {
                return Err(format!("guard `{e}` is not an event input"));
            }
        }
    }
    Ok(())
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of the ECC: states show their emission and true latches.
pub fn export_ecc_dot(fb: &FunctionBlock) -> String {
    let mut out = format!("digraph {} {{\n", dot_quote(&fb.name));
    for s in &fb.states {
        let shape = if s.id == fb.initial { "doublecircle" } else { "box" };
        let mut label = s.id.clone();
        if let Some(e) = &s.emission {
            label += &format!("\\n/{e}");
        }
        let on: Vec<&str> = s.valuation.iter().filter(|(_, v)| **v).map(|(k, _)| k.as_str()).collect();
        if !on.is_empty() {
            label += &format!("\\n[{}]", on.join(","));
        }
        let _ = writeln!(out, "  {} [shape={shape}, label=\"{label}\"];", dot_quote(&s.id));
    }
    for t in &fb.transitions {
        let style = if t.guard == Guard::Ndt { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}{style}];",
            dot_quote(&t.from),
            dot_quote(&t.to),
            dot_quote(&t.guard.to_string())
        );
    }
    out.push_str("}\n");
    out
}
