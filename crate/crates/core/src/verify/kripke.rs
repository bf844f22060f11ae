use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::{ControllerFsm, VerifyError};
use crate::plant_transform::{FunctionBlock, Guard};

/// (plant EC state, controller state, event in flight).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositeState {
    pub plant: String,
    pub ctl: String,
    pub pending: Option<String>,
}

impl fmt::Display for CompositeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.plant, self.ctl, self.pending.as_deref().unwrap_or("-"))
    }
}

/// What a Kripke transition does.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step {
    /// Plant takes a non-deterministic transition.
    Ndt,
    /// The pending event is consumed by its receiver.
    Deliver(String),
    /// The controller has no reaction to the pending sensor event.
    Ignored(String),
    /// The plant cannot accept the pending command.
    Dropped(String),
    /// Idle self-loop keeping the relation total.
    Stutter,
    /// Transition of a structure built by hand.
    Edge,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Ndt => f.write_str("NDT"),
            Step::Deliver(e) => write!(f, "deliver {e}"),
            Step::Ignored(e) => write!(f, "ignore {e}"),
            Step::Dropped(e) => write!(f, "drop {e}"),
            Step::Stutter => f.write_str("stutter"),
            Step::Edge => f.write_str("step"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Diagnostic {
    /// The controller had no transition for a sensor event in this state.
    IgnoredEvent { ctl_state: String, event: String },
    /// The plant had no transition for a command in this state.
    DroppedCommand { plant_state: String, event: String },
    /// A controller input the plant block never emits.
    NeverProduced { event: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::IgnoredEvent { ctl_state, event } => {
                write!(f, "ignored event: controller state {ctl_state} has no reaction to {event}")
            }
            Diagnostic::DroppedCommand { plant_state, event } => {
                write!(f, "dropped command: plant state {plant_state} cannot accept {event}")
            }
            Diagnostic::NeverProduced { event } => {
                write!(f, "controller input {event} is never produced by the plant")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KState {
    pub name: String,
    pub labels: BTreeSet<String>,
    /// Set for structures produced by [`compose`].
    pub composite: Option<CompositeState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTransition {
    pub target: usize,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeStructure {
    pub states: Vec<KState>,
    pub initial: usize,
    /// Outgoing transitions per state.
    pub successors: Vec<Vec<KTransition>>,
    /// Every proposition formulas may mention.
    pub propositions: BTreeSet<String>,
    pub diagnostics: BTreeSet<Diagnostic>,
}

impl KripkeStructure {
    /// A structure over states `0..labels.len()`; propositions are the
    /// union of the labels plus `extra`.
    pub fn from_parts(
        labels: Vec<BTreeSet<String>>,
        initial: usize,
        edges: &[(usize, usize)],
        extra: impl IntoIterator<Item = String>,
    ) -> Self {
        let mut successors = vec![Vec::new(); labels.len()];
        for &(a, b) in edges {
            if !successors[a].iter().any(|t: &KTransition| t.target == b) {
                successors[a].push(KTransition { target: b, step: Step::Edge });
            }
        }
        let propositions = labels.iter().flatten().cloned().chain(extra).collect();
        KripkeStructure {
            states: labels
                .into_iter()
                .enumerate()
                .map(|(i, labels)| KState { name: format!("s{i}"), labels, composite: None })
                .collect(),
            initial,
            successors,
            propositions,
            diagnostics: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.successors.iter().all(|s| !s.is_empty())
    }

    pub fn has_transition(&self, from: usize, to: usize) -> bool {
        self.successors[from].iter().any(|t| t.target == to)
    }

    pub fn transition_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }
}

/// Checks the event wiring between plant and controller. Returns the
/// controller inputs the plant never produces.
pub(crate) fn check_alphabets(plant: &FunctionBlock, ctl: &ControllerFsm) -> Result<BTreeSet<String>, VerifyError> {
    if let Some(e) = ctl.outputs.iter().find(|e| !plant.event_inputs.contains(*e)) {
        return Err(VerifyError::AlphabetMismatch(format!("controller output {e} is not a plant event input")));
    }
    if let Some(e) = ctl.inputs.iter().find(|e| plant.event_inputs.contains(*e)) {
        return Err(VerifyError::AlphabetMismatch(format!("controller input {e} is a plant event input")));
    }
    Ok(ctl.inputs.iter().filter(|e| !plant.event_outputs.contains(*e)).cloned().collect())
}

/// Pending-event product of plant and controller.
///
/// From `(p, c, -)` the plant may take any NDT of `p`, after which the
/// emission of the new state (if any) is pending; a stutter loop keeps the
/// relation total. A pending sensor event is consumed by the controller,
/// whose optional output becomes pending. A pending command is consumed by
/// the plant. Unconsumable events are discarded and recorded as
/// diagnostics.
pub fn compose(plant: &FunctionBlock, ctl: &ControllerFsm) -> Result<KripkeStructure, VerifyError> {
    let never = check_alphabets(plant, ctl)?;
    let mut diagnostics: BTreeSet<Diagnostic> =
        never.into_iter().map(|event| Diagnostic::NeverProduced { event }).collect();

    let emission = |p: &str| plant.emission(p).map(str::to_string);
    let start = CompositeState {
        plant: plant.initial.clone(),
        ctl: ctl.initial.clone(),
        pending: emission(&plant.initial),
    };
    let mut states = vec![start.clone()];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut successors: Vec<Vec<KTransition>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        let mut moves: Vec<(CompositeState, Step)> = Vec::new();
        match &s.pending {
            None => {
                for t in plant.transitions_from(&s.plant).filter(|t| t.guard == Guard::Ndt) {
                    let next = CompositeState { plant: t.to.clone(), ctl: s.ctl.clone(), pending: emission(&t.to) };
                    moves.push((next, Step::Ndt));
                }
                moves.push((s.clone(), Step::Stutter));
            }
            Some(e) if plant.event_inputs.contains(e) => {
                let guard = Guard::Event(e.clone());
                let mut accepted = false;
                for t in plant.transitions_from(&s.plant).filter(|t| t.guard == guard) {
                    accepted = true;
                    let next = CompositeState { plant: t.to.clone(), ctl: s.ctl.clone(), pending: emission(&t.to) };
                    moves.push((next, Step::Deliver(e.clone())));
                }
                if !accepted {
                    diagnostics.insert(Diagnostic::DroppedCommand { plant_state: s.plant.clone(), event: e.clone() });
                    moves.push((CompositeState { pending: None, ..s.clone() }, Step::Dropped(e.clone())));
                }
            }
            Some(e) => match ctl.step(&s.ctl, e) {
                Some(t) => {
                    let next = CompositeState { plant: s.plant.clone(), ctl: t.to.clone(), pending: t.output.clone() };
                    moves.push((next, Step::Deliver(e.clone())));
                }
                None => {
                    diagnostics.insert(Diagnostic::IgnoredEvent { ctl_state: s.ctl.clone(), event: e.clone() });
                    moves.push((CompositeState { pending: None, ..s.clone() }, Step::Ignored(e.clone())));
                }
            },
        }
        let mut out = Vec::with_capacity(moves.len());
        for (next, step) in moves {
            let j = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            if !out.iter().any(|t: &KTransition| t.target == j && t.step == step) {
                out.push(KTransition { target: j, step });
            }
        }
        successors.push(out);
    }

    let propositions = plant
        .sensors
        .iter()
        .cloned()
        .chain(plant.states.iter().map(|s| format!("plant_state={}", s.id)))
        .chain(ctl.states.iter().map(|c| format!("ctl_state={c}")))
        .collect();
    let states = states
        .into_iter()
        .map(|cs| {
            let ec = plant.state(&cs.plant).expect("composite plant state exists");
            let labels = ec
                .valuation
                .iter()
                .filter(|(_, v)| **v)
                .map(|(k, _)| k.clone())
                .chain([format!("plant_state={}", cs.plant), format!("ctl_state={}", cs.ctl)])
                .collect();
            KState { name: cs.to_string(), labels, composite: Some(cs) }
        })
        .collect();
    Ok(KripkeStructure { states, initial: 0, successors, propositions, diagnostics })
}
