//! All stages chained, from a raw event log to verdicts.

use std::fmt;
use std::time::{Duration, Instant};

use crate::discovery::{alpha_discover, fitness};
use crate::event_log::{filter_component, group_traces, EventLog, TraceSet};
use crate::petri::{default_initial_marking, reachability_graph, strip_boundary, Marking, PetriError, PetriNet, ReachabilityGraph, DEFAULT_BOUND};
use crate::plant_transform::{build_plant_fb, build_plant_fb_split, fsm_from_graph, ActionMap, Fsm, FunctionBlock, TransformError};
use crate::sim_fixture;
use crate::smv_emit::{emit_closed_loop, SmvDocument};
use crate::verify::{check_ctl, compose, parse_ctl, ControllerFsm, Ctl, KripkeStructure, Verdict};
use crate::Result;

/// The property checked when no other is given: HOME and END are never
/// both set.
pub const DEFAULT_SPEC: &str = "AG !(HOME & END)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Filter,
    Mine,
    Strip,
    Reach,
    Transform,
    EmitSmv,
    Verify,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Filter, Stage::Mine, Stage::Strip, Stage::Reach, Stage::Transform, Stage::EmitSmv, Stage::Verify];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Filter => "filter",
            Stage::Mine => "mine",
            Stage::Strip => "strip",
            Stage::Reach => "reach",
            Stage::Transform => "transform",
            Stage::EmitSmv => "emit-smv",
            Stage::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub component: String,
    pub bound: usize,
    /// Initial marking of the stripped net. When absent, places without
    /// producers are marked, falling back to the input places of
    /// `rest_action`.
    pub marking: Option<Marking>,
    pub rest_action: String,
    pub action_map: ActionMap,
    pub controller: ControllerFsm,
    pub plant_name: String,
    pub specs: Vec<String>,
}

impl PipelineConfig {
    /// Settings of the cylinder fixture.
    pub fn fixture() -> Self {
        PipelineConfig {
            component: sim_fixture::COMPONENT.to_string(),
            bound: DEFAULT_BOUND,
            marking: None,
            rest_action: sim_fixture::REST_ACTION.to_string(),
            action_map: sim_fixture::fixture_action_map(),
            controller: sim_fixture::fixture_controller(),
            plant_name: "PLANT".to_string(),
            specs: vec![DEFAULT_SPEC.to_string()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpecResult {
    pub text: String,
    pub formula: Ctl,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub filtered: EventLog,
    pub traces: TraceSet,
    pub mined: PetriNet,
    pub fitness: f64,
    pub stripped: PetriNet,
    pub initial_marking: Marking,
    pub graph: ReachabilityGraph,
    pub fsm: Fsm,
    pub fb: FunctionBlock,
    /// EC states added by splitting on conflicting latch valuations.
    pub split_states: usize,
    pub smv: SmvDocument,
    pub kripke: KripkeStructure,
    pub results: Vec<SpecResult>,
    pub timings: Vec<(Stage, Duration)>,
}

impl PipelineRun {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.verdict.holds)
    }
}

/// Marking used for the stripped net when none is configured.
pub fn initial_marking(net: &PetriNet, rest_action: &str) -> Result<Marking> {
    match default_initial_marking(net) {
        Err(PetriError::MarkingRequired) => Ok(sim_fixture::rest_marking(net, rest_action)?),
        other => Ok(other?),
    }
}

/// Plant block for `fsm`, splitting EC states only when the strict
/// labelling is ambiguous. Returns the block and the number of added states.
pub fn transform(fsm: &Fsm, map: &ActionMap, name: &str) -> Result<(FunctionBlock, usize)> {
    let init = &map.initial_valuation;
    let (mut fb, added) = match build_plant_fb(fsm, map, init) {
        Ok(fb) => (fb, 0),
        Err(TransformError::InconsistentLabeling(_)) => {
            let strict_states = build_plant_fb_skeleton_size(fsm, map)?;
            let fb = build_plant_fb_split(fsm, map, init)?;
            let added = fb.states.len() - strict_states;
            (fb, added)
        }
        Err(e) => return Err(e.into()),
    };
    fb.name = name.to_string();
    Ok((fb, added))
}

fn build_plant_fb_skeleton_size(fsm: &Fsm, map: &ActionMap) -> Result<usize> {
    // labelling with no latches never conflicts, so this is the skeleton
    let mut bare = map.clone();
    for kind in bare.entries.values_mut() {
        if let crate::plant_transform::ActionKind::Sensor(effect) = kind {
            *effect = None;
        }
    }
    Ok(build_plant_fb(fsm, &bare, &Default::default())?.states.len())
}

fn timed<T>(timings: &mut Vec<(Stage, Duration)>, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.push((stage, start.elapsed()));
    Ok(out)
}

pub fn run(raw: &EventLog, cfg: &PipelineConfig) -> Result<PipelineRun> {
    let specs: Vec<(String, Ctl)> = cfg
        .specs
        .iter()
        .map(|s| Ok((s.clone(), parse_ctl(s)?)))
        .collect::<Result<_>>()?;
    let mut timings = Vec::new();
    let t = &mut timings;

    let filtered = timed(t, Stage::Filter, || Ok(filter_component(raw, &cfg.component)))?;
    let (traces, mined, fit) = timed(t, Stage::Mine, || {
        let traces = group_traces(&filtered)?;
        let net = alpha_discover(&traces)?;
        let fit = fitness(&net, &traces)?;
        Ok((traces, net, fit))
    })?;
    let stripped = timed(t, Stage::Strip, || Ok(strip_boundary(&mined)?))?;
    let (initial_marking, graph) = timed(t, Stage::Reach, || {
        let m0 = match &cfg.marking {
            Some(m) => m.clone(),
            None => initial_marking(&stripped, &cfg.rest_action)?,
        };
        let g = reachability_graph(&stripped, &m0, cfg.bound)?;
        Ok((m0, g))
    })?;
    let (fsm, fb, split_states) = timed(t, Stage::Transform, || {
        let fsm = fsm_from_graph(&graph);
        let (fb, added) = transform(&fsm, &cfg.action_map, &cfg.plant_name)?;
        Ok((fsm, fb, added))
    })?;
    let formulas: Vec<Ctl> = specs.iter().map(|(_, f)| f.clone()).collect();
    let smv = timed(t, Stage::EmitSmv, || Ok(emit_closed_loop(&fb, &cfg.controller, &formulas)?))?;
    let (kripke, results) = timed(t, Stage::Verify, || {
        let k = compose(&fb, &cfg.controller)?;
        let results = specs
            .iter()
            .map(|(text, formula)| {
                Ok(SpecResult { text: text.clone(), formula: formula.clone(), verdict: check_ctl(&k, formula)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((k, results))
    })?;

    Ok(PipelineRun {
        filtered,
        traces,
        mined,
        fitness: fit,
        stripped,
        initial_marking,
        graph,
        fsm,
        fb,
        split_states,
        smv,
        kripke,
        results,
        timings,
    })
}
