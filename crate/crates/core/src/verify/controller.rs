use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use super::VerifyError;
use crate::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtlTransition {
    pub from: String,
    pub input: String,
    pub output: Option<String>,
    pub to: String,
}

/// Deterministic controller: reacts to plant sensor events, optionally
/// answering with one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerFsm {
    pub states: Vec<String>,
    pub initial: String,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub transitions: Vec<CtlTransition>,
}

impl ControllerFsm {
    pub fn step(&self, state: &str, input: &str) -> Option<&CtlTransition> {
        self.transitions.iter().find(|t| t.from == state && t.input == input)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let parse_err = |msg: String| VerifyError::ParseError { line: 0, msg };
        let states: HashSet<&str> = self.states.iter().map(String::as_str).collect();
        if !states.contains(self.initial.as_str()) {
            return Err(parse_err(format!("unknown initial state `{}`", self.initial)));
        }
        let mut seen = HashSet::new();
        for t in &self.transitions {
            for s in [&t.from, &t.to] {
                if !states.contains(s.as_str()) {
                    return Err(parse_err(format!("unknown state `{s}`")));
                }
            }
            if !self.inputs.contains(&t.input) {
                return Err(VerifyError::UndeclaredEvent(t.input.clone()));
            }
            if let Some(o) = &t.output {
                if !self.outputs.contains(o) {
                    return Err(VerifyError::UndeclaredEvent(o.clone()));
                }
            }
            if !seen.insert((&t.from, &t.input)) {
                return Err(VerifyError::NondeterministicController {
                    state: t.from.clone(),
                    event: t.input.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let _ = writeln!(out, "initial: {}", self.initial);
        let _ = writeln!(out, "inputs: {}", self.inputs.iter().cloned().collect::<Vec<_>>().join(" "));
        let _ = writeln!(out, "outputs: {}", self.outputs.iter().cloned().collect::<Vec<_>>().join(" "));
        for t in &self.transitions {
            let _ = writeln!(out, "{} --{}/{}--> {}", t.from, t.input, t.output.as_deref().unwrap_or(""), t.to);
        }
        out
    }
}

/// Reads the line-oriented controller format:
///
/// ```text
/// states: C0 C1
/// initial: C0
/// inputs: HOME_ON HOME_OFF
/// outputs: EXT
/// C0 --HOME_ON/EXT--> C1
/// C1 --HOME_OFF/--> C0
/// ```
pub fn parse_controller(text: &str) -> Result<ControllerFsm, VerifyError> {
    let mut states = None;
    let mut initial = None;
    let mut inputs = None;
    let mut outputs = None;
    let mut transitions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: &str| VerifyError::ParseError { line, msg: msg.to_string() };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words = |rest: &str| -> Result<Vec<String>, VerifyError> {
            rest.split_whitespace()
                .map(|w| if is_identifier(w) { Ok(w.to_string()) } else { Err(err(&format!("bad name `{w}`"))) })
                .collect()
        };
        if let Some((key, rest)) = content.split_once(':') {
            let slot = match key.trim() {
                "states" => &mut states,
                "initial" => &mut initial,
                "inputs" => &mut inputs,
                "outputs" => &mut outputs,
                other => return Err(err(&format!("unknown declaration `{other}`"))),
            };
            if slot.is_some() {
                return Err(err(&format!("duplicate `{}` declaration", key.trim())));
            }
            *slot = Some(words(rest)?);
            continue;
        }
        let [from, arrow, to] = content.split_whitespace().collect::<Vec<_>>()[..] else {
            return Err(err("expected `FROM --INPUT/OUTPUT--> TO`"));
        };
        let label = arrow
            .strip_prefix("--")
            .and_then(|a| a.strip_suffix("-->"))
            .ok_or_else(|| err("malformed arrow"))?;
        let (input, output) = match label.split_once('/') {
            Some((i, "")) => (i, None),
            Some((i, o)) => (i, Some(o)),
            None => (label, None),
        };
        for name in [from, to, input].into_iter().chain(output) {
            if !is_identifier(name) {
                return Err(err(&format!("bad name `{name}`")));
            }
        }
        transitions.push(CtlTransition {
            from: from.into(),
            input: input.into(),
            output: output.map(str::to_string),
            to: to.into(),
        });
    }
    let missing = |what: &str| VerifyError::ParseError { line: 0, msg: format!("missing `{what}:` declaration") };
    let initial = initial.ok_or_else(|| missing("initial"))?;
    let [initial] = &initial[..] else {
        return Err(VerifyError::ParseError { line: 0, msg: "`initial:` takes exactly one state".into() });
    };
    let fsm = ControllerFsm {
        states: states.ok_or_else(|| missing("states"))?,
        initial: initial.clone(),
        inputs: inputs.ok_or_else(|| missing("inputs"))?.into_iter().collect(),
        outputs: outputs.unwrap_or_default().into_iter().collect(),
        transitions,
    };
    fsm.validate()?;
    Ok(fsm)
}
