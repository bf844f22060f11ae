//! NuSMV input for the plant block and its closed loop with a controller.
//!
//! The encoding mirrors [`verify::compose`](crate::verify::compose): `main`
//! holds a `pending` variable with the event in flight (`none` when idle).
//! The plant module moves non-deterministically only while `pending = none`
//! and consumes pending commands; the controller consumes pending sensor
//! events. `next(pending)` is the emission of the plant's next state, the
//! controller's answer, or `none`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use thiserror::Error;

use crate::plant_transform::{FunctionBlock, Guard};
use crate::verify::{Ctl, ControllerFsm, VerifyError};

pub const PLANT_INSTANCE: &str = "plant";
pub const CONTROLLER_INSTANCE: &str = "ctl";
pub const CONTROLLER_MODULE: &str = "CONTROLLER";
/// Value of `pending` when no event is in flight.
pub const IDLE: &str = "none";

const RESERVED: &[&str] = &[
    "A", "E", "F", "G", "X", "U", "V", "Y", "Z", "H", "O", "S", "T", "AF", "AG", "AX", "AU", "EF", "EG", "EX", "EU",
    "ABF", "ABG", "EBF", "EBG", "MODULE", "VAR", "IVAR", "FROZENVAR", "DEFINE", "ASSIGN", "INIT", "TRANS", "INVAR",
    "SPEC", "CTLSPEC", "LTLSPEC", "INVARSPEC", "FAIRNESS", "JUSTICE", "COMPASSION", "CONSTANTS", "ISA", "PSLSPEC",
    "COMPUTE", "MIN", "MAX", "MIRROR", "PRED", "PREDICATES", "init", "next", "case", "esac", "in", "mod", "union",
    "self", "process", "boolean", "integer", "real", "word", "array", "of", "TRUE", "FALSE", "xor", "xnor", "main",
    "none", "signed", "unsigned", "extend", "resize", "bool", "count", "toint", "swconst", "uwconst", "sizeof",
    "floor", "abs", "max", "min", "BU", "word1", "LAST", "NAME", "state", "idle", "accept",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmvError {
    #[error("`{0}` is a reserved word in the SMV encoding")]
    ReservedWord(String),
    #[error("`{0}` is not an SMV identifier")]
    BadIdentifier(String),
    #[error("state `{0}` has an NDT self-loop into an emitting state, which SMV cannot tell apart from stuttering")]
    EmittingSelfLoop(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("formula atom `{0}` has no SMV counterpart")]
    UnknownAtom(String),
    #[error("NuSMV: {0}")]
    NuSmv(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmvDocument {
    pub text: String,
    pub module_names: Vec<String>,
}

fn check_name(name: &str) -> Result<(), SmvError> {
    if !crate::is_identifier(name) {
        return Err(SmvError::BadIdentifier(name.to_string()));
    }
    if RESERVED.contains(&name) {
        return Err(SmvError::ReservedWord(name.to_string()));
    }
    Ok(())
}

fn set_expr<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    format!("{{{}}}", items.into_iter().collect::<Vec<_>>().join(", "))
}

/// `var in {..}`, or `FALSE` when the set is empty.
fn membership<'a>(var: &str, items: impl IntoIterator<Item = &'a str>) -> String {
    let items: Vec<&str> = items.into_iter().collect();
    if items.is_empty() {
        "FALSE".into()
    } else {
        format!("{var} in {}", set_expr(items))
    }
}

fn event_param(e: &str) -> String {
    format!("ev_{e}")
}

/// SMV module for the plant block. Parameters: `idle` followed by one
/// boolean per event input (`ev_<EVENT>`), in sorted order.
pub fn emit_plant_module(fb: &FunctionBlock) -> Result<String, SmvError> {
    check_name(&fb.name)?;
    for name in fb
        .states
        .iter()
        .map(|s| s.id.as_str())
        .chain(fb.event_inputs.iter().map(String::as_str))
        .chain(fb.event_outputs.iter().map(String::as_str))
        .chain(fb.sensors.iter().map(String::as_str))
    {
        check_name(name)?;
    }
    for t in &fb.transitions {
        if t.guard == Guard::Ndt && t.from == t.to && fb.emission(&t.to).is_some() {
            return Err(SmvError::EmittingSelfLoop(t.from.clone()));
        }
    }

    let mut out = String::new();
    let params: Vec<String> = std::iter::once("idle".to_string())
        .chain(fb.event_inputs.iter().map(|e| event_param(e)))
        .collect();
    let _ = writeln!(out, "MODULE {}({})", fb.name, params.join(", "));
    out.push_str("VAR\n");
    let _ = writeln!(out, "  state : {};", set_expr(fb.states.iter().map(|s| s.id.as_str())));
    out.push_str("ASSIGN\n");
    let _ = writeln!(out, "  init(state) := {};", fb.initial);
    out.push_str("  next(state) :=\n    case\n");
    for s in &fb.states {
        let targets: BTreeSet<&str> = fb
            .transitions_from(&s.id)
            .filter(|t| t.guard == Guard::Ndt)
            .map(|t| t.to.as_str())
            .collect();
        if !targets.is_empty() {
            let choices = std::iter::once(s.id.as_str()).chain(targets.into_iter().filter(|t| *t != s.id));
            let _ = writeln!(out, "      idle & state = {} : {};", s.id, set_expr(choices));
        }
    }
    for e in &fb.event_inputs {
        for s in &fb.states {
            let guard = Guard::Event(e.clone());
            let targets: BTreeSet<&str> = fb
                .transitions_from(&s.id)
                .filter(|t| t.guard == guard)
                .map(|t| t.to.as_str())
                .collect();
            match targets.len() {
                0 => {}
                1 => {
                    let _ = writeln!(out, "      {} & state = {} : {};", event_param(e), s.id, targets.first().unwrap());
                }
                _ => {
                    let _ = writeln!(out, "      {} & state = {} : {};", event_param(e), s.id, set_expr(targets));
                }
            }
        }
    }
    out.push_str("      TRUE : state;\n    esac;\n");
    out.push_str("DEFINE\n");
    let accepts: Vec<String> = fb
        .event_inputs
        .iter()
        .filter_map(|e| {
            let guard = Guard::Event(e.clone());
            let from: BTreeSet<&str> =
                fb.transitions.iter().filter(|t| t.guard == guard).map(|t| t.from.as_str()).collect();
            (!from.is_empty()).then(|| format!("({} & {})", event_param(e), membership("state", from)))
        })
        .collect();
    let accept = if accepts.is_empty() { "FALSE".to_string() } else { accepts.join(" | ") };
    let _ = writeln!(out, "  accept := {accept};");
    for v in &fb.sensors {
        let on = fb
            .states
            .iter()
            .filter(|s| s.valuation.get(v).copied().unwrap_or(false))
            .map(|s| s.id.as_str());
        let _ = writeln!(out, "  {v} := {};", membership("state", on));
    }
    Ok(out)
}

fn emit_controller_module(ctl: &ControllerFsm) -> Result<String, SmvError> {
    for name in ctl.states.iter().chain(&ctl.inputs).chain(&ctl.outputs) {
        check_name(name)?;
    }
    let mut out = String::new();
    let params: Vec<String> = ctl.inputs.iter().map(|e| event_param(e)).collect();
    let _ = writeln!(out, "MODULE {CONTROLLER_MODULE}({})", params.join(", "));
    out.push_str("VAR\n");
    let _ = writeln!(out, "  state : {};", set_expr(ctl.states.iter().map(String::as_str)));
    out.push_str("ASSIGN\n");
    let _ = writeln!(out, "  init(state) := {};", ctl.initial);
    out.push_str("  next(state) :=\n    case\n");
    for t in &ctl.transitions {
        let _ = writeln!(out, "      state = {} & {} : {};", t.from, event_param(&t.input), t.to);
    }
    out.push_str("      TRUE : state;\n    esac;\n");
    if !ctl.outputs.is_empty() {
        out.push_str("DEFINE\n");
    }
    for o in &ctl.outputs {
        let terms: Vec<String> = ctl
            .transitions
            .iter()
            .filter(|t| t.output.as_deref() == Some(o.as_str()))
            .map(|t| format!("(state = {} & {})", t.from, event_param(&t.input)))
            .collect();
        let expr = if terms.is_empty() { "FALSE".to_string() } else { terms.join(" | ") };
        let _ = writeln!(out, "  out_{o} := {expr};");
    }
    Ok(out)
}

/// Renders a formula over [`compose`](crate::verify::compose) propositions
/// with SMV instance paths.
pub fn smv_formula(f: &Ctl, plant: &FunctionBlock, ctl: &ControllerFsm) -> Result<String, SmvError> {
    for a in f.atoms() {
        let known = if let Some(s) = a.strip_prefix("plant_state=") {
            plant.state(s).is_some()
        } else if let Some(c) = a.strip_prefix("ctl_state=") {
            ctl.states.iter().any(|x| x == c)
        } else {
            plant.sensors.contains(a)
        };
        if !known {
            return Err(SmvError::UnknownAtom(a.to_string()));
        }
    }
    let atom = |a: &str| -> String {
        if let Some(s) = a.strip_prefix("plant_state=") {
            format!("{PLANT_INSTANCE}.state = {s}")
        } else if let Some(c) = a.strip_prefix("ctl_state=") {
            format!("{CONTROLLER_INSTANCE}.state = {c}")
        } else {
            format!("{PLANT_INSTANCE}.{a} = TRUE")
        }
    };
    Ok(f.render(&atom, true))
}

/// Complete closed-loop document: plant module, controller module, `main`
/// with the event wiring, then one `CTLSPEC` per formula.
pub fn emit_closed_loop(plant: &FunctionBlock, ctl: &ControllerFsm, specs: &[Ctl]) -> Result<SmvDocument, SmvError> {
    crate::verify::check_alphabets(plant, ctl).map_err(|e| match e {
        VerifyError::AlphabetMismatch(m) => SmvError::AlphabetMismatch(m),
        other => SmvError::AlphabetMismatch(other.to_string()),
    })?;
    if plant.name == CONTROLLER_MODULE {
        return Err(SmvError::ReservedWord(plant.name.clone()));
    }
    let plant_module = emit_plant_module(plant)?;
    let ctl_module = emit_controller_module(ctl)?;
    let specs: Vec<String> = specs
        .iter()
        .map(|f| smv_formula(f, plant, ctl))
        .collect::<Result<_, _>>()?;

    let events: BTreeSet<&str> = plant
        .event_inputs
        .iter()
        .chain(&plant.event_outputs)
        .chain(&ctl.inputs)
        .chain(&ctl.outputs)
        .map(String::as_str)
        .collect();
    let pending_domain = std::iter::once(IDLE).chain(events.iter().copied());

    let mut out = String::new();
    out.push_str("-- closed loop of the mined plant model and its controller\n\n");
    out.push_str(&plant_module);
    out.push('\n');
    out.push_str(&ctl_module);
    out.push('\n');
    out.push_str("MODULE main\nVAR\n");
    let _ = writeln!(out, "  pending : {};", set_expr(pending_domain));
    let plant_args: Vec<String> = std::iter::once(format!("pending = {IDLE}"))
        .chain(plant.event_inputs.iter().map(|e| format!("pending = {e}")))
        .collect();
    let _ = writeln!(out, "  {PLANT_INSTANCE} : {}({});", plant.name, plant_args.join(", "));
    let ctl_args: Vec<String> = ctl.inputs.iter().map(|e| format!("pending = {e}")).collect();
    let _ = writeln!(out, "  {CONTROLLER_INSTANCE} : {CONTROLLER_MODULE}({});", ctl_args.join(", "));
    out.push_str("ASSIGN\n");
    let _ = writeln!(out, "  init(pending) := {};", plant.emission(&plant.initial).unwrap_or(IDLE));
    out.push_str("  next(pending) :=\n    case\n");
    let emitting = |e: &str| -> Vec<&str> {
        plant
            .states
            .iter()
            .filter(|s| s.emission.as_deref() == Some(e))
            .map(|s| s.id.as_str())
            .collect()
    };
    let p = PLANT_INSTANCE;
    let _ = writeln!(out, "      pending = {IDLE} & next({p}.state) = {p}.state : {IDLE};");
    for e in &plant.event_outputs {
        let states = emitting(e);
        if !states.is_empty() {
            let _ = writeln!(out, "      pending = {IDLE} & next({p}.state) in {} : {e};", set_expr(states));
        }
    }
    let _ = writeln!(out, "      pending = {IDLE} : {IDLE};");
    for e in &plant.event_outputs {
        let states = emitting(e);
        if !states.is_empty() {
            let _ = writeln!(out, "      {p}.accept & next({p}.state) in {} : {e};", set_expr(states));
        }
    }
    let _ = writeln!(out, "      {p}.accept : {IDLE};");
    for o in &ctl.outputs {
        let _ = writeln!(out, "      {CONTROLLER_INSTANCE}.out_{o} : {o};");
    }
    let _ = writeln!(out, "      TRUE : {IDLE};\n    esac;");
    for s in &specs {
        let _ = writeln!(out, "CTLSPEC {s}");
    }
    Ok(SmvDocument {
        text: out,
        module_names: vec![plant.name.clone(), CONTROLLER_MODULE.to_string(), "main".to_string()],
    })
}

/// Runs a NuSMV executable on `doc` and returns the verdict of each
/// `CTLSPEC` in order.
pub fn run_nusmv(exe: &Path, doc: &SmvDocument) -> Result<Vec<bool>, SmvError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let path = std::env::temp_dir().join(format!(
        "plantmine-{}-{}.smv",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&path, &doc.text).map_err(|e| SmvError::NuSmv(e.to_string()))?;
    let output = Command::new(exe).arg(&path).output();
    let _ = std::fs::remove_file(&path);
    let output = output.map_err(|e| SmvError::NuSmv(format!("cannot run {}: {e}", exe.display())))?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    let verdicts: Vec<bool> = stdout
        .lines()
        .filter(|l| l.starts_with("-- specification"))
        .filter_map(|l| {
            if l.trim_end().ends_with("is true") {
                Some(true)
            } else if l.trim_end().ends_with("is false") {
                Some(false)
            } else {
                None
            }
        })
        .collect();
    if !output.status.success() && verdicts.is_empty() {
        return Err(SmvError::NuSmv(String::from_utf8_lossy(&output.stderr).trim().to_string()));
    }
    Ok(verdicts)
}
