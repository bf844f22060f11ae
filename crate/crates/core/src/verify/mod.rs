//! Explicit-state closed-loop verification.
//!
//! A [`ControllerFsm`] is composed with the plant [`FunctionBlock`] into a
//! [`KripkeStructure`] under a pending-event handshake: at most one event is
//! in flight, and it is consumed by its receiver before either side moves
//! again. CTL formulas are then checked over that structure.
//!
//! [`FunctionBlock`]: crate::plant_transform::FunctionBlock

mod check;
mod controller;
mod ctl;
mod kripke;

pub use check::{check_ctl, Checker, PathStep, Verdict};
pub use controller::{parse_controller, ControllerFsm, CtlTransition};
pub use ctl::{parse_ctl, Ctl};
pub(crate) use kripke::check_alphabets;
pub use kripke::{compose, CompositeState, Diagnostic, KState, KTransition, KripkeStructure, Step};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("controller line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("event `{0}` is not declared by the controller")]
    UndeclaredEvent(String),
    #[error("controller has two transitions from `{state}` on `{event}`")]
    NondeterministicController { state: String, event: String },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("CTL syntax error at offset {position}: {msg}")]
    CtlParse { position: usize, msg: String },
    #[error("unknown atomic proposition `{0}`")]
    UnknownAtom(String),
}
