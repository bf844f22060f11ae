//! Plant-model synthesis from recorded event logs.
//!
//! The crate turns a CSV event log of a manufacturing plant into a
//! non-deterministic plant function block and verifies it in closed loop
//! against a controller:
//!
//! ```text
//! CSV log > filter > group traces > alpha miner > Petri net
//!        > strip source/sink > reachability graph > FSM
//!        > plant function block (interface + ECC with NDTs)
//!        > SMV text | built-in CTL checker
//! ```
//!
//! Each stage lives in its own module; [`pipeline`] chains them.

pub mod discovery;
pub mod event_log;
pub mod petri;
pub mod pipeline;
pub mod plant_transform;
pub mod sim_fixture;
pub mod smv_emit;
pub mod verify;

use thiserror::Error;

/// Any error raised by a pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    EventLog(#[from] event_log::EventLogError),
    #[error(transparent)]
    Discovery(#[from] discovery::DiscoveryError),
    #[error(transparent)]
    Petri(#[from] petri::PetriError),
    #[error(transparent)]
    Transform(#[from] plant_transform::TransformError),
    #[error(transparent)]
    Smv(#[from] smv_emit::SmvError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Names of actions, states and places that end up in SMV text must match
/// `[A-Za-z0-9_]+` and must not start with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
