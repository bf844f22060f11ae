//! Synthetic logs of the horizontal cylinder, plus the matching controller
//! and action map.
//!
//! The cylinder rests at home. `EXT` pushes it out (`HOME_OFF`, then
//! `END_ON`), `RET` pulls it back (`END_OFF`, then `HOME_ON`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event_log::{Event, EventLog};
use crate::petri::{Marking, PetriError, PetriNet};
use crate::plant_transform::ActionMap;
use crate::verify::{parse_controller, ControllerFsm};

pub const COMPONENT: &str = "HC";
pub const CYCLE: [&str; 6] = ["EXT", "HOME_OFF", "END_ON", "RET", "END_OFF", "HOME_ON"];
/// Action whose input places hold the token at rest.
pub const REST_ACTION: &str = "EXT";

pub const CONTROLLER_TEXT: &str = "\
states: C0 C1 C2 C3
initial: C0
inputs: HOME_ON HOME_OFF END_ON END_OFF
outputs: EXT RET
C0 --HOME_ON/EXT--> C1
C1 --HOME_OFF/--> C2
C2 --END_ON/RET--> C3
C3 --END_OFF/--> C0
";

pub const ACTION_MAP_TEXT: &str = "\
EXT: control
RET: control
HOME_ON: sensor HOME=true
HOME_OFF: sensor HOME=false
END_ON: sensor END=true
END_OFF: sensor END=false
initial: HOME=true END=false
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mutation {
    /// Removes every `HOME_OFF` and `END_OFF` event.
    DropSensorOff,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::DropSensorOff => f.write_str("drop_sensor_off"),
        }
    }
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop_sensor_off" => Ok(Mutation::DropSensorOff),
            other => Err(format!("unknown mutation `{other}` (known: drop_sensor_off)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub n_traces: usize,
    pub cycles_per_trace: RangeInclusive<usize>,
    pub base_time: DateTime<Utc>,
    pub step_millis: i64,
    pub mutations: BTreeSet<Mutation>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_traces: 200,
            cycles_per_trace: 1..=3,
            base_time: Utc.with_ymd_and_hms(2024, 1, 1, 8, 0, 0).unwrap(),
            step_millis: 250,
            mutations: BTreeSet::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_traces == 0 {
            return Err("at least one trace is required".into());
        }
        if self.cycles_per_trace.is_empty() || *self.cycles_per_trace.start() == 0 {
            return Err("cycles per trace must be a nonempty range of positive counts".into());
        }
        if self.step_millis <= 0 {
            return Err("time step must be positive".into());
        }
        Ok(())
    }
}

/// Generates `cfg.n_traces` process scenarios, each repeating the cylinder
/// cycle a random number of times. Timestamps advance by one step per event
/// across the whole log.
///
/// # Panics
///
/// If `cfg` fails [`SimConfig::validate`].
pub fn simulate_two_cylinder(cfg: &SimConfig, seed: u64) -> EventLog {
    if let Err(e) = cfg.validate() {
        panic!("invalid simulation config: {e}");
    }
    let drop_off = cfg.mutations.contains(&Mutation::DropSensorOff);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut j: i64 = 0;
    for i in 1..=cfg.n_traces {
        let k = rng.random_range(cfg.cycles_per_trace.clone());
        for _ in 0..k {
            for action in CYCLE {
                if drop_off && (action == "HOME_OFF" || action == "END_OFF") {
                    continue;
                }
                events.push(Event {
                    process_id: i.to_string(),
                    timestamp: cfg.base_time + Duration::milliseconds(j * cfg.step_millis),
                    component: COMPONENT.to_string(),
                    action: action.to_string(),
                });
                j += 1;
            }
        }
    }
    EventLog { events }
}

pub fn fixture_controller() -> ControllerFsm {
    parse_controller(CONTROLLER_TEXT).expect("fixture controller parses")
}

pub fn fixture_action_map() -> ActionMap {
    ActionMap::parse(ACTION_MAP_TEXT).expect("fixture action map parses")
}

pub fn fixture_initial_valuation() -> BTreeMap<String, bool> {
    fixture_action_map().initial_valuation
}

/// One token in every input place of the transition labelled `action`.
pub fn rest_marking(net: &PetriNet, action: &str) -> Result<Marking, PetriError> {
    let t = net
        .transition_by_label(action)
        .ok_or_else(|| PetriError::UnknownTransition(action.to_string()))?;
    Ok(Marking::from_pairs(net.preset(t).iter().map(|p| (p.as_str(), 1))))
}
