//! Event logs: CSV parsing, component filtering, per-scenario grouping and
//! a minimal XES export.
//!
//! The CSV schema has exactly four columns, `processId,timestamp,component,action`.
//! Quoting is not supported; a field containing a comma shows up as a row
//! with the wrong column count and is rejected.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::is_identifier;

pub const CSV_HEADER: &str = "processId,timestamp,component,action";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventLogError {
    #[error("missing header: expected `{CSV_HEADER}`")]
    MissingHeader,
    #[error("bad header `{0}`: expected `{CSV_HEADER}`")]
    BadHeader(String),
    #[error("line {0}: malformed row, expected 4 comma-separated fields")]
    MalformedRow(usize),
    #[error("line {0}: empty field")]
    EmptyField(usize),
    #[error("line {0}: bad timestamp")]
    BadTimestamp(usize),
    #[error("line {line}: action `{action}` is not an identifier ([A-Za-z_][A-Za-z0-9_]*)")]
    BadAction { line: usize, action: String },
    #[error("event log is empty")]
    EmptyLog,
}

/// One observation of the plant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub process_id: String,
    pub timestamp: DateTime<Utc>,
    pub component: String,
    pub action: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    /// Events in file order.
    pub events: Vec<Event>,
}

/// Actions of one process scenario in timestamp order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub process_id: String,
    pub actions: Vec<String>,
    /// Either empty or parallel to `actions`.
    pub timestamps: Vec<DateTime<Utc>>,
}

impl Trace {
    /// A trace without timestamps.
    pub fn new<S: Into<String>>(process_id: impl Into<String>, actions: impl IntoIterator<Item = S>) -> Self {
        Trace {
            process_id: process_id.into(),
            actions: actions.into_iter().map(Into::into).collect(),
            timestamps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceSet {
    pub traces: Vec<Trace>,
    pub alphabet: BTreeSet<String>,
}

impl TraceSet {
    pub fn new(traces: Vec<Trace>) -> Self {
        let alphabet = traces
            .iter()
            .flat_map(|t| t.actions.iter().cloned())
            .collect();
        TraceSet { traces, alphabet }
    }

    /// Builds a trace set from plain action sequences, numbering traces from 1.
    pub fn from_sequences(seqs: &[&[&str]]) -> Self {
        TraceSet::new(
            seqs.iter()
                .enumerate()
                .map(|(i, s)| Trace::new((i + 1).to_string(), s.iter().copied()))
                .collect(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn parse_csv(text: &str) -> Result<EventLog, EventLogError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let header = loop {
        match lines.next() {
            None => return Err(EventLogError::MissingHeader),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
        }
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names != ["processId", "timestamp", "component", "action"] {
        return Err(EventLogError::BadHeader(header.to_string()));
    }

    let mut events = Vec::new();
    for (line, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let [process_id, timestamp, component, action] = fields[..] else {
            return Err(EventLogError::MalformedRow(line));
        };
        if [process_id, timestamp, component, action].iter().any(|f| f.is_empty()) {
            return Err(EventLogError::EmptyField(line));
        }
        let timestamp = DateTime::parse_from_rfc3339(timestamp)
            .map_err(|_| EventLogError::BadTimestamp(line))?
            .with_timezone(&Utc);
        if !is_identifier(action) {
            return Err(EventLogError::BadAction { line, action: action.to_string() });
        }
        events.push(Event {
            process_id: process_id.to_string(),
            timestamp,
            component: component.to_string(),
            action: action.to_string(),
        });
    }
    Ok(EventLog { events })
}

/// Serializes a log in the same schema `parse_csv` reads, LF-terminated.
pub fn write_csv(log: &EventLog) -> String {
    let mut out = String::with_capacity(64 * (log.events.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in &log.events {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.process_id,
            format_timestamp(&e.timestamp),
            e.component,
            e.action
        );
    }
    out
}

pub fn filter_component(log: &EventLog, component: &str) -> EventLog {
    EventLog {
        events: log
            .events
            .iter()
            .filter(|e| e.component == component)
            .cloned()
            .collect(),
    }
}

/// One trace per distinct process id, in order of first appearance. Ties on
/// timestamps keep file order.
pub fn group_traces(log: &EventLog) -> Result<TraceSet, EventLogError> {
    if log.events.is_empty() {
        return Err(EventLogError::EmptyLog);
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(&str, Vec<&Event>)> = Vec::new();
    for e in &log.events {
        let slot = *index.entry(&e.process_id).or_insert_with(|| {
            groups.push((&e.process_id, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(e);
    }
    let traces = groups
        .into_iter()
        .map(|(id, mut events)| {
            events.sort_by_key(|e| e.timestamp);
            Trace {
                process_id: id.to_string(),
                actions: events.iter().map(|e| e.action.clone()).collect(),
                timestamps: events.iter().map(|e| e.timestamp).collect(),
            }
        })
        .collect();
    Ok(TraceSet::new(traces))
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Minimal XES: `log`/`trace`/`event` with `concept:name` and, when known,
/// `time:timestamp`.
pub fn export_xes(traces: &TraceSet) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<log xes.version=\"1.0\" xes.features=\"\">\n");
    out.push_str("  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n");
    out.push_str("  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n");
    for t in &traces.traces {
        out.push_str("  <trace>\n");
        let _ = writeln!(
            out,
            "    <string key=\"concept:name\" value=\"{}\"/>",
            xml_escape(&t.process_id)
        );
        for (i, a) in t.actions.iter().enumerate() {
            out.push_str("    <event>\n");
            let _ = writeln!(out, "      <string key=\"concept:name\" value=\"{}\"/>", xml_escape(a));
            if let Some(ts) = t.timestamps.get(i) {
                let _ = writeln!(
                    out,
                    "      <date key=\"time:timestamp\" value=\"{}\"/>",
                    format_timestamp(ts)
                );
            }
            out.push_str("    </event>\n");
        }
        out.push_str("  </trace>\n");
    }
    out.push_str("</log>\n");
    out
}
