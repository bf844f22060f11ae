use std::fmt::Write as _;
use std::time::Duration;

use plantmine::pipeline::PipelineRun;
use plantmine::verify::{KripkeStructure, Verdict};

use crate::sha256_hex;

/// Plain-text verification report.
pub struct Report {
    title: String,
    out: String,
    stages: Vec<String>,
    inputs: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { title: format!("plantmine {command} report\n"), out: String::new(), stages: Vec::new(), inputs: Vec::new() }
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.push(format!("  {name} sha256:{}", sha256_hex(&[bytes])));
    }

    pub fn stage(&mut self, name: &str, inputs: &[&[u8]], elapsed: Duration) {
        self.stages.push(format!(
            "  {name:<10} input sha256:{}  {:.3} ms",
            sha256_hex(inputs),
            elapsed.as_secs_f64() * 1e3
        ));
    }

    fn section(&mut self, title: &str) {
        let _ = write!(self.out, "\n{title}\n");
    }

    pub fn mining(&mut self, run: &PipelineRun) {
        self.section("models");
        let _ = writeln!(self.out, "  traces: {}", run.traces.len());
        let _ = writeln!(
            self.out,
            "  mined net: {} places, {} transitions, fitness {:.4}",
            run.mined.place_count(),
            run.mined.transition_count(),
            run.fitness
        );
        let _ = writeln!(self.out, "  initial marking: {}", run.initial_marking);
        let _ = writeln!(self.out, "  reachability graph: {} nodes, {} edges", run.graph.nodes.len(), run.graph.edges.len());
        let _ = writeln!(
            self.out,
            "  plant block: {} EC states, {} transitions",
            run.fb.states.len(),
            run.fb.transitions.len()
        );
        if run.split_states > 0 {
            let _ = writeln!(self.out, "  split {} EC states with conflicting sensor valuations", run.split_states);
        }
    }

    pub fn closed_loop(&mut self, k: &KripkeStructure) {
        self.section("closed loop");
        let _ = writeln!(self.out, "  {} states, {} transitions", k.len(), k.transition_count());
        if k.diagnostics.is_empty() {
            self.out.push_str("  diagnostics: none\n");
        } else {
            self.out.push_str("  diagnostics:\n");
            for d in &k.diagnostics {
                let _ = writeln!(self.out, "    {d}");
            }
        }
    }

    /// Appends one line per property and returns whether verification
    /// passed.
    pub fn verdicts(&mut self, k: &KripkeStructure, results: &[(String, Verdict)], strict: bool) -> bool {
        self.section("properties");
        let mut ok = true;
        for (text, v) in results {
            let _ = writeln!(self.out, "  {text}: {}", if v.holds { "HOLDS" } else { "FAILED" });
            ok &= v.holds;
            if let Some(path) = &v.counterexample {
                let _ = writeln!(self.out, "    counterexample ({} states):", path.len());
                for step in path {
                    let sensors: Vec<&str> = k.states[step.state]
                        .labels
                        .iter()
                        .map(String::as_str)
                        .filter(|l| !l.contains('='))
                        .collect();
                    let via = step.via.as_ref().map(|s| format!("--{s}--> ")).unwrap_or_default();
                    let _ = writeln!(self.out, "      {via}{} {{{}}}", step.name, sensors.join(", "));
                }
            }
        }
        if strict && !k.diagnostics.is_empty() {
            self.out.push_str("  strict: diagnostics present, verification fails\n");
            ok = false;
        }
        ok
    }

    pub fn lines(&mut self, lines: Vec<String>) {
        for l in lines {
            let _ = writeln!(self.out, "  {l}");
        }
    }

    pub fn finish(self) -> String {
        let mut out = self.title;
        if !self.inputs.is_empty() {
            out.push_str("\ninputs\n");
            for l in &self.inputs {
                let _ = writeln!(out, "{l}");
            }
        }
        out.push_str("\nstages\n");
        for l in &self.stages {
            let _ = writeln!(out, "{l}");
        }
        out + &self.out
    }
}
