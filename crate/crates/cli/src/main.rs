mod output;
mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use plantmine::discovery::{alpha_discover, fitness};
use plantmine::event_log::{export_xes, filter_component, group_traces, parse_csv, write_csv, EventLog};
use plantmine::petri::{
    export_dot_graph, export_dot_net, export_pnml, parse_pnml, reachability_graph, strip_boundary, Designation,
    Marking, PetriNet, DEFAULT_BOUND,
};
use plantmine::pipeline::{self, PipelineConfig, DEFAULT_SPEC};
use plantmine::plant_transform::{export_ecc_dot, export_fb, fsm_from_graph, parse_fb, ActionMap, FunctionBlock};
use plantmine::sim_fixture::{self, Mutation, SimConfig};
use plantmine::smv_emit::{emit_closed_loop, run_nusmv, SmvDocument};
use plantmine::verify::{check_ctl, compose, parse_controller, parse_ctl, ControllerFsm, Ctl};

use output::{sha256_hex, write_artifact};
use report::Report;

#[derive(Parser)]
#[command(name = "plantmine", version, about = "Mine plant models from event logs and verify them in closed loop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cylinder log (log.csv)
    Simulate(SimulateArgs),
    /// Filter a log and mine a Petri net (filtered.csv, log.xes, net.pnml, net.dot)
    Mine(MineArgs),
    /// Reachability graph of a net without its source and sink (reach.dot)
    Reach(ReachArgs),
    /// Plant function block from a net (plant.fb, plant_ecc.dot)
    Transform(TransformArgs),
    /// Closed-loop SMV document (closed_loop.smv)
    EmitSmv(EmitArgs),
    /// Check CTL properties of the closed loop (report.txt)
    Verify(VerifyArgs),
    /// Run every stage in sequence
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    traces: usize,
    /// Fixture mutation, e.g. drop_sensor_off
    #[arg(long)]
    mutate: Vec<Mutation>,
}

#[derive(Args)]
struct OutArg {
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MarkingArgs {
    /// Initial marking entry `place=count` (repeatable)
    #[arg(long)]
    marking: Vec<String>,
    /// Without --marking: mark the input places of this action when no place lacks producers
    #[arg(long, default_value = sim_fixture::REST_ACTION)]
    rest_action: String,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    bound: usize,
}

#[derive(Args)]
struct ModelArgs {
    /// Controller file (default: the cylinder fixture controller)
    #[arg(long)]
    controller: Option<PathBuf>,
    /// CTL property (repeatable)
    #[arg(long = "spec", default_value = DEFAULT_SPEC)]
    specs: Vec<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = sim_fixture::COMPONENT)]
    component: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ReachArgs {
    /// PNML net, typically from `mine`
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    marking: MarkingArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    net: PathBuf,
    /// Action map file (default: the cylinder fixture map)
    #[arg(long)]
    actionmap: Option<PathBuf>,
    #[arg(long, default_value = "PLANT")]
    name: String,
    #[command(flatten)]
    marking: MarkingArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long)]
    fb: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// NuSMV executable to run on the emitted document
    #[arg(long)]
    nusmv: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    fb: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Treat ignored events and dropped commands as failures
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct PipelineArgs {
    /// Input CSV log
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    log: Option<PathBuf>,
    /// Simulate the cylinder fixture instead of reading a log
    #[arg(long)]
    fixture: bool,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value = sim_fixture::COMPONENT)]
    component: String,
    /// Action map file (default: the cylinder fixture map)
    #[arg(long)]
    actionmap: Option<PathBuf>,
    #[arg(long, default_value = "PLANT")]
    name: String,
    #[command(flatten)]
    marking: MarkingArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Treat ignored events and dropped commands as failures
    #[arg(long)]
    strict: bool,
    /// NuSMV executable; its verdicts are compared with the built-in checker
    #[arg(long)]
    nusmv: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Mine(a) => mine(a),
        Command::Reach(a) => reach(a),
        Command::Transform(a) => transform(a),
        Command::EmitSmv(a) => emit_smv(a),
        Command::Verify(a) => verify(a),
        Command::Pipeline(a) => run_pipeline(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn sim_config(args: &SimArgs) -> Result<SimConfig> {
    let cfg = SimConfig { n_traces: args.traces, mutations: args.mutate.iter().copied().collect(), ..SimConfig::default() };
    cfg.validate().map_err(anyhow::Error::msg)?;
    Ok(cfg)
}

fn load_action_map(path: Option<&Path>) -> Result<(ActionMap, String)> {
    match path {
        Some(p) => {
            let text = read(p)?;
            let map = ActionMap::parse(&text).with_context(|| p.display().to_string())?;
            Ok((map, text))
        }
        None => Ok((sim_fixture::fixture_action_map(), sim_fixture::ACTION_MAP_TEXT.to_string())),
    }
}

fn load_controller(path: Option<&Path>) -> Result<(ControllerFsm, String)> {
    match path {
        Some(p) => {
            let text = read(p)?;
            let ctl = parse_controller(&text).with_context(|| p.display().to_string())?;
            Ok((ctl, text))
        }
        None => Ok((sim_fixture::fixture_controller(), sim_fixture::CONTROLLER_TEXT.to_string())),
    }
}

fn parse_specs(specs: &[String]) -> Result<Vec<Ctl>> {
    specs.iter().map(|s| parse_ctl(s).with_context(|| format!("in property `{s}`"))).collect()
}

fn load_net(path: &Path) -> Result<PetriNet> {
    let (net, _) = parse_pnml(&read(path)?).with_context(|| path.display().to_string())?;
    Ok(net)
}

/// Net without its designated boundary places, and the initial marking.
fn stripped_with_marking(net: &PetriNet, args: &MarkingArgs) -> Result<(PetriNet, Marking)> {
    let stripped = if net.designated(Designation::Source).is_some() { strip_boundary(net)? } else { net.clone() };
    let m0 = if args.marking.is_empty() {
        pipeline::initial_marking(&stripped, &args.rest_action)?
    } else {
        Marking::parse_entries(args.marking.iter().map(String::as_str))?
    };
    Ok((stripped, m0))
}

fn simulate(args: SimulateArgs) -> Result<bool> {
    let log = sim_fixture::simulate_two_cylinder(&sim_config(&args.sim)?, args.sim.seed);
    write_artifact(&args.out.out, "log.csv", &write_csv(&log))?;
    Ok(true)
}

fn mine(args: MineArgs) -> Result<bool> {
    let log = parse_csv(&read(&args.log)?).with_context(|| args.log.display().to_string())?;
    let filtered = filter_component(&log, &args.component);
    let traces = group_traces(&filtered)?;
    let net = alpha_discover(&traces)?;
    let fit = fitness(&net, &traces)?;
    let dir = &args.out.out;
    write_artifact(dir, "filtered.csv", &write_csv(&filtered))?;
    write_artifact(dir, "log.xes", &export_xes(&traces))?;
    write_artifact(dir, "net.pnml", &export_pnml(&net))?;
    write_artifact(dir, "net.dot", &export_dot_net(&net))?;
    println!(
        "{} traces, {} places, {} transitions, fitness {fit:.4}",
        traces.len(),
        net.place_count(),
        net.transition_count()
    );
    Ok(true)
}

fn reach(args: ReachArgs) -> Result<bool> {
    let net = load_net(&args.net)?;
    let (stripped, m0) = stripped_with_marking(&net, &args.marking)?;
    let g = reachability_graph(&stripped, &m0, args.marking.bound)?;
    write_artifact(&args.out.out, "reach.dot", &export_dot_graph(&g))?;
    println!("initial marking {m0}: {} nodes, {} edges", g.nodes.len(), g.edges.len());
    Ok(true)
}

fn transform(args: TransformArgs) -> Result<bool> {
    let net = load_net(&args.net)?;
    let (stripped, m0) = stripped_with_marking(&net, &args.marking)?;
    let g = reachability_graph(&stripped, &m0, args.marking.bound)?;
    let (map, _) = load_action_map(args.actionmap.as_deref())?;
    let (fb, added) = pipeline::transform(&fsm_from_graph(&g), &map, &args.name)?;
    write_artifact(&args.out.out, "plant.fb", &export_fb(&fb))?;
    write_artifact(&args.out.out, "plant_ecc.dot", &export_ecc_dot(&fb))?;
    println!("{} EC states, {} transitions", fb.states.len(), fb.transitions.len());
    if added > 0 {
        println!("split {added} states with conflicting sensor valuations");
    }
    Ok(true)
}

fn load_fb(path: &Path) -> Result<FunctionBlock> {
    parse_fb(&read(path)?).with_context(|| path.display().to_string())
}

fn emit_smv(args: EmitArgs) -> Result<bool> {
    let fb = load_fb(&args.fb)?;
    let (ctl, _) = load_controller(args.model.controller.as_deref())?;
    let specs = parse_specs(&args.model.specs)?;
    let doc = emit_closed_loop(&fb, &ctl, &specs)?;
    write_artifact(&args.out.out, "closed_loop.smv", &doc.text)?;
    if let Some(exe) = &args.nusmv {
        for line in nusmv_lines(exe, &doc, None) {
            println!("{line}");
        }
    }
    Ok(true)
}

/// Runs NuSMV and compares with `expected` verdicts when given. Failures to
/// run are reported, never raised.
fn nusmv_lines(exe: &Path, doc: &SmvDocument, expected: Option<&[bool]>) -> Vec<String> {
    match run_nusmv(exe, doc) {
        Err(e) => vec![format!("nusmv: not run ({e})")],
        Ok(verdicts) => {
            let mut lines = vec![format!(
                "nusmv: {}",
                verdicts.iter().map(|v| if *v { "true" } else { "false" }).collect::<Vec<_>>().join(" ")
            )];
            if let Some(exp) = expected {
                lines.push(if verdicts == exp { "nusmv: agrees".into() } else { "nusmv: DISAGREES".into() });
            }
            lines
        }
    }
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let fb_text = read(&args.fb)?;
    let fb = parse_fb(&fb_text).with_context(|| args.fb.display().to_string())?;
    let (ctl, ctl_text) = load_controller(args.model.controller.as_deref())?;
    let specs = parse_specs(&args.model.specs)?;
    let start = Instant::now();
    let k = compose(&fb, &ctl)?;
    let results = specs
        .iter()
        .zip(&args.model.specs)
        .map(|(f, text)| Ok((text.clone(), check_ctl(&k, f)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("verify");
    report.stage("verify", &[fb_text.as_bytes(), ctl_text.as_bytes(), args.model.specs.join("\n").as_bytes()], start.elapsed());
    report.closed_loop(&k);
    let ok = report.verdicts(&k, &results, args.strict);
    let text = report.finish();
    write_artifact(&args.out.out, "report.txt", &text)?;
    print!("{text}");
    Ok(ok)
}

fn run_pipeline(args: PipelineArgs) -> Result<bool> {
    if !args.sim.mutate.is_empty() && !args.fixture {
        bail!("--mutate requires --fixture");
    }
    let (map, map_text) = load_action_map(args.actionmap.as_deref())?;
    let (ctl, ctl_text) = load_controller(args.model.controller.as_deref())?;
    let mut cfg = PipelineConfig {
        component: args.component.clone(),
        bound: args.marking.bound,
        marking: None,
        rest_action: args.marking.rest_action.clone(),
        action_map: map,
        controller: ctl,
        plant_name: args.name.clone(),
        specs: args.model.specs.clone(),
    };
    if !args.marking.marking.is_empty() {
        cfg.marking = Some(Marking::parse_entries(args.marking.marking.iter().map(String::as_str))?);
    }

    let mut report = Report::new("pipeline");
    let (raw, raw_csv): (EventLog, String) = if args.fixture {
        let sim = sim_config(&args.sim)?;
        let start = Instant::now();
        let log = sim_fixture::simulate_two_cylinder(&sim, args.sim.seed);
        let mutations: BTreeSet<String> = sim.mutations.iter().map(ToString::to_string).collect();
        let desc = format!(
            "seed={} traces={} mutations={}",
            args.sim.seed,
            sim.n_traces,
            mutations.into_iter().collect::<Vec<_>>().join(",")
        );
        report.stage("simulate", &[desc.as_bytes()], start.elapsed());
        let csv = write_csv(&log);
        (log, csv)
    } else {
        let path = args.log.as_ref().expect("clap requires --log without --fixture");
        let text = read(path)?;
        let log = parse_csv(&text).with_context(|| path.display().to_string())?;
        report.input(&path.display().to_string(), text.as_bytes());
        (log, text)
    };
    if let Some(p) = &args.actionmap {
        report.input(&p.display().to_string(), map_text.as_bytes());
    }
    if let Some(p) = &args.model.controller {
        report.input(&p.display().to_string(), ctl_text.as_bytes());
    }

    let run = pipeline::run(&raw, &cfg)?;

    let filtered_csv = write_csv(&run.filtered);
    let pnml = export_pnml(&run.mined);
    let stripped_pnml = export_pnml(&run.stripped);
    let reach_dot = export_dot_graph(&run.graph);
    let fb_text = export_fb(&run.fb);
    let specs_text = cfg.specs.join("\n");
    let marking_text = run.initial_marking.to_string();
    for (stage, elapsed) in &run.timings {
        let inputs: Vec<&[u8]> = match stage {
            pipeline::Stage::Filter => vec![raw_csv.as_bytes()],
            pipeline::Stage::Mine => vec![filtered_csv.as_bytes()],
            pipeline::Stage::Strip => vec![pnml.as_bytes()],
            pipeline::Stage::Reach => vec![stripped_pnml.as_bytes(), marking_text.as_bytes()],
            pipeline::Stage::Transform => vec![reach_dot.as_bytes(), map_text.as_bytes()],
            pipeline::Stage::EmitSmv | pipeline::Stage::Verify => {
                vec![fb_text.as_bytes(), ctl_text.as_bytes(), specs_text.as_bytes()]
            }
        };
        report.stage(&stage.to_string(), &inputs, *elapsed);
    }
    report.mining(&run);
    report.closed_loop(&run.kripke);
    let results: Vec<(String, _)> = run.results.iter().map(|r| (r.text.clone(), r.verdict.clone())).collect();
    let mut ok = report.verdicts(&run.kripke, &results, args.strict);
    if let Some(exe) = &args.nusmv {
        let expected: Vec<bool> = run.results.iter().map(|r| r.verdict.holds).collect();
        let lines = nusmv_lines(exe, &run.smv, Some(&expected));
        if lines.iter().any(|l| l.ends_with("DISAGREES")) {
            ok = false;
        }
        report.lines(lines);
    }

    let dir = &args.out.out;
    if args.fixture {
        write_artifact(dir, "log.csv", &raw_csv)?;
    }
    write_artifact(dir, "filtered.csv", &filtered_csv)?;
    write_artifact(dir, "log.xes", &export_xes(&run.traces))?;
    write_artifact(dir, "net.pnml", &pnml)?;
    write_artifact(dir, "net.dot", &export_dot_net(&run.mined))?;
    write_artifact(dir, "reach.dot", &reach_dot)?;
    write_artifact(dir, "plant.fb", &fb_text)?;
    write_artifact(dir, "plant_ecc.dot", &export_ecc_dot(&run.fb))?;
    write_artifact(dir, "closed_loop.smv", &run.smv.text)?;
    let text = report.finish();
    write_artifact(dir, "report.txt", &text)?;
    print!("{text}");
    Ok(ok)
}
