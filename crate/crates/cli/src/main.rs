use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cqpd_core::harness::{
    builtin_source, canonical_json, configuration_json, enumerate, haar_state, parse_binding, run,
    state_json, verify_sdc, verify_teleport, HarnessError, RunStatus, Schedule, Trace,
    VerificationReport, DEFAULT_DEPTH,
};
use cqpd_core::qudit::QuantumState;
use cqpd_core::semantics::{EnvValue, Environment};
use cqpd_core::syntax::{parse, typecheck, Program};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

/// `println!` that stays quiet when stdout is closed early.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Qudit process-calculus interpreter.
#[derive(Debug, Parser)]
#[command(name = "cqpd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Qudit dimension.
    #[arg(short = 'd', long = "dimension", default_value_t = 2, global = true)]
    dimension: usize,
    /// Seed for scheduling, sampling and random inputs.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Input binding `name=integer` or `name=state`, e.g. `x=|1>` or `x=0.6:0,0.8:1`.
    #[arg(long = "in", value_name = "NAME=VALUE", global = true)]
    inputs: Vec<String>,
    /// Output format; `check` defaults to text, everything else to json.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Maximum number of transitions per trace.
    #[arg(long, default_value_t = DEFAULT_DEPTH, global = true)]
    depth: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and typecheck a program file.
    Check { file: PathBuf },
    /// Run a program under the seeded scheduler and report the final configuration.
    Run { program: String },
    /// Run a program under the seeded scheduler and print every step.
    Trace { program: String },
    /// Explore every interleaving of a program.
    Enumerate { program: String },
    /// Verify a shipped protocol against its reference states.
    Verify { protocol: Protocol },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Protocol {
    Teleport,
    Sdc,
}

enum Failure {
    /// Bad invocation or unusable input: exit 2.
    Input(String),
    /// The program ran but did not succeed: exit 1.
    Run(String),
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Outcome {
    if cli.dimension < 2 {
        return Err(Failure::Input(format!(
            "dimension must be at least 2, got {}",
            cli.dimension
        )));
    }
    if cli.depth == 0 {
        return Err(Failure::Input("depth must be at least 1".into()));
    }
    match &cli.command {
        Command::Check { file } => check(cli, file),
        Command::Run { program } => run_cmd(cli, program, false),
        Command::Trace { program } => run_cmd(cli, program, true),
        Command::Enumerate { program } => enumerate_cmd(cli, program),
        Command::Verify { protocol } => match protocol {
            Protocol::Teleport => verify_teleport_cmd(cli),
            Protocol::Sdc => verify_sdc_cmd(cli),
        },
    }
}

fn format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn emit(value: &Json) {
    outln!("{}", canonical_json(value));
}

fn read_source(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {arg}: {e}")));
    }
    builtin_source(arg).map(str::to_string).ok_or_else(|| {
        Failure::Input(format!(
            "cannot read {arg}: no such file or builtin protocol"
        ))
    })
}

fn parse_source(name: &str, source: &str) -> Result<Program, Failure> {
    parse(source).map_err(|e| Failure::Input(format!("{name}:{e}")))
}

fn load(arg: &str) -> Result<Program, Failure> {
    let program = parse_source(arg, &read_source(arg)?)?;
    let diagnostics = typecheck(&program);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{arg}:{d}");
        }
        return Err(Failure::Input(format!(
            "{arg}: {} type error(s)",
            diagnostics.len()
        )));
    }
    Ok(program)
}

fn environment(cli: &Cli) -> Result<Environment, Failure> {
    let mut env = Environment::new();
    for text in &cli.inputs {
        let (name, value) =
            parse_binding(text, cli.dimension).map_err(|e| Failure::Input(e.to_string()))?;
        env.insert(name, value);
    }
    Ok(env)
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Literal(_) | HarnessError::InvalidDepth => Failure::Input(e.to_string()),
        other => Failure::Run(other.to_string()),
    }
}

fn check(cli: &Cli, file: &Path) -> Outcome {
    let name = file.display().to_string();
    let source = std::fs::read_to_string(file)
        .map_err(|e| Failure::Input(format!("cannot read {name}: {e}")))?;
    let program = parse_source(&name, &source)?;
    let diagnostics = typecheck(&program);
    for d in &diagnostics {
        eprintln!("{name}:{d}");
    }
    match format(cli, Format::Text) {
        Format::Text => outln!("{} diagnostics", diagnostics.len()),
        Format::Json => emit(&json!({ "file": name, "diagnostics": diagnostics })),
    }
    if diagnostics.is_empty() {
        Ok(true)
    } else {
        Err(Failure::Input(format!(
            "{name}: {} type error(s)",
            diagnostics.len()
        )))
    }
}

fn status_text(status: &RunStatus) -> String {
    match status {
        RunStatus::Terminated => "terminated".into(),
        RunStatus::Deadlock { residual } => format!("deadlock: {residual}"),
        RunStatus::DepthExceeded => "depth limit reached".into(),
    }
}

fn run_cmd(cli: &Cli, arg: &str, full: bool) -> Outcome {
    let program = load(arg)?;
    let env = environment(cli)?;
    let schedule = Schedule::seeded(cli.seed).with_depth(cli.depth);
    let trace = run(&program, cli.dimension, &env, &schedule).map_err(harness_failure)?;
    match (format(cli, Format::Json), full) {
        (Format::Json, true) => emit(&trace.to_json()),
        (Format::Json, false) => emit(&json!({
            "dimension": trace.dimension,
            "labels": trace.steps.iter().map(|s| s.label.to_string()).collect::<Vec<_>>(),
            "final": configuration_json(trace.final_config()),
            "status": trace.status,
        })),
        (Format::Text, true) => {
            for (i, s) in trace.steps.iter().enumerate() {
                outln!(
                    "{i:>4}  {}  {}",
                    s.label,
                    serde_json::to_string(&s.detail).unwrap()
                );
            }
            outln!("{}", status_text(&trace.status));
        }
        (Format::Text, false) => {
            let labels: Vec<String> = trace.steps.iter().map(|s| s.label.to_string()).collect();
            outln!("{}", labels.join(" . "));
            outln!("{}", status_text(&trace.status));
        }
    }
    Ok(trace.status == RunStatus::Terminated)
}

fn enumerate_cmd(cli: &Cli, arg: &str) -> Outcome {
    let program = load(arg)?;
    let env = environment(cli)?;
    let traces: Vec<Trace> =
        enumerate(&program, cli.dimension, &env, cli.depth).map_err(harness_failure)?;
    match format(cli, Format::Json) {
        Format::Json => emit(&json!({
            "count": traces.len(),
            "traces": traces.iter().map(Trace::to_json).collect::<Vec<_>>(),
        })),
        Format::Text => {
            for (i, t) in traces.iter().enumerate() {
                let labels: Vec<String> = t.steps.iter().map(|s| s.label.to_string()).collect();
                outln!("{i}: {}  [{}]", labels.join(" . "), status_text(&t.status));
            }
            outln!("{} traces", traces.len());
        }
    }
    Ok(traces.iter().all(|t| t.status == RunStatus::Terminated))
}

fn print_report(report: &VerificationReport) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    outln!(
        "{} d={}: {verdict} ({} branches, {} checkpoints, max deviation {:.3e})",
        report.protocol,
        report.dimension,
        report.branches.len(),
        report.checkpoints.len(),
        report.max_deviation
    );
    for c in &report.checkpoints {
        let v = if c.pass { "ok" } else { "FAIL" };
        outln!(
            "  step {:>3} {}: fidelity {:.12} {v}",
            c.after_step,
            c.label,
            c.fidelity
        );
    }
    for b in &report.branches {
        let v = if b.pass { "ok" } else { "FAIL" };
        outln!(
            "  {}: weight {:.12} observed {} {v}",
            b.branch,
            b.weight,
            b.observed
        );
    }
    if let Some(o) = &report.outcome {
        outln!(
            "  raw ({}, {}) decoded ({}, {}) probability {:.12}",
            o.raw[0],
            o.raw[1],
            o.decoded[0],
            o.decoded[1],
            o.probability
        );
    }
}

fn verify_teleport_cmd(cli: &Cli) -> Outcome {
    let d = cli.dimension;
    let env = environment(cli)?;
    let states: Vec<&QuantumState> = env
        .iter()
        .filter_map(|(_, v)| match v {
            EnvValue::State(s) => Some(s),
            EnvValue::Int(_) => None,
        })
        .collect();
    let psi = match states.as_slice() {
        [] => haar_state(d, &mut ChaCha8Rng::seed_from_u64(cli.seed), "x"),
        [s] if s.num_qudits() == 1 => (*s).clone(),
        _ => {
            return Err(Failure::Input(
                "teleport takes exactly one single-qudit input state".into(),
            ))
        }
    };
    let report = verify_teleport(d, &psi).map_err(harness_failure)?;
    match format(cli, Format::Json) {
        Format::Json => {
            let mut value = serde_json::to_value(&report).expect("report json");
            value["input"] = state_json(&psi);
            emit(&value);
        }
        Format::Text => print_report(&report),
    }
    Ok(report.pass)
}

fn int_input(env: &Environment, name: &str) -> Result<Option<i64>, Failure> {
    match env.get(name) {
        None => Ok(None),
        Some(EnvValue::Int(i)) => Ok(Some(*i)),
        Some(EnvValue::State(_)) => Err(Failure::Input(format!("`{name}` must be an integer"))),
    }
}

fn verify_sdc_cmd(cli: &Cli) -> Outcome {
    let d = cli.dimension;
    let env = environment(cli)?;
    let pairs: Vec<(i64, i64)> = match (int_input(&env, "a")?, int_input(&env, "b")?) {
        (Some(a), Some(b)) => vec![(a, b)],
        (None, None) => (0..d as i64)
            .flat_map(|a| (0..d as i64).map(move |b| (a, b)))
            .collect(),
        _ => return Err(Failure::Input("give both a and b, or neither".into())),
    };
    for &(a, b) in &pairs {
        if !(0..d as i64).contains(&a) || !(0..d as i64).contains(&b) {
            return Err(Failure::Input(format!(
                "inputs ({a}, {b}) must lie in [0, {d})"
            )));
        }
    }
    let reports = pairs
        .iter()
        .map(|&(a, b)| verify_sdc(d, a, b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(harness_failure)?;
    let pass = reports.iter().all(|r| r.pass);
    match (format(cli, Format::Json), reports.as_slice()) {
        (Format::Json, [single]) => emit(&serde_json::to_value(single).expect("report json")),
        (Format::Json, _) => emit(&json!({
            "protocol": "sdc",
            "dimension": d,
            "pass": pass,
            "reports": reports,
        })),
        (Format::Text, _) => reports.iter().for_each(print_report),
    }
    Ok(pass)
}
