//! The `pav` command line.
//!
//! ```text
//! pav verify   --config F --query Q [--corrupt-mixer I]* [--search bfs|dfs|rdfs] [--seed N]
//!              [--trace OUT] [--deterministic] [--budget N] [--report OUT]
//! pav explore  --config F [--stats-json OUT] [--budget N]
//! pav simulate --config F --steps N --seed S
//! pav rf       --config F --voter I --candidate J --variant weak|strong [--observe NAME]*
//! ```
//!
//! Exit code 0 means satisfied (or a command without a verdict succeeded),
//! 1 not satisfied, 2 any error.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checker::{check, explore, CheckOptions, SearchOrder, DEFAULT_BUDGET};
use crate::config::load_config;
use crate::epistemic::{check_receipt_freeness, Variant};
use crate::kernel::StateValue;
use crate::model::{build_network, ModelConfig};
use crate::query::parse_query;
use crate::report::{verdict_text, RunReport, TraceFile};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "pav", version, about = "Model checking of a Prêt à Voter election model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one query against the model.
    Verify(VerifyArgs),
    /// Count reachable states.
    Explore(ExploreArgs),
    /// Follow one seeded random run.
    Simulate(SimulateArgs),
    /// Receipt-freeness of one voter for one candidate.
    Rf(RfArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the run report as JSON.
    #[arg(long, value_name = "OUT")]
    pub report: Option<PathBuf>,
    /// Leave wall-clock time out of the report.
    #[arg(long)]
    pub deterministic: bool,
    /// Maximum number of stored states.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub query: String,
    /// Corrupt this mix teller; repeatable.
    #[arg(long = "corrupt-mixer", value_name = "I")]
    pub corrupt_mixer: Vec<usize>,
    #[arg(long, default_value = "bfs")]
    pub search: SearchOrder,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the witness or counterexample as a JSON trace.
    #[arg(long, value_name = "OUT")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "stats-json", value_name = "OUT")]
    pub stats_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub voter: usize,
    #[arg(long)]
    pub candidate: usize,
    #[arg(long)]
    pub variant: Variant,
    /// What the coercer sees: an instance or a global; repeatable.
    /// Defaults to the coercer's own state.
    #[arg(long, value_name = "NAME")]
    pub observe: Vec<String>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Verify(a) => &a.common,
            Command::Explore(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Rf(a) => &a.common,
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing human
/// output to `out`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command, out) {
        Ok(report) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main() -> ! {
    let stdout = std::io::stdout();
    let code = run_with(std::env::args_os(), &mut stdout.lock());
    std::process::exit(code)
}

pub fn run(command: &Command, out: &mut dyn Write) -> Result<RunReport, Error> {
    let started = Instant::now();
    let common = command.common();
    let mut cfg = load_config(&common.config)?;
    let mut report = match command {
        Command::Verify(a) => {
            cfg.corrupt_mtellers.extend(a.corrupt_mixer.iter().copied());
            cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
            verify(a, &cfg, out)?
        }
        Command::Explore(a) => run_explore(a, &cfg, out)?,
        Command::Simulate(a) => simulate(a, &cfg, out)?,
        Command::Rf(a) => rf(a, &cfg, out)?,
    };
    if !common.deterministic {
        report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    if let Some(path) = &common.report {
        std::fs::write(path, report.to_json() + "\n")?;
    }
    Ok(report)
}

fn verify(a: &VerifyArgs, cfg: &ModelConfig, out: &mut dyn Write) -> Result<RunReport, Error> {
    let query = parse_query(&a.query)?;
    let net = build_network(cfg)?;
    let opts = CheckOptions::order(a.search)
        .with_seed(a.seed)
        .with_budget(a.common.budget);
    let v = check(&net, &query.formula, &opts)?;
    writeln!(out, "{}", verdict_text(v.satisfied))?;
    writeln!(out, "query: {}", query.formula)?;
    writeln!(out, "states: {}, transitions: {}", v.states_explored, v.transitions)?;
    let mut report = RunReport::new("verify", cfg);
    report.query = Some(query.formula.to_string());
    report.fragment = Some(query.class);
    report.verdict = Some(verdict_text(v.satisfied).to_string());
    report.states = v.states_explored;
    report.transitions = v.transitions;
    report.search = a.search.to_string();
    report.seed = a.seed;
    if let Some(trace) = &v.trace {
        writeln!(out, "trace: {} steps", trace.len())?;
        report.trace_length = Some(trace.len());
        if let Some(path) = &a.trace {
            let file = TraceFile::new(&net, cfg, &query.formula.to_string(), v.satisfied, trace);
            std::fs::write(path, file.to_json() + "\n")?;
        }
    } else if a.trace.is_some() {
        writeln!(out, "no trace for this verdict")?;
    }
    Ok(report)
}

fn run_explore(a: &ExploreArgs, cfg: &ModelConfig, out: &mut dyn Write) -> Result<RunReport, Error> {
    let net = build_network(cfg)?;
    let stats = explore(&net, &CheckOptions::default().with_budget(a.common.budget))?;
    writeln!(
        out,
        "states: {}, transitions: {}, deadlocks: {}, max frontier: {}{}",
        stats.states,
        stats.transitions,
        stats.deadlocks,
        stats.max_frontier,
        if stats.truncated { " (truncated)" } else { "" }
    )?;
    let mut report = RunReport::new("explore", cfg);
    report.states = stats.states;
    report.transitions = stats.transitions;
    report.explore = Some(stats);
    if let Some(path) = &a.stats_json {
        std::fs::write(path, serde_json::to_string_pretty(&stats)? + "\n")?;
    }
    Ok(report)
}

fn show(v: &StateValue) -> String {
    match v {
        StateValue::Location(l) => l.clone(),
        StateValue::Int(i) => i.to_string(),
    }
}

fn simulate(a: &SimulateArgs, cfg: &ModelConfig, out: &mut dyn Write) -> Result<RunReport, Error> {
    let net = build_network(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut state = net.initial_state();
    let mut prev = net.state_entries(&state);
    writeln!(out, "initial")?;
    for (n, v) in &prev {
        writeln!(out, "  {n} = {}", show(v))?;
    }
    let mut taken = 0;
    while taken < a.steps {
        let succ = net.successors(&state)?;
        let Some((label, next)) = succ.choose(&mut rng) else {
            writeln!(out, "deadlock after {taken} steps")?;
            break;
        };
        taken += 1;
        writeln!(out, "step {taken}: {}", label.describe(&net))?;
        let entries = net.state_entries(next);
        for ((n, v), (_, old)) in entries.iter().zip(&prev) {
            if v != old {
                writeln!(out, "  {n} = {}", show(v))?;
            }
        }
        state = next.clone();
        prev = entries;
    }
    let mut report = RunReport::new("simulate", cfg);
    report.seed = a.seed;
    report.states = taken + 1;
    report.transitions = taken;
    report.trace_length = Some(taken);
    Ok(report)
}

fn rf(a: &RfArgs, cfg: &ModelConfig, out: &mut dyn Write) -> Result<RunReport, Error> {
    let net = build_network(cfg)?;
    let r = check_receipt_freeness(&net, &a.observe, a.voter, a.candidate, a.variant, a.common.budget)?;
    writeln!(out, "{}", verdict_text(r.satisfied))?;
    writeln!(out, "query: {}", r.formula)?;
    writeln!(
        out,
        "base states: {}, augmented states: {}",
        r.base_states, r.states_explored
    )?;
    let mut report = RunReport::new("rf", cfg);
    report.query = Some(r.formula.to_string());
    report.fragment = Some(r.formula.fragment());
    report.verdict = Some(verdict_text(r.satisfied).to_string());
    report.states = r.states_explored;
    Ok(report)
}
