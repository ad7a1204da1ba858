//! The coercer can punish a voter: a counterexample written as a JSON trace
//! and replayed step by step.
//!
//! `cargo run --release --example coercion_trace -- [OUT.json]`

use pavcheck::checker::{check, CheckOptions, SearchOrder};
use pavcheck::model::{build_network, ModelConfig};
use pavcheck::query::parse_query;
use pavcheck::report::{replay, TraceFile};

fn main() -> Result<(), pavcheck::Error> {
    let cfg = ModelConfig::with_voters(1);
    let net = build_network(&cfg)?;
    let q = parse_query("A[] not Voter(0).punished")?;
    let v = check(&net, &q.formula, &CheckOptions::order(SearchOrder::Bfs))?;
    let trace = v.trace.expect("a counterexample");
    let file = TraceFile::new(&net, &cfg, &q.formula.to_string(), v.satisfied, &trace);
    for (n, step) in file.steps.iter().enumerate().skip(1) {
        println!("{n:>3} {}", step.action);
    }
    let json = file.to_json();
    if let Some(out) = std::env::args().nth(1) {
        std::fs::write(&out, &json)?;
        println!("written to {out}");
    }
    let back = replay(&TraceFile::from_json(&json)?)?;
    println!("replayed {} steps against the rebuilt network", back.trace.len());
    Ok(())
}
