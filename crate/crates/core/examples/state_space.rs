//! Reachable-state statistics of the voting model for a config file.
//!
//! `cargo run --release --example state_space -- configs/explore_v3.cfg`

use std::time::Instant;

use pavcheck::checker::{explore, CheckOptions};
use pavcheck::config::{load_config, render_config};
use pavcheck::model::build_network;

fn main() -> Result<(), pavcheck::Error> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/rf_v1.cfg".into());
    let cfg = load_config(&path)?;
    print!("{}", render_config(&cfg));
    let net = build_network(&cfg)?;
    println!(
        "{} instances, {} state slots",
        net.instances().len(),
        net.state_entries(&net.initial_state()).len()
    );
    let t = Instant::now();
    let s = explore(&net, &CheckOptions::default())?;
    println!(
        "{} states, {} transitions, {} deadlocks, max frontier {}{} in {:.2?}",
        s.states,
        s.transitions,
        s.deadlocks,
        s.max_frontier,
        if s.truncated { " (truncated)" } else { "" },
        t.elapsed()
    );
    Ok(())
}
