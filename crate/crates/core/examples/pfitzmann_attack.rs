//! A corrupted mix teller substitutes one output and is caught by the audit
//! in half of the side assignments.
//!
//! `cargo run --release --example pfitzmann_attack`

use pavcheck::checker::{check, CheckOptions, SearchOrder};
use pavcheck::model::{audit_outcomes, build_network, is_audit_point, ModelConfig};
use pavcheck::query::parse_query;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), pavcheck::Error> {
    let mut cfg = ModelConfig::with_voters(2);
    cfg.corrupt_mtellers.insert(0);
    let net = build_network(&cfg)?;

    for text in ["E<> MixTeller(0).failed_audit", "E<> MixTeller(0).passed_audit"] {
        let q = parse_query(text)?;
        let v = check(&net, &q.formula, &CheckOptions::order(SearchOrder::Dfs))?;
        println!("{text}: satisfied={} after {} states", v.satisfied, v.states_explored);
        if let Some(t) = v.trace {
            for label in t.labels.iter().rev().take(3).rev() {
                println!("    ... {}", label.describe(&net));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut s = net.initial_state();
    while !is_audit_point(&net, &s, 0)? {
        s = net
            .successors(&s)?
            .choose(&mut rng)
            .expect("the run reaches the audit")
            .1
            .clone();
    }
    let o = audit_outcomes(&net, &cfg, &s, 0)?;
    println!(
        "one run: {} of {} audit side assignments fail the teller (substitution visible: {})",
        o.failed, o.total, o.substituted
    );
    Ok(())
}
