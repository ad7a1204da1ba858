//! Coercer knowledge reduced to CTL on a model with reverse states.
//!
//! First a six-state toy where the coercer sees a receipt, then the election
//! model with one voter.
//!
//! `cargo run --release --example receipt_freeness`

use pavcheck::checker::{check, CheckOptions, Formula};
use pavcheck::config::parse_config;
use pavcheck::epistemic::{
    augment, build_rf_strong_at, build_rf_weak, check_receipt_freeness, Kripke, ObservableSpec, Variant,
};
use pavcheck::model::build_network;

fn toy(view: [i64; 3]) -> Result<(bool, bool), pavcheck::Error> {
    // 0 -> 1 (vote j) -> 3, 0 -> 2 (other) -> 4, 0 -> 5 (abstain).
    let mut k = Kripke::new(6);
    k.edge(0, 1).edge(0, 2).edge(0, 5).edge(1, 3).edge(2, 4);
    k.prop("vote_j", &[1, 3])
        .prop("vote_other", &[2, 4])
        .prop("done", &[3, 4, 5]);
    k.observation = vec![0, 0, 0, view[0], view[1], view[2]];
    let done = Formula::parse_atom("done")?;
    let flags = ObservableSpec::default()
        .with_vote_flags(0, 1, Formula::parse_atom("vote_j")?, Formula::parse_atom("vote_other")?)
        .flags;
    let aug = augment(&k, |s| vec![k.observation[*s as usize]], &flags, &done, 1000)?;
    let o = CheckOptions::default();
    Ok((
        check(&aug, &build_rf_weak(0, 1), &o)?.satisfied,
        check(&aug, &build_rf_strong_at(done, 0, 1), &o)?.satisfied,
    ))
}

fn main() -> Result<(), pavcheck::Error> {
    for (what, view) in [
        ("receipt shows the vote", [1, 2, 3]),
        ("receipt hides it", [1, 1, 1]),
        ("abstention visible", [1, 1, 2]),
    ] {
        let (weak, strong) = toy(view)?;
        println!("toy, {what:<22} weak={weak} strong={strong}");
    }

    let cfg = parse_config("v_total = 1\nc_total = 2\nmt_total = 1\ndt_total = 2\nrand_values = [1]\natomic_pipeline = 1\ncoerced_voters = [0]")?;
    let net = build_network(&cfg)?;
    for (observed, variant) in [
        (vec![], Variant::Weak),
        (vec![], Variant::Strong),
        (vec!["Coercer".to_string(), "vote_sum".into()], Variant::Weak),
    ] {
        let r = check_receipt_freeness(&net, &observed, 0, 1, variant, 1_000_000)?;
        println!(
            "model, {variant}, coercer sees {:?}: satisfied={} ({} base states, {} augmented)",
            if observed.is_empty() {
                vec!["Coercer".to_string()]
            } else {
                observed
            },
            r.satisfied,
            r.base_states,
            r.states_explored
        );
    }
    Ok(())
}
