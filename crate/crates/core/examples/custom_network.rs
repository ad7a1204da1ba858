//! Building a network by hand and checking plain and nested CTL on it.
//!
//! A producer hands items to a consumer over a binary channel; the consumer
//! passes through a committed location that forbids interleaving.
//!
//! `cargo run --example custom_network`

use pavcheck::checker::{check, explore, CheckOptions, SearchOrder};
use pavcheck::kernel::{Channel, Edge, LocationKind, NetworkBuilder, ProcessTemplate, VariableDecl};
use pavcheck::query::parse_query;

fn main() -> Result<(), pavcheck::Error> {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::scalar("items", 0, 3, 0))
        .channel(Channel::binary("hand"));

    let mut p = ProcessTemplate::new("Producer");
    let idle = p.location("idle", LocationKind::Initial);
    p.add_edge(Edge::new(idle, idle).guard("items < 3").send("hand"))?;

    let mut c = ProcessTemplate::new("Consumer");
    let wait = c.location("wait", LocationKind::Initial);
    let got = c.location("got", LocationKind::Committed);
    c.add_edge(Edge::new(wait, got).recv("hand"))?;
    c.add_edge(Edge::new(got, wait).update("items++"))?;

    let (ph, ch) = (b.template(p), b.template(c));
    b.instantiate(ph, &[]);
    b.instantiate(ch, &[]);
    let net = b.build()?;

    let stats = explore(&net, &CheckOptions::default())?;
    println!(
        "{} states, {} transitions, {} deadlocks",
        stats.states, stats.transitions, stats.deadlocks
    );

    for text in [
        "E<> items == 3",
        "A[] (Consumer(0).got imply items < 3)",
        "A<> deadlock",
        "Consumer(0).got --> items > 0",
        "A[] (items < 3 imply E<> items == 3)",
        "E[ Consumer(0).wait U items == 1 ]",
    ] {
        let q = parse_query(text)?;
        let v = check(&net, &q.formula, &CheckOptions::order(SearchOrder::Dfs))?;
        let steps = v.trace.map(|t| t.len().to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<40} {:?} satisfied={} trace={steps}",
            q.formula.to_string(),
            q.class,
            v.satisfied
        );
    }
    Ok(())
}
