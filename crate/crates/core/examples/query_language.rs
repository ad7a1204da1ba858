//! Parsing, classifying and pretty-printing queries.
//!
//! `cargo run --example query_language -- "A[] not Voter(0).punished"`

use pavcheck::query::parse_query;

fn main() {
    let mut queries: Vec<String> = std::env::args().skip(1).collect();
    if queries.is_empty() {
        queries = [
            "E<> MixTeller(0).failed_audit",
            "A[] not Voter(0).punished",
            "Voter(0).has_ballot --> Voter(0).marked_choice",
            "A[] ((Sys.results and real) imply E<> (voted_0_1 and initial))",
            "E<> (vote_sum[0] + vote_sum[1]) == v_total && !deadlock",
            "E[ Voter(0).idle U Voter(0).has_ballot ]",
            "A[] (p and",
            "A<< p",
        ]
        .map(String::from)
        .to_vec();
    }
    for text in queries {
        match parse_query(&text) {
            Ok(q) => println!("{text}\n    {:?}: {}", q.class, q.formula),
            Err(e) => println!("{text}\n    error: {e}"),
        }
    }
}
