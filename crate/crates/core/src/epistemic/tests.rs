use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use super::*;
use crate::checker::{check, validate_trace, CheckOptions, Labeller};
use crate::kernel::{Edge, LocationKind, NetworkBuilder, ProcessTemplate};
use crate::model::{build_network, ModelConfig};

fn atom(s: &str) -> Formula {
    Formula::parse_atom(s).unwrap()
}

/// `T(0)`: a -> b, nothing else.
fn chain() -> Network {
    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    let a = t.location("a", LocationKind::Initial);
    let bb = t.location("b", LocationKind::Normal);
    t.add_edge(Edge::new(a, bb)).unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    b.build().unwrap()
}

/// Every reachable augmented state with its successors.
fn reachable<T: TransitionSystem>(aug: &Augmented<'_, T>) -> Vec<(AugState, Vec<(AugLabel, AugState)>)> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([aug.initial()]);
    let mut out = Vec::new();
    seen.insert((false, 0u32, aug.initial().flags));
    while let Some(s) = queue.pop_front() {
        let succ = aug.successors(&s).unwrap();
        for (_, t) in &succ {
            if seen.insert((t.reverse, t.base, t.flags)) {
                queue.push_back(*t);
            }
        }
        out.push((s, succ));
    }
    out
}

#[test]
fn chain_closes_into_a_cycle() {
    let net = chain();
    let spec = ObservableSpec {
        observed: vec![],
        flags: vec![],
    };
    let aug = augment_network(&net, &spec, &atom("T(0).b"), 100).unwrap();
    let all = reachable(&aug);
    assert_eq!(all.len(), 4, "a, b and their reverse copies");
    let (rb, succ) = all.iter().find(|(s, _)| s.reverse && s.base == 1).unwrap();
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].0, AugLabel::Back { from: 1, to: 0 });
    assert!(rb.flags & 1 == 1, "the jump happened after the condition held");

    let v = check(
        &aug,
        &Formula::ef(Formula::and(atom(RESULTS), atom(INITIAL))),
        &CheckOptions::default(),
    )
    .unwrap();
    assert!(v.satisfied);
    let tr = v.trace.unwrap();
    validate_trace(&aug, &tr).unwrap();
    let path: Vec<(bool, u32)> = tr.states.iter().map(|s| (s.reverse, s.base)).collect();
    assert_eq!(path, [(false, 0), (false, 1), (true, 1), (true, 0)]);
    assert!(aug.base_label(&tr.labels[0]).unwrap().is_some());
    assert!(aug.base_label(&tr.labels[1]).unwrap().is_none());
    assert_eq!(
        aug.base_label(&tr.labels[2]).unwrap(),
        aug.base_label(&tr.labels[0]).unwrap(),
        "the backward step replays the forward edge"
    );
}

#[test]
fn forward_flags_survive_the_reverse_path() {
    let net = chain();
    let spec = ObservableSpec {
        observed: vec![],
        flags: vec![FlagSpec::new("was_a", atom("T(0).a"), Phase::Forward)],
    };
    let aug = augment_network(&net, &spec, &atom("T(0).b"), 100).unwrap();
    for (s, _) in reachable(&aug) {
        assert_eq!(aug.flag(&s, "was_a"), Some(true));
    }
    let spec = ObservableSpec {
        observed: vec![],
        flags: vec![FlagSpec::new("back_at_a", atom("T(0).a"), Phase::Reverse)],
    };
    let aug = augment_network(&net, &spec, &atom("T(0).b"), 100).unwrap();
    for (s, _) in reachable(&aug) {
        assert_eq!(aug.flag(&s, "back_at_a"), Some(s.reverse && s.base == 0));
    }
}

#[test]
fn construction_errors() {
    let net = chain();
    let mut b = NetworkBuilder::new();
    b.global(crate::kernel::VariableDecl::scalar("g", 0, 1, 0));
    let mut t = ProcessTemplate::new("T");
    t.location("a", LocationKind::Initial);
    let h = b.template(t);
    b.instantiate(h, &[]);
    let with_g = b.build().unwrap();
    let clash = ObservableSpec {
        observed: vec![],
        flags: vec![FlagSpec::new("g", atom("T(0).a"), Phase::Both)],
    };
    assert!(matches!(
        augment_network(&with_g, &clash, &atom("T(0).a"), 100),
        Err(Error::Config(_))
    ));
    let reserved = ObservableSpec {
        observed: vec![],
        flags: vec![FlagSpec::new(REAL, atom("T(0).a"), Phase::Both)],
    };
    assert!(matches!(
        augment_network(&net, &reserved, &atom("T(0).b"), 100),
        Err(Error::Config(_))
    ));
    let unknown = ObservableSpec {
        observed: vec!["Nobody".into()],
        flags: vec![],
    };
    assert!(matches!(
        augment_network(&net, &unknown, &atom("T(0).b"), 100),
        Err(Error::Config(_))
    ));
    let nested = Formula::ef(atom("T(0).b"));
    assert!(augment_network(&net, &ObservableSpec::default().observe("T"), &nested, 100).is_err());

    let mut k = Kripke::new(1);
    k.prop("p", &[0]);
    let f = [FlagSpec::new("p", atom("p"), Phase::Both)];
    assert!(matches!(
        augment(&k, |_| vec![], &f, &atom("p"), 10),
        Err(Error::Config(_))
    ));
}

/// Voter chooses j (1) or another candidate (2) or abstains (5); the
/// results states 3, 4 and 5 show the coercer `view`.
fn receipt_toy(view: [i64; 3]) -> Kripke {
    let mut k = Kripke::new(6);
    k.edge(0, 1).edge(0, 2).edge(0, 5).edge(1, 3).edge(2, 4);
    k.prop("vote_j", &[1, 3])
        .prop("vote_other", &[2, 4])
        .prop("done", &[3, 4, 5]);
    k.observation = vec![0, 0, 0, view[0], view[1], view[2]];
    k
}

fn rf_spec() -> Vec<FlagSpec> {
    ObservableSpec::default()
        .with_vote_flags(0, 1, atom("vote_j"), atom("vote_other"))
        .flags
}

fn kripke_verdicts(k: &Kripke) -> (bool, bool) {
    let aug = augment(k, |s| vec![k.observation[*s as usize]], &rf_spec(), &atom("done"), 1000).unwrap();
    let weak = check(&aug, &build_rf_weak(0, 1), &CheckOptions::default())
        .unwrap()
        .satisfied;
    let strong = check(&aug, &build_rf_strong_at(atom("done"), 0, 1), &CheckOptions::default())
        .unwrap()
        .satisfied;
    (weak, strong)
}

#[test]
fn revealing_receipt_breaks_both_variants() {
    assert_eq!(kripke_verdicts(&receipt_toy([1, 2, 3])), (false, false));
}

#[test]
fn hidden_vote_satisfies_both_variants() {
    assert_eq!(kripke_verdicts(&receipt_toy([1, 1, 1])), (true, true));
}

#[test]
fn abstention_alone_breaks_the_strong_variant() {
    // The other vote hides behind j, but abstaining is visible.
    assert_eq!(kripke_verdicts(&receipt_toy([1, 1, 2])), (true, false));
}

/// Brute-force knowledge over reachable `done` states: the coercer considers
/// `t` possible at `s` when both are done and look the same.
fn oracle(k: &Kripke) -> (bool, bool) {
    let mut reach = vec![false; k.len()];
    let mut stack = vec![0u32];
    reach[0] = true;
    while let Some(s) = stack.pop() {
        for &t in &k.succ[s as usize] {
            if !reach[t as usize] {
                reach[t as usize] = true;
                stack.push(t);
            }
        }
    }
    let done: Vec<u32> = (0..k.len() as u32)
        .filter(|&s| reach[s as usize] && k.holds("done", s))
        .collect();
    let possible_j = |s: u32| {
        done.iter()
            .any(|&t| k.observation[t as usize] == k.observation[s as usize] && k.holds("vote_j", t))
    };
    let weak = done.iter().any(|&s| k.holds("vote_other", s) && possible_j(s));
    let strong = done.iter().all(|&s| possible_j(s));
    (weak, strong)
}

/// Random structure of at most 12 states in which votes persist: a state
/// carries no vote, j or other, and edges never change a vote once cast.
fn random_kripke() -> impl Strategy<Value = Kripke> {
    (3usize..=12)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(0u8..3, n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0i64..3, n),
                prop::collection::vec((0..n as u32, 0..n as u32), 0..3 * n),
            )
        })
        .prop_map(|(n, mut vote, done, obs, edges)| {
            vote[0] = 0;
            let mut k = Kripke::new(n);
            for (a, b) in edges {
                let (va, vb) = (vote[a as usize], vote[b as usize]);
                if va == 0 || va == vb {
                    k.edge(a, b);
                }
            }
            let pick = |f: &dyn Fn(usize) -> bool| (0..n as u32).filter(|&s| f(s as usize)).collect::<Vec<_>>();
            k.prop("vote_j", &pick(&|s| vote[s] == 1));
            k.prop("vote_other", &pick(&|s| vote[s] == 2));
            k.prop("done", &pick(&|s| done[s]));
            k.observation = obs;
            k
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_agrees_with_brute_force_knowledge(k in random_kripke()) {
        prop_assert_eq!(kripke_verdicts(&k), oracle(&k));
    }

    #[test]
    fn augmented_structure_invariants(k in random_kripke()) {
        let aug = augment(&k, |s| vec![k.observation[*s as usize]], &rf_spec(), &atom("done"), 1000).unwrap();
        let base = aug.base_graph();
        let id = |i: u32| base.state(&k, i as usize);
        for (s, succ) in reachable(&aug) {
            prop_assert!((s.base as usize) < base.len(), "mirror is a reachable base state");
            for (label, t) in succ {
                prop_assert_eq!(s.flags & !t.flags, 0, "flags never clear");
                match label {
                    AugLabel::Back { from, to } => {
                        prop_assert!(s.reverse && t.reverse);
                        prop_assert!(k.succ[id(to) as usize].contains(&id(from)), "reverse edge mirrors a base edge");
                    }
                    AugLabel::Step { from, to } => {
                        prop_assert!(!s.reverse && !t.reverse);
                        prop_assert!(k.succ[id(from) as usize].contains(&id(to)));
                    }
                    AugLabel::Jump { from, to } => {
                        prop_assert!(!s.reverse && t.reverse);
                        prop_assert!(k.holds("done", id(from)) && k.holds("done", id(to)));
                        prop_assert_eq!(k.observation[id(from) as usize], k.observation[id(to) as usize]);
                    }
                }
            }
        }
        // The real side is an exact copy of the base system.
        let real = Formula::atom(Expr::name(REAL));
        let graph = Graph::build(&aug, 100_000).unwrap();
        let mut lab = Labeller::new(&aug, &graph);
        let real_count = lab.label(&real).unwrap().iter().filter(|&&b| b).count();
        prop_assert!(real_count >= base.len());
    }
}

fn rf_config(v: usize) -> ModelConfig {
    ModelConfig {
        v_total: v,
        c_total: 2,
        mt_total: 1,
        dt_total: 2,
        rand_values: vec![1],
        atomic_pipeline: true,
        coerced_voters: vec![0],
        ..ModelConfig::default()
    }
}

#[test]
fn model_single_voter_verdicts() {
    let net = build_network(&rf_config(1)).unwrap();
    let weak = check_receipt_freeness(&net, &[], 0, 1, Variant::Weak, 1_000_000).unwrap();
    assert!(weak.satisfied);
    let strong = check_receipt_freeness(&net, &[], 0, 1, Variant::Strong, 1_000_000).unwrap();
    assert!(!strong.satisfied, "a shown receipt identifies the vote");
    // Publishing the tally to the coercer gives a single vote away.
    let tally = vec!["Coercer".to_string(), "vote_sum".to_string()];
    let weak = check_receipt_freeness(&net, &tally, 0, 1, Variant::Weak, 1_000_000).unwrap();
    assert!(!weak.satisfied);
}

#[test]
fn strong_query_text_is_accepted() {
    let net = build_network(&rf_config(1)).unwrap();
    let aug = augment_network(
        &net,
        &ObservableSpec::receipt_freeness(0, 1),
        &results_condition(),
        1_000_000,
    )
    .unwrap();
    let f = build_rf_strong(0, 1);
    assert_eq!(
        f.to_string(),
        "A[] ((Sys.results and real) imply (EX ((not real) and (E<> (voted_0_1 and initial)))))"
    );
    assert!(aug.compile_atom(&Expr::parse("real && voted_0_1").unwrap()).is_ok());
    assert!(aug.compile_atom(&Expr::parse("voted_0_1 + 1 > 0").unwrap()).is_err());
}
