use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn single(initial: i64) -> Result<Network, ModelError> {
    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    t.local(VariableDecl::scalar("v", 0, 3, initial));
    let init = t.location("init", LocationKind::Initial);
    t.add_edge(Edge::new(init, init).guard("v < 3").update("v++"))?;
    let h = b.template(t);
    b.instantiate(h, &[]);
    b.build()
}

#[test]
fn initial_state_of_single_template() {
    let net = single(0).unwrap();
    let s = net.initial_state();
    assert_eq!(s.locations, vec![0]);
    assert_eq!(s.values, vec![0]);
    assert!(matches!(single(5), Err(ModelError::BadInitial { initial: 5, .. })));
}

#[test]
fn construction_errors() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::boolean("x")).global(VariableDecl::boolean("x"));
    assert!(matches!(b.build(), Err(ModelError::Duplicate { .. })));

    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    let l = t.location("l", LocationKind::Initial);
    t.add_edge(Edge::new(l, l).update("nope = 1")).unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    assert!(matches!(b.build(), Err(ModelError::Unresolved { .. })));

    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    let l = t.location("l", LocationKind::Initial);
    t.add_edge(Edge::new(l, l).send("c")).unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    assert!(matches!(b.build(), Err(ModelError::Unresolved { kind: "channel", .. })));

    let mut t = ProcessTemplate::new("T");
    let l = t.location("l", LocationKind::Initial);
    assert!(matches!(
        t.add_edge(Edge::new(l, l).guard("x <")),
        Err(ModelError::Syntax { .. })
    ));

    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    t.location("a", LocationKind::Normal);
    let h = b.template(t);
    b.instantiate(h, &[]);
    assert!(matches!(b.build(), Err(ModelError::InitialLocation(_))));
}

/// P: i0 -> c0 (committed) -> c1; Q: loop on q0.
fn committed_toy() -> Network {
    let mut b = NetworkBuilder::new();
    let mut p = ProcessTemplate::new("P");
    let i0 = p.location("i0", LocationKind::Initial);
    let c0 = p.location("c0", LocationKind::Committed);
    let c1 = p.location("c1", LocationKind::Normal);
    p.add_edge(Edge::new(i0, c0)).unwrap();
    p.add_edge(Edge::new(c0, c1)).unwrap();
    let mut q = ProcessTemplate::new("Q");
    let q0 = q.location("q0", LocationKind::Initial);
    q.add_edge(Edge::new(q0, q0)).unwrap();
    let (hp, hq) = (b.template(p), b.template(q));
    b.instantiate(hp, &[]).instantiate(hq, &[]);
    b.build().unwrap()
}

#[test]
fn committed_location_has_priority() {
    let net = committed_toy();
    let s0 = net.initial_state();
    assert_eq!(net.successors(&s0).unwrap().len(), 2);
    let s1 = NetworkState {
        locations: vec![1, 0],
        values: vec![],
    };
    let succ = net.successors(&s1).unwrap();
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].0.participants[0].instance, 0);
    assert_eq!(succ[0].1.locations, vec![2, 0]);
}

#[test]
fn sender_updates_run_first() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::boolean("g")).channel(Channel::binary("c"));
    let mut s = ProcessTemplate::new("S");
    let s0 = s.location("s0", LocationKind::Initial);
    let s1 = s.location("s1", LocationKind::Normal);
    s.add_edge(Edge::new(s0, s1).send("c").update("g = 1")).unwrap();
    let mut r = ProcessTemplate::new("R");
    r.local(VariableDecl::boolean("l"));
    let r0 = r.location("r0", LocationKind::Initial);
    let r1 = r.location("r1", LocationKind::Normal);
    r.add_edge(Edge::new(r0, r1).recv("c").update("l = g")).unwrap();
    let (hs, hr) = (b.template(s), b.template(r));
    b.instantiate(hr, &[]).instantiate(hs, &[]);
    let net = b.build().unwrap();
    let succ = net.successors(&net.initial_state()).unwrap();
    assert_eq!(succ.len(), 1);
    let (label, next) = &succ[0];
    assert_eq!(label.kind, TransitionKind::BinarySync);
    assert_eq!(label.participants[0].instance, 1, "sender listed first");
    assert_eq!(net.value_of(next, "R(0).l").unwrap(), 1);
}

fn broadcast_toy(with_disabled: bool) -> Network {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::scalar("n", 0, 5, 0))
        .channel(Channel::broadcast("b"));
    let mut s = ProcessTemplate::new("S");
    let s0 = s.location("s0", LocationKind::Initial);
    let s1 = s.location("s1", LocationKind::Normal);
    s.add_edge(Edge::new(s0, s1).send("b").update("n = 1")).unwrap();
    let mut r = ProcessTemplate::new("R");
    r.parameter("on");
    let r0 = r.location("r0", LocationKind::Initial);
    let r1 = r.location("r1", LocationKind::Normal);
    r.add_edge(Edge::new(r0, r1).guard("on").recv("b").update("n = n * 2"))
        .unwrap();
    let (hs, hr) = (b.template(s), b.template(r));
    b.instantiate(hs, &[]).instantiate(hr, &[1]).instantiate(hr, &[1]);
    if with_disabled {
        b.instantiate(hr, &[0]);
    }
    b.build().unwrap()
}

#[test]
fn broadcast_takes_all_enabled_receivers() {
    let net = broadcast_toy(true);
    let succ = net.successors(&net.initial_state()).unwrap();
    assert_eq!(succ.len(), 1);
    let (label, next) = &succ[0];
    assert_eq!(label.kind, TransitionKind::Broadcast);
    assert_eq!(label.participants.len(), 3);
    assert_eq!(next.values, vec![4], "sender then receivers in order");
    assert_eq!(next.locations, vec![1, 1, 1, 0]);

    let without = broadcast_toy(false);
    let other = without.successors(&without.initial_state()).unwrap();
    assert_eq!(other[0].1.locations, next.locations[..3]);
    assert_eq!(other[0].1.values, next.values);
}

#[test]
fn broadcast_without_receivers_and_binary_without_partner() {
    let mut b = NetworkBuilder::new();
    b.channel(Channel::broadcast("b")).channel(Channel::binary("a"));
    let mut s = ProcessTemplate::new("S");
    let s0 = s.location("s0", LocationKind::Initial);
    s.add_edge(Edge::new(s0, s0).send("b")).unwrap();
    s.add_edge(Edge::new(s0, s0).send("a")).unwrap();
    s.add_edge(Edge::new(s0, s0).recv("a")).unwrap();
    let h = b.template(s);
    b.instantiate(h, &[]);
    let net = b.build().unwrap();
    let succ = net.successors(&net.initial_state()).unwrap();
    assert_eq!(succ.len(), 1, "no self-synchronisation on a binary channel");
    assert_eq!(succ[0].0.kind, TransitionKind::Broadcast);
    assert_eq!(succ[0].0.participants.len(), 1);
}

#[test]
fn broadcast_receiver_options_multiply() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::scalar("x", 0, 9, 0))
        .channel(Channel::broadcast("b"));
    let mut s = ProcessTemplate::new("S");
    let s0 = s.location("s0", LocationKind::Initial);
    s.add_edge(Edge::new(s0, s0).send("b")).unwrap();
    let mut r = ProcessTemplate::new("R");
    let r0 = r.location("r0", LocationKind::Initial);
    r.add_edge(Edge::new(r0, r0).select("k", 1, 2).recv("b").update("x = x + k"))
        .unwrap();
    let (hs, hr) = (b.template(s), b.template(r));
    b.instantiate(hs, &[]).instantiate(hr, &[]).instantiate(hr, &[]);
    let net = b.build().unwrap();
    let succ = net.successors(&net.initial_state()).unwrap();
    let xs: Vec<i32> = succ.iter().map(|(_, s)| s.values[0]).collect();
    assert_eq!(xs, vec![2, 3, 3, 4]);
}

#[test]
fn bound_violations_are_discarded() {
    let net = single(0).unwrap();
    let mut b = NetworkBuilder::new();
    let mut t = ProcessTemplate::new("T");
    t.local(VariableDecl::scalar("v", 0, 1, 1));
    let l = t.location("l", LocationKind::Initial);
    t.add_edge(Edge::new(l, l).update("v = v + 1")).unwrap();
    t.add_edge(Edge::new(l, l).update("v = 0")).unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    let over = b.build().unwrap();
    let succ = over.successors(&over.initial_state()).unwrap();
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].0.participants[0].edge, 1);
    let s = NetworkState {
        locations: vec![0],
        values: vec![3],
    };
    assert!(net.successors(&s).unwrap().is_empty(), "deadlock");
}

#[test]
fn evaluation_errors_name_the_edge() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::array("arr", &[2], 0, 1, 0));
    let mut t = ProcessTemplate::new("T");
    t.local(VariableDecl::scalar("i", 0, 5, 3));
    let l = t.location("l", LocationKind::Initial);
    t.add_edge(Edge::new(l, l).guard("arr[i] == 0")).unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    let net = b.build().unwrap();
    let err = net.successors(&net.initial_state()).unwrap_err();
    match err {
        EvalError::AtEdge { instance, edge, inner } => {
            assert_eq!(instance, "T(0)");
            assert_eq!(edge, 0);
            assert!(matches!(*inner, EvalError::IndexOutOfRange { index: 3, .. }));
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn selection_order_is_last_fastest() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::scalar("x", 0, 9, 0));
    let mut t = ProcessTemplate::new("T");
    let l = t.location("l", LocationKind::Initial);
    t.add_edge(
        Edge::new(l, l)
            .select("a", 0, 1)
            .select("b", 0, 2)
            .update("x = a * 3 + b"),
    )
    .unwrap();
    let h = b.template(t);
    b.instantiate(h, &[]);
    let net = b.build().unwrap();
    let xs: Vec<i32> = net
        .successors(&net.initial_state())
        .unwrap()
        .iter()
        .map(|(_, s)| s.values[0])
        .collect();
    assert_eq!(xs, vec![0, 1, 2, 3, 4, 5]);
}

#[test]
fn atoms() {
    let net = committed_toy();
    let s = net.initial_state();
    let ev = |t: &str| net.eval_atom(&s, &Expr::parse(t).unwrap());
    assert!(ev("P(0).i0").unwrap());
    assert!(ev("P.i0").unwrap());
    assert!(!ev("P(0).c1").unwrap());
    assert!(!ev("deadlock").unwrap());
    assert!(ev("P(0).nowhere").is_err());
    assert!(ev("R(0).i0").is_err());
}

#[test]
fn key_widths_and_round_trip() {
    let mut b = NetworkBuilder::new();
    b.global(VariableDecl::scalar("small", -3, 3, 0))
        .global(VariableDecl::scalar("mid", 0, 1000, 0))
        .global(VariableDecl::scalar("big", -100_000, 100_000, 0));
    let mut t = ProcessTemplate::new("T");
    t.location("l", LocationKind::Initial);
    let h = b.template(t);
    b.instantiate(h, &[]);
    let net = b.build().unwrap();
    let s = NetworkState {
        locations: vec![0],
        values: vec![-3, 999, -77_777],
    };
    let key = net.canonical_key(&s);
    assert_eq!(key.len(), 1 + 1 + 2 + 4);
    assert_eq!(net.decode_key(&key), s);
    assert_eq!(
        net.canonical_key(&net.initial_state()),
        vec![0, 3, 0, 0, 0xa0, 0x86, 0x01, 0x00]
    );
}

fn random_state(net: &Network, rng: &mut ChaCha8Rng) -> NetworkState {
    use rand::Rng;
    let locations = (0..net.instances().len())
        .map(|i| rng.gen_range(0..net.template_of(i).locations.len()) as u16)
        .collect();
    let mut values = vec![0; net.slot_count()];
    for v in net.variables() {
        for k in 0..v.len() {
            values[v.base + k] = rng.gen_range(v.lower..=v.upper) as i32;
        }
    }
    NetworkState { locations, values }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn successors_are_deterministic_bounded_and_committed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, &RandomShape { committed_ratio: 0.3, ..RandomShape::default() }).unwrap();
        for _ in 0..20 {
            let s = random_state(&net, &mut rng);
            let a = net.successors(&s).unwrap();
            let b = net.successors(&s).unwrap();
            prop_assert_eq!(&a, &b);
            let committed = (0..s.locations.len()).any(|i| net.is_committed(i, s.locations[i] as usize));
            for (label, next) in &a {
                prop_assert!(net.in_bounds(next));
                if label.kind == TransitionKind::BinarySync {
                    prop_assert_eq!(label.participants.len(), 2);
                }
                if committed {
                    prop_assert!(label
                        .participants
                        .iter()
                        .any(|p| net.is_committed(p.instance, s.locations[p.instance] as usize)));
                }
            }
        }
    }

    #[test]
    fn keys_are_injective(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, &RandomShape::default()).unwrap();
        let mut seen = std::collections::HashMap::new();
        for _ in 0..50 {
            let s = random_state(&net, &mut rng);
            let k = net.canonical_key(&s);
            prop_assert_eq!(&net.decode_key(&k), &s);
            if let Some(prev) = seen.insert(k, s.clone()) {
                prop_assert_eq!(prev, s);
            }
        }
    }

    #[test]
    fn overflowing_updates_never_escape_bounds(start in 0i64..=3, step in 1i64..5) {
        let mut b = NetworkBuilder::new();
        b.global(VariableDecl::scalar("x", 0, 3, start));
        let mut t = ProcessTemplate::new("T");
        let l = t.location("l", LocationKind::Initial);
        t.add_edge(Edge::new(l, l).update(&format!("x += {step}"))).unwrap();
        t.add_edge(Edge::new(l, l).update(&format!("x -= {step}"))).unwrap();
        let h = b.template(t);
        b.instantiate(h, &[]);
        let net = b.build().unwrap();
        let succ = net.successors(&net.initial_state()).unwrap();
        let expect = [(start + step <= 3), (start - step >= 0)].iter().filter(|&&b| b).count();
        prop_assert_eq!(succ.len(), expect);
        prop_assert!(succ.iter().all(|(_, s)| net.in_bounds(s)));
    }
}

#[test]
fn binary_sync_needs_both_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let net = random_network(&mut rng, &RandomShape::default()).unwrap();
        let mut seen = HashSet::new();
        let mut stack = vec![net.initial_state()];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) || seen.len() > 2000 {
                continue;
            }
            for (label, next) in net.successors(&s).unwrap() {
                if label.kind == TransitionKind::BinarySync {
                    let dirs: Vec<_> = label
                        .participants
                        .iter()
                        .map(|p| {
                            net.template_of(p.instance).edges[p.edge]
                                .sync
                                .as_ref()
                                .unwrap()
                                .direction
                        })
                        .collect();
                    assert_eq!(dirs, vec![Direction::Send, Direction::Receive]);
                    assert_ne!(label.participants[0].instance, label.participants[1].instance);
                }
                stack.push(next);
            }
        }
    }
}
