use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernel::{Expr, NetworkState};

fn atom(net: &Network, s: &NetworkState, text: &str) -> bool {
    net.eval_atom(s, &Expr::parse(text).unwrap()).unwrap()
}

fn small() -> ModelConfig {
    ModelConfig {
        v_total: 1,
        mt_total: 1,
        dt_total: 2,
        ..ModelConfig::default()
    }
}

/// Random maximal run; returns the visited states.
fn walk(net: &Network, seed: u64, max: usize) -> Vec<NetworkState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = net.initial_state();
    let mut out = vec![s.clone()];
    for _ in 0..max {
        let succ = net.successors(&s).unwrap();
        match succ.choose(&mut rng) {
            Some((_, n)) => s = n.clone(),
            None => break,
        }
        out.push(s.clone());
    }
    out
}

#[test]
fn instance_counts() {
    let net = build_network(&ModelConfig::default()).unwrap();
    assert_eq!(net.instances().len(), 12);
    let net = build_network(&small()).unwrap();
    assert_eq!(net.instances().len(), 7);
    let names: Vec<_> = net.instances().iter().map(|i| i.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "Voter(0)",
            "Coercer(0)",
            "MixTeller(0)",
            "DecTeller(0)",
            "DecTeller(1)",
            "Auditor(0)",
            "Sys(0)"
        ]
    );
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = ModelConfig {
        dt_min: 5,
        ..ModelConfig::default()
    };
    assert!(matches!(build_network(&cfg), Err(crate::Error::Config(_))));
}

#[test]
fn initial_state_is_idle() {
    let net = build_network(&ModelConfig::default()).unwrap();
    let s = net.initial_state();
    for (k, inst) in net.instances().iter().enumerate() {
        let expect = if inst.name == "Coercer(0)" { "loop" } else { "idle" };
        assert_eq!(net.location_name(k, s.locations[k] as usize), expect, "{}", inst.name);
    }
    assert!(s.values.iter().all(|&v| v == 0));
    assert!(atom(&net, &s, "Voter(0).idle"));
    assert!(!atom(&net, &s, "Voter(0).punished"));
    assert!(!atom(&net, &s, "decryptions == dt_min"));
}

#[test]
fn corrupted_teller_parameter() {
    let mut cfg = ModelConfig::default();
    cfg.corrupt_mtellers.insert(0);
    let net = build_network(&cfg).unwrap();
    let params: Vec<_> = net
        .instances()
        .iter()
        .filter(|i| i.name.starts_with("MixTeller"))
        .map(|i| i.params.clone())
        .collect();
    assert_eq!(params, vec![vec![0, 1], vec![1, 0], vec![2, 0]]);
}

#[test]
fn random_runs_reach_correct_results() {
    for v in 1..=3 {
        let cfg = ModelConfig {
            v_total: v,
            c_total: 3,
            mt_total: 2,
            ..ModelConfig::default()
        };
        let net = build_network(&cfg).unwrap();
        for seed in 0..40 {
            let run = walk(&net, seed, 10_000);
            let last = run.last().unwrap();
            assert!(net.successors(last).unwrap().is_empty() || run.len() > 10_000);
            assert!(atom(&net, last, "Sys.results"), "v={v} seed={seed}");
            let mut tally = vec![0i64; cfg.c_total];
            for i in 0..v {
                tally[net.value_of(last, &format!("Voter({i}).chosen")).unwrap() as usize] += 1;
            }
            for (x, n) in tally.iter().enumerate() {
                assert_eq!(net.value_of(last, &format!("vote_sum[{x}]")).unwrap(), *n);
            }
            assert!(!atom(&net, last, "MixTeller(0).failed_audit"));
            assert!(run.iter().all(|s| net.in_bounds(s)));
            for s in &run {
                if atom(&net, s, "Voter(0).passed") {
                    assert!(!atom(&net, s, "Voter(0).failed"));
                }
                assert!(!atom(&net, s, "Voter(0).failed"), "honest receipts verify");
            }
        }
    }
}

#[test]
fn mix_columns_preserve_plaintexts() {
    let cfg = ModelConfig {
        v_total: 3,
        mt_total: 2,
        ..ModelConfig::default()
    };
    let net = build_network(&cfg).unwrap();
    let k = cfg.group.secret_key();
    for seed in 0..20 {
        for s in walk(&net, seed, 10_000) {
            let board = board_of(&net, &cfg, &s);
            let plain = |col: usize| -> Option<Vec<i64>> {
                let mut v: Vec<i64> = board
                    .column(col)
                    .iter()
                    .map(|&c| cfg.group.decr(c, k).ok())
                    .collect::<Option<_>>()?;
                v.sort();
                Some(v)
            };
            if let Some(base) = plain(0) {
                for col in 1..=2 * cfg.mt_total {
                    if let Some(p) = plain(col) {
                        assert_eq!(p, base);
                    }
                }
            }
        }
    }
}

#[test]
fn corrupted_runs_can_fail_audit() {
    let mut cfg = ModelConfig {
        v_total: 2,
        mt_total: 1,
        ..ModelConfig::default()
    };
    cfg.corrupt_mtellers.insert(0);
    let net = build_network(&cfg).unwrap();
    let (mut fails, mut passes) = (0, 0);
    for seed in 0..200 {
        let last = walk(&net, seed, 10_000).pop().unwrap();
        fails += atom(&net, &last, "MixTeller(0).failed_audit") as usize;
        passes += atom(&net, &last, "MixTeller(0).passed_audit") as usize;
    }
    assert!(fails > 0 && passes > 0, "fails={fails} passes={passes}");
}

#[test]
fn half_of_the_audit_choices_catch_the_corrupted_mix() {
    for v in 2..=3 {
        let mut cfg = ModelConfig::with_voters(v);
        cfg.corrupt_mtellers.insert(0);
        let net = build_network(&cfg).unwrap();
        let (mut points, mut no_ops) = (0, 0);
        for seed in 0..30 {
            let Some(s) = walk(&net, seed, 10_000)
                .into_iter()
                .find(|s| is_audit_point(&net, s, 0).unwrap())
            else {
                continue;
            };
            let o = audit_outcomes(&net, &cfg, &s, 0).unwrap();
            assert_eq!(o.total, 1 << v);
            if o.substituted {
                assert_eq!(2 * o.failed, o.total, "v={v} seed={seed}");
                points += 1;
            } else {
                assert_eq!(o.failed, 0);
                no_ops += 1;
            }
        }
        assert!(points > 20 && no_ops < 10, "v={v}: {points} {no_ops}");
    }
}

#[test]
fn honest_mixes_always_pass() {
    let cfg = ModelConfig::with_voters(2);
    let net = build_network(&cfg).unwrap();
    let s = walk(&net, 3, 10_000)
        .into_iter()
        .find(|s| is_audit_point(&net, s, 0).unwrap())
        .unwrap();
    let o = audit_outcomes(&net, &cfg, &s, 0).unwrap();
    assert_eq!(
        o,
        AuditOutcome {
            failed: 0,
            total: 4,
            substituted: false
        }
    );
    assert!(audit_outcomes(&net, &cfg, &net.initial_state(), 0).is_err());
}
