//! Seeded generator of small well-formed networks, for fuzzing the semantics
//! and cross-checking verification routines.

use rand::Rng;

use super::error::ModelError;
use super::network::{Network, NetworkBuilder};
use super::template::{Channel, Edge, LocationKind, ProcessTemplate, VariableDecl};

/// Shape limits for [`random_network`].
#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub processes: usize,
    pub locations: usize,
    pub edges_per_process: usize,
    pub globals: usize,
    /// Inclusive upper bound of every global (lower bound 0).
    pub max_value: i64,
    pub committed_ratio: f64,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            processes: 3,
            locations: 4,
            edges_per_process: 5,
            globals: 2,
            max_value: 2,
            committed_ratio: 0.15,
        }
    }
}

fn guard_text<R: Rng>(rng: &mut R, shape: &RandomShape) -> Option<String> {
    let g = rng.gen_range(0..shape.globals);
    let k = rng.gen_range(0..=shape.max_value);
    match rng.gen_range(0..4) {
        0 => Some(format!("g{g} < {k}")),
        1 => Some(format!("g{g} == {k}")),
        2 => Some(format!("g{g} != {k} || g{} > 0", rng.gen_range(0..shape.globals))),
        _ => None,
    }
}

fn update_text<R: Rng>(rng: &mut R, shape: &RandomShape, has_sel: bool) -> Option<String> {
    let g = rng.gen_range(0..shape.globals);
    match rng.gen_range(0..5) {
        // may overflow the bound; such transitions are dropped
        0 => Some(format!("g{g}++")),
        1 => Some(format!("g{g} = {}", rng.gen_range(0..=shape.max_value))),
        2 if has_sel => Some(format!("g{g} = s")),
        3 => Some(format!("g{g} = g{}", rng.gen_range(0..shape.globals))),
        _ => None,
    }
}

/// A random network over globals `g0..`, binary channel `a` and broadcast `b`.
/// Process `P(i)` has locations `l0..`; `l0` is initial.
pub fn random_network<R: Rng>(rng: &mut R, shape: &RandomShape) -> Result<Network, ModelError> {
    let mut b = NetworkBuilder::new();
    for g in 0..shape.globals {
        b.global(VariableDecl::scalar(format!("g{g}"), 0, shape.max_value, 0));
    }
    b.channel(Channel::binary("a")).channel(Channel::broadcast("b"));
    for p in 0..shape.processes {
        let mut t = ProcessTemplate::new(format!("P{p}"));
        for l in 0..shape.locations {
            let kind = if l == 0 {
                LocationKind::Initial
            } else if rng.gen_bool(shape.committed_ratio) {
                LocationKind::Committed
            } else {
                LocationKind::Normal
            };
            t.location(format!("l{l}"), kind);
        }
        for _ in 0..shape.edges_per_process {
            let mut e = Edge::new(rng.gen_range(0..shape.locations), rng.gen_range(0..shape.locations));
            let has_sel = rng.gen_bool(0.2);
            if has_sel {
                e = e.select("s", 0, rng.gen_range(0..=shape.max_value));
            }
            if let Some(g) = guard_text(rng, shape) {
                e = e.guard(&g);
            }
            e = match rng.gen_range(0..6) {
                0 => e.send("a"),
                1 => e.recv("a"),
                2 => e.send("b"),
                3 => e.recv("b"),
                _ => e,
            };
            if let Some(u) = update_text(rng, shape, has_sel) {
                e = e.update(&u);
            }
            t.add_edge(e)?;
        }
        let h = b.template(t);
        b.instantiate(h, &[]);
    }
    b.build()
}
