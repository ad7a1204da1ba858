use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::label::{Graph, Labeller};
use super::store::{Store, NO_PARENT};
use super::{CheckOptions, ExploreStats, Formula, SearchOrder, TransitionSystem, Verdict};
use crate::Error;

/// A compiled quantifier-free body.
pub(crate) enum Body<A> {
    Bool(bool),
    Atom(A),
    Not(Box<Body<A>>),
    And(Box<Body<A>>, Box<Body<A>>),
    Or(Box<Body<A>>, Box<Body<A>>),
    Implies(Box<Body<A>>, Box<Body<A>>),
}

impl<A> Body<A> {
    pub(crate) fn compile<T: TransitionSystem<Atom = A>>(ts: &T, f: &Formula) -> Result<Self, Error> {
        let bx = |g: &Formula| Body::compile(ts, g).map(Box::new);
        Ok(match f {
            Formula::Bool(b) => Body::Bool(*b),
            Formula::Atom(e) => Body::Atom(ts.compile_atom(e)?),
            Formula::Not(a) => Body::Not(bx(a)?),
            Formula::And(a, b) => Body::And(bx(a)?, bx(b)?),
            Formula::Or(a, b) => Body::Or(bx(a)?, bx(b)?),
            Formula::Implies(a, b) => Body::Implies(bx(a)?, bx(b)?),
            other => return Err(Error::Query(format!("path quantifier inside a state body: {other}"))),
        })
    }

    pub(crate) fn eval<T: TransitionSystem<Atom = A>>(
        &self,
        ts: &T,
        s: &T::State,
        deadlock: bool,
    ) -> Result<bool, Error> {
        Ok(match self {
            Body::Bool(b) => *b,
            Body::Atom(a) => ts.eval_atom(a, s, deadlock)?,
            Body::Not(a) => !a.eval(ts, s, deadlock)?,
            Body::And(a, b) => a.eval(ts, s, deadlock)? && b.eval(ts, s, deadlock)?,
            Body::Or(a, b) => a.eval(ts, s, deadlock)? || b.eval(ts, s, deadlock)?,
            Body::Implies(a, b) => !a.eval(ts, s, deadlock)? || b.eval(ts, s, deadlock)?,
        })
    }

    fn negate(self) -> Self {
        Body::Not(Box::new(self))
    }
}

type Succ<T> = Vec<(<T as TransitionSystem>::Label, <T as TransitionSystem>::State)>;

/// Reachability traversal in the requested order. `visit` sees each state once
/// with its successors; returning `true` stops the search at that state.
fn traverse<T, F>(
    ts: &T,
    opts: &CheckOptions,
    store: &mut Store,
    max_frontier: &mut usize,
    mut visit: F,
) -> Result<Option<u32>, Error>
where
    T: TransitionSystem,
    F: FnMut(u32, &T::State, &Succ<T>) -> Result<bool, Error>,
{
    let (root, _) = store.insert(ts, &ts.initial(), NO_PARENT)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // indices only; states are decoded from the store on demand
    let mut queue = VecDeque::from([root]);
    while let Some(i) = match opts.order {
        SearchOrder::Bfs => queue.pop_front(),
        _ => queue.pop_back(),
    } {
        let s = store.get(ts, i);
        let mut succ = ts.successors(&s)?;
        store.transitions += succ.len();
        if visit(i, &s, &succ)? {
            return Ok(Some(i));
        }
        match opts.order {
            SearchOrder::Bfs => {}
            SearchOrder::Dfs => succ.reverse(),
            SearchOrder::Rdfs => succ.shuffle(&mut rng),
        }
        for (_, t) in succ {
            let (j, fresh) = store.insert(ts, &t, i)?;
            if fresh {
                queue.push_back(j);
            }
        }
        *max_frontier = (*max_frontier).max(queue.len());
    }
    Ok(None)
}

/// Reachable-state statistics; a budget overrun truncates instead of failing.
pub fn explore<T: TransitionSystem>(ts: &T, opts: &CheckOptions) -> Result<ExploreStats, Error> {
    let mut store = Store::new(opts.budget);
    let mut stats = ExploreStats::default();
    let mut deadlocks = 0;
    let res = traverse(ts, opts, &mut store, &mut stats.max_frontier, |_, _, succ| {
        deadlocks += succ.is_empty() as usize;
        Ok(false)
    });
    match res {
        Ok(_) => {}
        Err(Error::Budget { .. }) => stats.truncated = true,
        Err(e) => return Err(e),
    }
    stats.states = store.len();
    stats.transitions = store.transitions;
    stats.deadlocks = deadlocks;
    Ok(stats)
}

struct Frame {
    idx: u32,
    succ: Vec<u32>,
    next: usize,
}

const WHITE: u8 = 0;
const GREY: u8 = 1;
const BLACK: u8 = 2;

/// Stack indices of a path, and where its loop closes if it has one.
type Lasso = (Vec<u32>, Option<usize>);

/// Depth-first search restricted to `inv`-states for a maximal path: a cycle
/// (back edge) or a deadlock. Returns the DFS stack from the seed and, for a
/// cycle, the stack position the final state repeats.
fn find_lasso<T: TransitionSystem>(
    ts: &T,
    opts: &CheckOptions,
    store: &mut Store,
    colour: &mut Vec<u8>,
    rng: &mut ChaCha8Rng,
    seed: u32,
    inv: &Body<T::Atom>,
) -> Result<Option<Lasso>, Error> {
    let mut stack: Vec<Frame> = Vec::new();
    let mut enter = |u: u32, store: &mut Store, colour: &mut Vec<u8>, stack: &mut Vec<Frame>| -> Result<bool, Error> {
        let s = store.get(ts, u);
        let succ = ts.successors(&s)?;
        store.transitions += succ.len();
        if colour.len() < store.len() {
            colour.resize(store.len(), WHITE);
        }
        if !inv.eval(ts, &s, succ.is_empty())? {
            colour[u as usize] = BLACK;
            return Ok(false);
        }
        let deadlock = succ.is_empty();
        let mut idx = Vec::with_capacity(succ.len());
        for (_, t) in &succ {
            idx.push(store.insert(ts, t, u)?.0);
        }
        if colour.len() < store.len() {
            colour.resize(store.len(), WHITE);
        }
        if opts.order == SearchOrder::Rdfs {
            idx.shuffle(rng);
        }
        colour[u as usize] = GREY;
        stack.push(Frame {
            idx: u,
            succ: idx,
            next: 0,
        });
        Ok(deadlock)
    };
    if colour.len() < store.len() {
        colour.resize(store.len(), WHITE);
    }
    if colour[seed as usize] != WHITE {
        return Ok(None);
    }
    if enter(seed, store, colour, &mut stack)? {
        return Ok(Some((stack.iter().map(|f| f.idx).collect(), None)));
    }
    while let Some(top) = stack.last_mut() {
        if top.next == top.succ.len() {
            colour[top.idx as usize] = BLACK;
            stack.pop();
            continue;
        }
        let v = top.succ[top.next];
        top.next += 1;
        match colour[v as usize] {
            GREY => {
                let pos = stack
                    .iter()
                    .position(|f| f.idx == v)
                    .expect("grey states are on the stack");
                let mut path: Vec<u32> = stack.iter().map(|f| f.idx).collect();
                path.push(v);
                return Ok(Some((path, Some(pos))));
            }
            #[allow(clippy::collapsible_match)]
            WHITE => {
                if enter(v, store, colour, &mut stack)? {
                    return Ok(Some((stack.iter().map(|f| f.idx).collect(), None)));
                }
            }
            _ => {}
        }
    }
    Ok(None)
}

/// Witness search for `E[] p`: a maximal path of `p`-states from the initial state.
fn eg<T: TransitionSystem>(
    ts: &T,
    p: &Body<T::Atom>,
    opts: &CheckOptions,
) -> Result<Verdict<T::State, T::Label>, Error> {
    let mut store = Store::new(opts.budget);
    let (root, _) = store.insert(ts, &ts.initial(), NO_PARENT)?;
    let mut colour = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let found = find_lasso(ts, opts, &mut store, &mut colour, &mut rng, root, p)?;
    let trace = match found {
        Some((path, loop_start)) => Some(store.trace(ts, &path, loop_start)?),
        None => None,
    };
    Ok(Verdict {
        satisfied: trace.is_some(),
        trace,
        states_explored: store.len(),
        transitions: store.transitions,
    })
}

/// `p --> q`: every reachable `p`-state inevitably reaches `q`.
pub fn check_leads_to<T: TransitionSystem>(
    ts: &T,
    p: &Formula,
    q: &Formula,
    opts: &CheckOptions,
) -> Result<Verdict<T::State, T::Label>, Error> {
    let p = Body::compile(ts, p)?;
    let not_q = Body::compile(ts, q)?.negate();
    let mut store = Store::new(opts.budget);
    let mut seeds = Vec::new();
    let mut frontier = 0;
    traverse(ts, opts, &mut store, &mut frontier, |i, s, succ| {
        let dl = succ.is_empty();
        if p.eval(ts, s, dl)? && not_q.eval(ts, s, dl)? {
            seeds.push(i);
        }
        Ok(false)
    })?;
    let mut colour = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for seed in seeds {
        if let Some((suffix, loop_start)) = find_lasso(ts, opts, &mut store, &mut colour, &mut rng, seed, &not_q)? {
            let mut path = store.path_to(seed);
            let offset = path.len() - 1;
            path.extend_from_slice(&suffix[1..]);
            let trace = store.trace(ts, &path, loop_start.map(|l| l + offset))?;
            return Ok(Verdict {
                satisfied: false,
                trace: Some(trace),
                states_explored: store.len(),
                transitions: store.transitions,
            });
        }
    }
    Ok(Verdict {
        satisfied: true,
        trace: None,
        states_explored: store.len(),
        transitions: store.transitions,
    })
}

/// Searches for a reachable `target` state; returns the verdict with the
/// path to it when found.
fn reach<T: TransitionSystem>(
    ts: &T,
    target: &Body<T::Atom>,
    opts: &CheckOptions,
    satisfied_if_found: bool,
) -> Result<Verdict<T::State, T::Label>, Error> {
    let mut store = Store::new(opts.budget);
    let mut frontier = 0;
    let hit = traverse(ts, opts, &mut store, &mut frontier, |_, s, succ| {
        target.eval(ts, s, succ.is_empty())
    })?;
    let trace = match hit {
        Some(i) => Some(store.trace(ts, &store.path_to(i), None)?),
        None => None,
    };
    Ok(Verdict {
        satisfied: hit.is_some() == satisfied_if_found,
        trace,
        states_explored: store.len(),
        transitions: store.transitions,
    })
}

/// Verifies `formula` in the initial state of `ts`.
pub fn check<T: TransitionSystem>(
    ts: &T,
    formula: &Formula,
    opts: &CheckOptions,
) -> Result<Verdict<T::State, T::Label>, Error> {
    match formula {
        Formula::EF(p) if p.is_state_formula() => reach(ts, &Body::compile(ts, p)?, opts, true),
        Formula::AG(p) if p.is_state_formula() => reach(ts, &Body::compile(ts, p)?.negate(), opts, false),
        Formula::EG(p) if p.is_state_formula() => eg(ts, &Body::compile(ts, p)?, opts),
        Formula::AF(p) if p.is_state_formula() => {
            let mut v = eg(ts, &Body::compile(ts, p)?.negate(), opts)?;
            v.satisfied = !v.satisfied;
            Ok(v)
        }
        Formula::LeadsTo(p, q) if p.is_state_formula() && q.is_state_formula() => check_leads_to(ts, p, q, opts),
        _ => check_nested(ts, formula, opts),
    }
}

/// Full labelling; a trace is produced for top-level `E<>` witnesses and
/// `A[]` counterexamples.
fn check_nested<T: TransitionSystem>(
    ts: &T,
    formula: &Formula,
    opts: &CheckOptions,
) -> Result<Verdict<T::State, T::Label>, Error> {
    for a in formula.atoms() {
        ts.compile_atom(a)?;
    }
    let graph = Graph::build(ts, opts.budget)?;
    let mut lab = Labeller::new(ts, &graph);
    let satisfied = lab.holds(formula)?;
    let target = match formula {
        Formula::EF(p) if satisfied => Some(lab.label(p)?),
        Formula::AG(p) if !satisfied => Some(lab.label(p)?.into_iter().map(|b| !b).collect()),
        _ => None,
    };
    let trace = match target.and_then(|t| graph.first_with(&t)) {
        Some(i) => Some(graph.trace(ts, i)?),
        None => None,
    };
    Ok(Verdict {
        satisfied,
        trace,
        states_explored: graph.len(),
        transitions: graph.transitions(),
    })
}
