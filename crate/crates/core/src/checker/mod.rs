//! Explicit-state verification over any [`TransitionSystem`].
//!
//! Top-level `E<>`/`A[]` run a reachability search in the chosen order;
//! `E[]`/`A<>`/`-->` run a coloured depth-first search for lassos and
//! deadlocks; everything else materialises the reachable graph and labels it
//! bottom-up. Paths are maximal: infinite or ending in a deadlock.

mod formula;
mod label;
mod search;
mod store;


use std::fmt;
use std::str::FromStr;

pub use formula::{Formula, FragmentClass};
pub use label::{Graph, Labeller};
pub(crate) use search::Body;
pub use search::{check, check_leads_to, explore};

use crate::kernel::{Expr, Network, NetworkState, TransitionLabel};
use crate::Error;

/// Default state budget.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// A finite transition system with atoms compiled from kernel expressions.
pub trait TransitionSystem {
    type State: Clone + fmt::Debug;
    type Label: Clone + fmt::Debug;
    type Atom;

    fn initial(&self) -> Self::State;
    fn successors(&self, state: &Self::State) -> Result<Vec<(Self::Label, Self::State)>, Error>;
    /// Appends an injective byte encoding of `state`.
    fn encode(&self, state: &Self::State, out: &mut Vec<u8>);
    fn decode(&self, key: &[u8]) -> Self::State;
    fn compile_atom(&self, atom: &Expr) -> Result<Self::Atom, Error>;
    fn eval_atom(&self, atom: &Self::Atom, state: &Self::State, deadlock: bool) -> Result<bool, Error>;
}

impl TransitionSystem for Network {
    type State = NetworkState;
    type Label = TransitionLabel;
    type Atom = crate::kernel::CompiledAtom;

    fn initial(&self) -> NetworkState {
        self.initial_state()
    }

    fn successors(&self, state: &NetworkState) -> Result<Vec<(TransitionLabel, NetworkState)>, Error> {
        Ok(Network::successors(self, state)?)
    }

    fn encode(&self, state: &NetworkState, out: &mut Vec<u8>) {
        self.write_key(state, out)
    }

    fn decode(&self, key: &[u8]) -> NetworkState {
        self.decode_key(key)
    }

    fn compile_atom(&self, atom: &Expr) -> Result<Self::Atom, Error> {
        self.compile_atom(atom).map_err(|e| Error::Query(e.to_string()))
    }

    fn eval_atom(&self, atom: &Self::Atom, state: &NetworkState, deadlock: bool) -> Result<bool, Error> {
        Ok(self.eval_compiled(atom, state, Some(deadlock))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchOrder {
    #[default]
    Bfs,
    Dfs,
    /// Depth-first with successors shuffled per state by a seeded generator.
    Rdfs,
}

impl FromStr for SearchOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "bfs" => Ok(SearchOrder::Bfs),
            "dfs" => Ok(SearchOrder::Dfs),
            "rdfs" => Ok(SearchOrder::Rdfs),
            _ => Err(Error::Query(format!("unknown search order `{s}`"))),
        }
    }
}

impl fmt::Display for SearchOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchOrder::Bfs => "bfs",
            SearchOrder::Dfs => "dfs",
            SearchOrder::Rdfs => "rdfs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub order: SearchOrder,
    pub seed: u64,
    pub budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            order: SearchOrder::Bfs,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl CheckOptions {
    pub fn order(order: SearchOrder) -> Self {
        CheckOptions {
            order,
            ..CheckOptions::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }
}

/// A path from the initial state. `states[0]` is initial and `labels[i]`
/// leads from `states[i]` to `states[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace<S, L> {
    pub states: Vec<S>,
    pub labels: Vec<L>,
    /// Index of the state the last transition loops back to.
    pub loop_start: Option<usize>,
}

impl<S, L> Trace<S, L> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn last_state(&self) -> &S {
        self.states.last().expect("trace holds at least the initial state")
    }
}

#[derive(Debug, Clone)]
pub struct Verdict<S, L> {
    pub satisfied: bool,
    pub trace: Option<Trace<S, L>>,
    pub states_explored: usize,
    pub transitions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ExploreStats {
    pub states: usize,
    pub transitions: usize,
    pub deadlocks: usize,
    pub max_frontier: usize,
    pub truncated: bool,
}

/// Checks that `trace` is a path of `ts`: starts at the initial state, every
/// step is a successor, and a declared loop closes exactly.
pub fn validate_trace<T: TransitionSystem>(ts: &T, trace: &Trace<T::State, T::Label>) -> Result<(), Error> {
    let key = |s: &T::State| {
        let mut k = Vec::new();
        ts.encode(s, &mut k);
        k
    };
    if trace.states.len() != trace.labels.len() + 1 {
        return Err(Error::Replay {
            step: 0,
            message: "state and label counts disagree".into(),
        });
    }
    if key(&trace.states[0]) != key(&ts.initial()) {
        return Err(Error::Replay {
            step: 0,
            message: "trace does not start in the initial state".into(),
        });
    }
    for i in 0..trace.labels.len() {
        let next = key(&trace.states[i + 1]);
        if !ts.successors(&trace.states[i])?.iter().any(|(_, s)| key(s) == next) {
            return Err(Error::Replay {
                step: i + 1,
                message: "state is not a successor of its predecessor".into(),
            });
        }
    }
    if let Some(l) = trace.loop_start {
        let last = trace.states.len() - 1;
        if l >= last || key(&trace.states[l]) != key(&trace.states[last]) {
            return Err(Error::Replay {
                step: last,
                message: format!("loop does not close at index {l}"),
            });
        }
    }
    Ok(())
}
