use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use super::{Trace, TransitionSystem};
use crate::Error;

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// Visited set: canonical keys interned to dense indices, plus a discovery
/// parent per state for trace reconstruction.
pub(crate) struct Store {
    keys: IndexSet<Box<[u8]>, FxBuildHasher>,
    parent: Vec<u32>,
    budget: usize,
    pub(crate) transitions: usize,
    scratch: Vec<u8>,
}

impl Store {
    pub(crate) fn new(budget: usize) -> Self {
        Store {
            keys: IndexSet::with_hasher(FxBuildHasher),
            parent: Vec::new(),
            budget: budget.max(1),
            transitions: 0,
            scratch: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.keys.len()
    }

    /// Interns `state`; returns its index and whether it was new.
    pub(crate) fn insert<T: TransitionSystem>(
        &mut self,
        ts: &T,
        state: &T::State,
        parent: u32,
    ) -> Result<(u32, bool), Error> {
        self.scratch.clear();
        ts.encode(state, &mut self.scratch);
        if let Some(i) = self.keys.get_index_of(self.scratch.as_slice()) {
            return Ok((i as u32, false));
        }
        if self.keys.len() >= self.budget {
            return Err(self.over_budget());
        }
        let (i, _) = self.keys.insert_full(self.scratch.clone().into_boxed_slice());
        self.parent.push(parent);
        Ok((i as u32, true))
    }

    pub(crate) fn over_budget(&self) -> Error {
        Error::Budget {
            budget: self.budget,
            states: self.keys.len(),
            transitions: self.transitions,
        }
    }

    pub(crate) fn get<T: TransitionSystem>(&self, ts: &T, i: u32) -> T::State {
        ts.decode(&self.keys[i as usize])
    }

    pub(crate) fn key(&self, i: u32) -> &[u8] {
        &self.keys[i as usize]
    }

    pub(crate) fn index_of<T: TransitionSystem>(&self, ts: &T, state: &T::State) -> Option<u32> {
        let mut k = Vec::new();
        ts.encode(state, &mut k);
        self.keys.get_index_of(k.as_slice()).map(|i| i as u32)
    }

    /// Discovery path from the root to `i`.
    pub(crate) fn path_to(&self, i: u32) -> Vec<u32> {
        let mut path = vec![i];
        let mut cur = i;
        while self.parent[cur as usize] != NO_PARENT {
            cur = self.parent[cur as usize];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Rebuilds the labelled trace along `path`, re-deriving each label from
    /// the successors of its source.
    pub(crate) fn trace<T: TransitionSystem>(
        &self,
        ts: &T,
        path: &[u32],
        loop_start: Option<usize>,
    ) -> Result<Trace<T::State, T::Label>, Error> {
        let mut states = vec![self.get(ts, path[0])];
        let mut labels = Vec::with_capacity(path.len().saturating_sub(1));
        let mut k = Vec::new();
        for w in path.windows(2) {
            let target = self.key(w[1]);
            let from = states.last().expect("non-empty");
            let (label, next) = ts
                .successors(from)?
                .into_iter()
                .find(|(_, s)| {
                    k.clear();
                    ts.encode(s, &mut k);
                    k.as_slice() == target
                })
                .ok_or_else(|| Error::Replay {
                    step: labels.len() + 1,
                    message: "stored edge is not a successor".into(),
                })?;
            labels.push(label);
            states.push(next);
        }
        Ok(Trace {
            states,
            labels,
            loop_start,
        })
    }
}
