use std::collections::VecDeque;

use super::search::Body;
use super::store::{Store, NO_PARENT};
use super::{Formula, Trace, TransitionSystem};
use crate::Error;

/// The materialised reachable graph in compressed sparse row form. Deadlocks
/// carry a self-loop so every path extends to an infinite one; the deadlock
/// bit is kept for the `deadlock` atom.
pub struct Graph {
    store: Store,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    deadlock: Vec<bool>,
}

impl Graph {
    /// Breadth-first materialisation from the initial state.
    pub fn build<T: TransitionSystem>(ts: &T, budget: usize) -> Result<Graph, Error> {
        let mut store = Store::new(budget);
        let (root, _) = store.insert(ts, &ts.initial(), NO_PARENT)?;
        let mut offsets = vec![0u32];
        let mut targets = Vec::new();
        let mut deadlock = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let s = store.get(ts, i);
            debug_assert_eq!(i as usize, deadlock.len());
            let succ = ts.successors(&s)?;
            store.transitions += succ.len();
            deadlock.push(succ.is_empty());
            if succ.is_empty() {
                targets.push(i);
            }
            for (_, t) in succ {
                let (j, fresh) = store.insert(ts, &t, i)?;
                targets.push(j);
                if fresh {
                    queue.push_back(j);
                }
            }
            offsets.push(targets.len() as u32);
        }
        Ok(Graph {
            store,
            offsets,
            targets,
            deadlock,
        })
    }

    pub fn len(&self) -> usize {
        self.deadlock.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deadlock.is_empty()
    }

    /// Real transitions, without the deadlock self-loops.
    pub fn transitions(&self) -> usize {
        self.store.transitions
    }

    /// Successor indices, including the self-loop at a deadlock.
    pub fn successors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn is_deadlock(&self, i: usize) -> bool {
        self.deadlock[i]
    }

    pub fn state<T: TransitionSystem>(&self, ts: &T, i: usize) -> T::State {
        self.store.get(ts, i as u32)
    }

    pub fn index_of<T: TransitionSystem>(&self, ts: &T, state: &T::State) -> Option<usize> {
        self.store.index_of(ts, state).map(|i| i as usize)
    }

    /// Lowest (breadth-first closest) index whose bit is set.
    pub fn first_with(&self, bits: &[bool]) -> Option<usize> {
        bits.iter().position(|&b| b)
    }

    /// Shortest path from the initial state to `i`.
    pub fn trace<T: TransitionSystem>(&self, ts: &T, i: usize) -> Result<Trace<T::State, T::Label>, Error> {
        self.store.trace(ts, &self.store.path_to(i as u32), None)
    }

    /// Predecessor lists in CSR form: `(offsets, sources)`.
    pub(crate) fn predecessors(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.len();
        let mut count = vec![0u32; n + 1];
        for &t in &self.targets {
            count[t as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut preds = vec![0u32; self.targets.len()];
        for u in 0..n {
            for &v in self.successors(u) {
                preds[fill[v as usize] as usize] = u as u32;
                fill[v as usize] += 1;
            }
        }
        (count, preds)
    }
}

/// Bottom-up CTL labelling over a [`Graph`].
pub struct Labeller<'a, T: TransitionSystem> {
    ts: &'a T,
    graph: &'a Graph,
    preds: Option<(Vec<u32>, Vec<u32>)>,
}

impl<'a, T: TransitionSystem> Labeller<'a, T> {
    pub fn new(ts: &'a T, graph: &'a Graph) -> Self {
        Labeller { ts, graph, preds: None }
    }

    /// Whether `f` holds in the initial state.
    pub fn holds(&mut self, f: &Formula) -> Result<bool, Error> {
        Ok(self.label(f)?[0])
    }

    /// The set of states satisfying `f`, as one bit per graph index.
    pub fn label(&mut self, f: &Formula) -> Result<Vec<bool>, Error> {
        let n = self.graph.len();
        Ok(match f {
            Formula::Bool(b) => vec![*b; n],
            Formula::Atom(_) => {
                let body = Body::compile(self.ts, f)?;
                (0..n)
                    .map(|i| body.eval(self.ts, &self.graph.state(self.ts, i), self.graph.is_deadlock(i)))
                    .collect::<Result<_, _>>()?
            }
            Formula::Not(a) => self.label(a)?.into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => zip(self.label(a)?, self.label(b)?, |x, y| x && y),
            Formula::Or(a, b) => zip(self.label(a)?, self.label(b)?, |x, y| x || y),
            Formula::Implies(a, b) => zip(self.label(a)?, self.label(b)?, |x, y| !x || y),
            Formula::EX(a) => {
                let p = self.label(a)?;
                (0..n)
                    .map(|i| self.graph.successors(i).iter().any(|&j| p[j as usize]))
                    .collect()
            }
            Formula::EU(a, b) => {
                let (p, q) = (self.label(a)?, self.label(b)?);
                self.eu(&p, q)
            }
            Formula::EF(a) => {
                let q = self.label(a)?;
                self.eu(&vec![true; n], q)
            }
            Formula::AG(a) => {
                let q: Vec<bool> = self.label(a)?.into_iter().map(|b| !b).collect();
                self.eu(&vec![true; n], q).into_iter().map(|b| !b).collect()
            }
            Formula::EG(a) => {
                let p = self.label(a)?;
                self.eg(p)
            }
            Formula::AF(a) => {
                let p: Vec<bool> = self.label(a)?.into_iter().map(|b| !b).collect();
                self.eg(p).into_iter().map(|b| !b).collect()
            }
            Formula::LeadsTo(a, b) => {
                let f = Formula::ag(Formula::implies((**a).clone(), Formula::af((**b).clone())));
                self.label(&f)?
            }
        })
    }

    fn preds(&mut self) -> &(Vec<u32>, Vec<u32>) {
        if self.preds.is_none() {
            self.preds = Some(self.graph.predecessors());
        }
        self.preds.as_ref().expect("just set")
    }

    /// Least fixpoint: backward closure of `q` through `p`-states.
    fn eu(&mut self, p: &[bool], mut res: Vec<bool>) -> Vec<bool> {
        let mut work: Vec<u32> = (0..res.len() as u32).filter(|&i| res[i as usize]).collect();
        let (off, preds) = self.preds();
        while let Some(v) = work.pop() {
            for &u in &preds[off[v as usize] as usize..off[v as usize + 1] as usize] {
                if p[u as usize] && !res[u as usize] {
                    res[u as usize] = true;
                    work.push(u);
                }
            }
        }
        res
    }

    /// Greatest fixpoint: prune `p`-states with no successor left in the set.
    fn eg(&mut self, mut res: Vec<bool>) -> Vec<bool> {
        let graph = self.graph;
        let n = res.len();
        let mut count: Vec<u32> = (0..n)
            .map(|i| graph.successors(i).iter().filter(|&&j| res[j as usize]).count() as u32)
            .collect();
        let mut work: Vec<u32> = (0..n as u32)
            .filter(|&i| res[i as usize] && count[i as usize] == 0)
            .collect();
        for &i in &work {
            res[i as usize] = false;
        }
        let (off, preds) = self.preds();
        while let Some(v) = work.pop() {
            for &u in &preds[off[v as usize] as usize..off[v as usize + 1] as usize] {
                if res[u as usize] {
                    count[u as usize] -= 1;
                    if count[u as usize] == 0 {
                        res[u as usize] = false;
                        work.push(u);
                    }
                }
            }
        }
        res
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}
