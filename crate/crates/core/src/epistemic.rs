//! Coercer knowledge as plain CTL.
//!
//! The base system is materialised, then extended with a reverse copy of
//! every reachable state whose moves run the base transition relation
//! backwards. From a real state satisfying the jump condition the system may
//! jump to the reverse copy of any reachable state that also satisfies it and
//! looks the same to the coercer. A reverse path that arrives back at the
//! initial state proves that the jump target was a possible run, so "the
//! coercer cannot rule out that voter i voted j" becomes "a reverse path from
//! an indistinguishable state reaches the initial state through a state where
//! i voted j". Persistent flags carry what happened on each side of the jump.
//!
//! Reversal is semantic: reverse edges are read off the predecessor lists of
//! the materialised graph, so updates never need to be inverted.

use std::collections::HashMap;
use std::fmt;

use crate::checker::{Body, Formula, Graph, TransitionSystem};
use crate::kernel::{BinOp, Expr, Network, UnOp};
use crate::Error;

/// Atom naming a real (forward) state.
pub const REAL: &str = "real";
/// Atom naming the reverse copy of the initial state.
pub const INITIAL: &str = "initial";
/// Built-in flag: the jump condition has held on the real side.
pub const RESULTS: &str = "results";

/// Largest number of flags, built-ins included.
pub const MAX_FLAGS: usize = 64;

/// When a flag's trigger is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// On real states only.
    Forward,
    /// On reverse states only, the jump target included.
    Reverse,
    Both,
}

/// A persistent boolean: set on entering a state where `trigger` holds during
/// `phase`, never cleared.
#[derive(Debug, Clone)]
pub struct FlagSpec {
    pub name: String,
    pub trigger: Formula,
    pub phase: Phase,
}

impl FlagSpec {
    pub fn new(name: impl Into<String>, trigger: Formula, phase: Phase) -> Self {
        FlagSpec {
            name: name.into(),
            trigger,
            phase,
        }
    }
}

/// What the coercer sees, and which flags to track.
#[derive(Debug, Clone)]
pub struct ObservableSpec {
    /// Instance names (`Coercer`, `Voter(1)`), whose location and locals are
    /// visible, or global variable names.
    pub observed: Vec<String>,
    pub flags: Vec<FlagSpec>,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        ObservableSpec {
            observed: vec!["Coercer".into()],
            flags: Vec::new(),
        }
    }
}

/// Names of the three flags tracked for voter `i` and candidate `j`.
pub fn flag_names(i: usize, j: usize) -> [String; 3] {
    [
        format!("voted_{i}_{j}"),
        format!("negvoted_{i}_{j}"),
        format!("epist_voted_{i}_{j}"),
    ]
}

impl ObservableSpec {
    /// The coercer's view plus the receipt-freeness flags for voter `i` and
    /// candidate `j` of the election model.
    pub fn receipt_freeness(i: usize, j: usize) -> Self {
        let marked = format!("!Voter({i}).idle && !Voter({i}).has_ballot");
        let chose = Formula::parse_atom(&format!("{marked} && Voter({i}).chosen == {j}")).expect("well-formed");
        let other = Formula::parse_atom(&format!("{marked} && Voter({i}).chosen != {j}")).expect("well-formed");
        ObservableSpec::default().with_vote_flags(i, j, chose, other)
    }

    /// Adds `voted_i_j` (either phase), `negvoted_i_j` (real side) and
    /// `epist_voted_i_j` (reverse side) with the given triggers.
    pub fn with_vote_flags(mut self, i: usize, j: usize, chose: Formula, other: Formula) -> Self {
        let [voted, neg, epist] = flag_names(i, j);
        self.flags.push(FlagSpec::new(voted, chose.clone(), Phase::Both));
        self.flags.push(FlagSpec::new(neg, other, Phase::Forward));
        self.flags.push(FlagSpec::new(epist, chose, Phase::Reverse));
        self
    }

    pub fn observe(mut self, name: impl Into<String>) -> Self {
        self.observed.push(name.into());
        self
    }

    /// Valuation slots and instances the observed names cover.
    fn resolve(&self, net: &Network) -> Result<(Vec<usize>, Vec<usize>), Error> {
        let (mut slots, mut instances) = (Vec::new(), Vec::new());
        for name in &self.observed {
            let inst = match Expr::parse(name) {
                Ok(Expr::Call(p, args)) => match args.as_slice() {
                    [Expr::Int(k)] => net.find_instance(&p, Some(*k)),
                    _ => None,
                },
                Ok(Expr::Name(p)) => net.find_instance(&p, None),
                _ => None,
            };
            if let Some(k) = inst {
                instances.push(k);
                for v in net.variables().iter().filter(|v| v.owner == Some(k)) {
                    slots.extend(v.base..v.base + v.len());
                }
            } else if let Some(v) = net.lookup_var(None, name) {
                slots.extend(v.base..v.base + v.len());
            } else {
                return Err(Error::Config(format!(
                    "observable `{name}` is neither an instance nor a global"
                )));
            }
        }
        slots.sort_unstable();
        slots.dedup();
        instances.sort_unstable();
        instances.dedup();
        Ok((slots, instances))
    }
}

/// `E<> (results and negvoted_i_j and epist_voted_i_j and initial)`: some run
/// where voter `i` did not vote `j` ends in a results state the coercer cannot
/// tell apart from one where `i` did.
pub fn build_rf_weak(i: usize, j: usize) -> Formula {
    let [_, neg, epist] = flag_names(i, j);
    let all = [RESULTS, neg.as_str(), epist.as_str(), INITIAL]
        .into_iter()
        .map(|n| Formula::atom(Expr::name(n)))
        .reduce(Formula::and)
        .expect("non-empty");
    Formula::ef(all)
}

/// `A[] ((Sys.results and real) imply EX (not real and E<> (voted_i_j and initial)))`
/// for the election model: in every real results state, some state the
/// coercer cannot tell apart lies on a run where voter `i` voted `j`.
pub fn build_rf_strong(i: usize, j: usize) -> Formula {
    build_rf_strong_at(results_condition(), i, j)
}

/// The strong formula with an explicit jump condition. The `EX (not real ...)`
/// pins the jump to the results state itself; without it the real run could
/// move on and jump from a later state the coercer sees differently.
pub fn build_rf_strong_at(jump: Formula, i: usize, j: usize) -> Formula {
    let [voted, ..] = flag_names(i, j);
    let name = |n: &str| Formula::atom(Expr::name(n));
    Formula::ag(Formula::implies(
        Formula::and(jump, name(REAL)),
        Formula::ex(Formula::and(
            Formula::not(name(REAL)),
            Formula::ef(Formula::and(name(&voted), name(INITIAL))),
        )),
    ))
}

/// The default jump condition, `Sys.results`.
pub fn results_condition() -> Formula {
    Formula::atom(Expr::loc("Sys", None, "results"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AugState {
    pub reverse: bool,
    /// Index into the materialised base graph.
    pub base: u32,
    pub flags: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AugLabel {
    /// A base transition `from -> to`.
    Step { from: u32, to: u32 },
    /// From a real state to the reverse copy of an indistinguishable one.
    Jump { from: u32, to: u32 },
    /// The base transition `to -> from`, taken backwards.
    Back { from: u32, to: u32 },
}

#[derive(Debug, Clone)]
pub enum AugAtom<A> {
    Real,
    Initial,
    Flag(usize),
    Base(A),
    Not(Box<AugAtom<A>>),
    And(Box<AugAtom<A>>, Box<AugAtom<A>>),
    Or(Box<AugAtom<A>>, Box<AugAtom<A>>),
}

/// The base system extended with reverse states, jump edges and flags.
pub struct Augmented<'a, T: TransitionSystem> {
    base: &'a T,
    graph: Graph,
    pred_off: Vec<u32>,
    preds: Vec<u32>,
    flag_names: Vec<String>,
    /// Flags raised on entering each base state, on the real and reverse side.
    forward_mask: Vec<u64>,
    reverse_mask: Vec<u64>,
    /// Jump targets per base state; empty where the jump condition fails.
    class_of: Vec<u32>,
    classes: Vec<Vec<u32>>,
}

const NO_CLASS: u32 = u32::MAX;

/// Augments an arbitrary system. `observe` projects a state onto what the
/// coercer sees; `jump_condition` must be quantifier-free.
pub fn augment<'a, T, F>(
    ts: &'a T,
    observe: F,
    flags: &[FlagSpec],
    jump_condition: &Formula,
    budget: usize,
) -> Result<Augmented<'a, T>, Error>
where
    T: TransitionSystem,
    F: Fn(&T::State) -> Vec<i64>,
{
    let mut names = vec![RESULTS.to_string()];
    for f in flags {
        if [REAL, INITIAL].contains(&f.name.as_str()) || names.contains(&f.name) {
            return Err(Error::Config(format!("flag name `{}` is reserved or repeated", f.name)));
        }
        if ts.compile_atom(&Expr::name(&f.name)).is_ok() {
            return Err(Error::Config(format!(
                "flag `{}` clashes with an existing name",
                f.name
            )));
        }
        names.push(f.name.clone());
    }
    if names.len() > MAX_FLAGS {
        return Err(Error::Config(format!(
            "{} flags exceed the maximum of {MAX_FLAGS}",
            names.len()
        )));
    }
    let jump = Body::compile(ts, jump_condition)?;
    let triggers: Vec<(Body<T::Atom>, Phase)> = flags
        .iter()
        .map(|f| Ok((Body::compile(ts, &f.trigger)?, f.phase)))
        .collect::<Result<_, Error>>()?;

    let graph = Graph::build(ts, budget)?;
    let n = graph.len();
    let (mut forward_mask, mut reverse_mask) = (vec![0u64; n], vec![0u64; n]);
    let mut class_of = vec![NO_CLASS; n];
    let mut classes: Vec<Vec<u32>> = Vec::new();
    let mut by_view: HashMap<Vec<i64>, u32> = HashMap::new();
    for i in 0..n {
        let s = graph.state(ts, i);
        let dl = graph.is_deadlock(i);
        if jump.eval(ts, &s, dl)? {
            forward_mask[i] |= 1;
            let c = *by_view.entry(observe(&s)).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() as u32 - 1
            });
            classes[c as usize].push(i as u32);
            class_of[i] = c;
        }
        for (k, (body, phase)) in triggers.iter().enumerate() {
            if body.eval(ts, &s, dl)? {
                let bit = 1u64 << (k + 1);
                if *phase != Phase::Reverse {
                    forward_mask[i] |= bit;
                }
                if *phase != Phase::Forward {
                    reverse_mask[i] |= bit;
                }
            }
        }
    }
    let (pred_off, preds) = graph.predecessors();
    Ok(Augmented {
        base: ts,
        graph,
        pred_off,
        preds,
        flag_names: names,
        forward_mask,
        reverse_mask,
        class_of,
        classes,
    })
}

/// Augments a network, observing what `spec` names.
pub fn augment_network<'a>(
    net: &'a Network,
    spec: &ObservableSpec,
    jump_condition: &Formula,
    budget: usize,
) -> Result<Augmented<'a, Network>, Error> {
    let (slots, instances) = spec.resolve(net)?;
    let observe = |s: &crate::kernel::NetworkState| {
        instances
            .iter()
            .map(|&k| s.locations[k] as i64)
            .chain(slots.iter().map(|&k| s.values[k] as i64))
            .collect()
    };
    augment(net, observe, &spec.flags, jump_condition, budget)
}

impl<'a, T: TransitionSystem> Augmented<'a, T> {
    pub fn base(&self) -> &'a T {
        self.base
    }

    pub fn base_graph(&self) -> &Graph {
        &self.graph
    }

    pub fn flag_names(&self) -> &[String] {
        &self.flag_names
    }

    pub fn flag(&self, state: &AugState, name: &str) -> Option<bool> {
        let k = self.flag_names.iter().position(|n| n == name)?;
        Some(state.flags >> k & 1 == 1)
    }

    /// Base states the coercer cannot tell apart from `base` at a jump, `base` included.
    pub fn jump_targets(&self, base: u32) -> &[u32] {
        match self.class_of[base as usize] {
            NO_CLASS => &[],
            c => &self.classes[c as usize],
        }
    }

    /// Real base successors, without the deadlock self-loop of the graph.
    fn forward(&self, i: u32) -> &[u32] {
        if self.graph.is_deadlock(i as usize) {
            &[]
        } else {
            self.graph.successors(i as usize)
        }
    }

    /// Real base predecessors.
    pub fn backward(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        let r = self.pred_off[i as usize] as usize..self.pred_off[i as usize + 1] as usize;
        self.preds[r]
            .iter()
            .copied()
            .filter(move |&u| !(u == i && self.graph.is_deadlock(i as usize)))
    }

    /// The base label of the transition a step stands for.
    pub fn base_label(&self, label: &AugLabel) -> Result<Option<T::Label>, Error> {
        let (from, to) = match *label {
            AugLabel::Step { from, to } => (from, to),
            AugLabel::Back { from, to } => (to, from),
            AugLabel::Jump { .. } => return Ok(None),
        };
        let target = self.graph.state(self.base, to as usize);
        let (mut want, mut got) = (Vec::new(), Vec::new());
        self.base.encode(&target, &mut want);
        let succ = self.base.successors(&self.graph.state(self.base, from as usize))?;
        Ok(succ.into_iter().find_map(|(l, s)| {
            got.clear();
            self.base.encode(&s, &mut got);
            (got == want).then_some(l)
        }))
    }

    /// The base state behind an augmented state.
    pub fn base_state(&self, state: &AugState) -> T::State {
        self.graph.state(self.base, state.base as usize)
    }

    fn flag_bytes(&self) -> usize {
        self.flag_names.len().div_ceil(8)
    }

    fn compile(&self, e: &Expr) -> Result<AugAtom<T::Atom>, Error> {
        if !self.mentions_own(e) {
            return Ok(AugAtom::Base(self.base.compile_atom(e)?));
        }
        let bx = |x: &Expr| self.compile(x).map(Box::new);
        Ok(match e {
            Expr::Name(n) if n == REAL => AugAtom::Real,
            Expr::Name(n) if n == INITIAL => AugAtom::Initial,
            Expr::Name(n) => AugAtom::Flag(self.flag_names.iter().position(|f| f == n).expect("mentioned")),
            Expr::Unary(UnOp::Not, a) => AugAtom::Not(bx(a)?),
            Expr::Binary(BinOp::And, a, b) => AugAtom::And(bx(a)?, bx(b)?),
            Expr::Binary(BinOp::Or, a, b) => AugAtom::Or(bx(a)?, bx(b)?),
            other => {
                return Err(Error::Query(format!(
                    "`{other}`: `real`, `initial` and flags can only be combined with not/and/or"
                )))
            }
        })
    }

    fn mentions_own(&self, e: &Expr) -> bool {
        match e {
            Expr::Name(n) => n == REAL || n == INITIAL || self.flag_names.contains(n),
            Expr::Unary(_, a) => self.mentions_own(a),
            Expr::Binary(_, a, b) => self.mentions_own(a) || self.mentions_own(b),
            _ => false,
        }
    }
}

impl<T: TransitionSystem> TransitionSystem for Augmented<'_, T> {
    type State = AugState;
    type Label = AugLabel;
    type Atom = AugAtom<T::Atom>;

    fn initial(&self) -> AugState {
        AugState {
            reverse: false,
            base: 0,
            flags: self.forward_mask[0],
        }
    }

    fn successors(&self, s: &AugState) -> Result<Vec<(AugLabel, AugState)>, Error> {
        let mut out = Vec::new();
        if s.reverse {
            for u in self.backward(s.base) {
                let next = AugState {
                    reverse: true,
                    base: u,
                    flags: s.flags | self.reverse_mask[u as usize],
                };
                out.push((AugLabel::Back { from: s.base, to: u }, next));
            }
            return Ok(out);
        }
        for &j in self.forward(s.base) {
            let next = AugState {
                reverse: false,
                base: j,
                flags: s.flags | self.forward_mask[j as usize],
            };
            out.push((AugLabel::Step { from: s.base, to: j }, next));
        }
        for &b in self.jump_targets(s.base) {
            let next = AugState {
                reverse: true,
                base: b,
                flags: s.flags | self.reverse_mask[b as usize],
            };
            out.push((AugLabel::Jump { from: s.base, to: b }, next));
        }
        Ok(out)
    }

    fn encode(&self, s: &AugState, out: &mut Vec<u8>) {
        out.push(s.reverse as u8);
        out.extend_from_slice(&s.base.to_le_bytes());
        out.extend_from_slice(&s.flags.to_le_bytes()[..self.flag_bytes()]);
    }

    fn decode(&self, key: &[u8]) -> AugState {
        let mut flags = [0u8; 8];
        flags[..key.len() - 5].copy_from_slice(&key[5..]);
        AugState {
            reverse: key[0] == 1,
            base: u32::from_le_bytes([key[1], key[2], key[3], key[4]]),
            flags: u64::from_le_bytes(flags),
        }
    }

    fn compile_atom(&self, atom: &Expr) -> Result<Self::Atom, Error> {
        self.compile(atom)
    }

    fn eval_atom(&self, atom: &Self::Atom, s: &AugState, deadlock: bool) -> Result<bool, Error> {
        Ok(match atom {
            AugAtom::Real => !s.reverse,
            AugAtom::Initial => s.reverse && s.base == 0,
            AugAtom::Flag(k) => s.flags >> k & 1 == 1,
            AugAtom::Base(a) => self.base.eval_atom(a, &self.base_state(s), deadlock)?,
            AugAtom::Not(a) => !self.eval_atom(a, s, deadlock)?,
            AugAtom::And(a, b) => self.eval_atom(a, s, deadlock)? && self.eval_atom(b, s, deadlock)?,
            AugAtom::Or(a, b) => self.eval_atom(a, s, deadlock)? || self.eval_atom(b, s, deadlock)?,
        })
    }
}

/// Receipt-freeness variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Weak,
    Strong,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "weak" => Ok(Variant::Weak),
            "strong" => Ok(Variant::Strong),
            _ => Err(Error::Query(format!("unknown variant `{s}`, expected weak or strong"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Weak => "weak",
            Variant::Strong => "strong",
        })
    }
}

/// Outcome of a receipt-freeness check on the election model.
#[derive(Debug, Clone)]
pub struct RfOutcome {
    pub formula: Formula,
    pub satisfied: bool,
    pub base_states: usize,
    pub states_explored: usize,
}

/// Checks the weak or strong receipt-freeness formula for voter `i` and
/// candidate `j` on `net`. An empty `observed` means the coercer's own state.
pub fn check_receipt_freeness(
    net: &Network,
    observed: &[String],
    i: usize,
    j: usize,
    variant: Variant,
    budget: usize,
) -> Result<RfOutcome, Error> {
    let mut spec = ObservableSpec::receipt_freeness(i, j);
    if !observed.is_empty() {
        spec.observed = observed.to_vec();
    }
    let aug = augment_network(net, &spec, &results_condition(), budget)?;
    let formula = match variant {
        Variant::Weak => build_rf_weak(i, j),
        Variant::Strong => build_rf_strong(i, j),
    };
    let v = crate::checker::check(
        &aug,
        &formula,
        &crate::checker::CheckOptions::default().with_budget(budget),
    )?;
    Ok(RfOutcome {
        formula,
        satisfied: v.satisfied,
        base_states: aug.base_graph().len(),
        states_explored: v.states_explored,
    })
}

/// A small explicit system: numbered states, edges, named propositions and an
/// observation per state. State 0 is initial.
#[derive(Debug, Clone, Default)]
pub struct Kripke {
    pub succ: Vec<Vec<u32>>,
    pub props: Vec<(String, Vec<bool>)>,
    pub observation: Vec<i64>,
}

#[derive(Debug, Clone)]
pub enum KripkeAtom {
    Prop(usize),
    Deadlock,
    Not(Box<KripkeAtom>),
    And(Box<KripkeAtom>, Box<KripkeAtom>),
    Or(Box<KripkeAtom>, Box<KripkeAtom>),
}

impl Kripke {
    pub fn new(states: usize) -> Self {
        Kripke {
            succ: vec![Vec::new(); states],
            props: Vec::new(),
            observation: vec![0; states],
        }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn edge(&mut self, from: u32, to: u32) -> &mut Self {
        if !self.succ[from as usize].contains(&to) {
            self.succ[from as usize].push(to);
        }
        self
    }

    /// Declares proposition `name` true exactly in `states`.
    pub fn prop(&mut self, name: &str, states: &[u32]) -> &mut Self {
        let mut v = vec![false; self.len()];
        for &s in states {
            v[s as usize] = true;
        }
        self.props.push((name.to_string(), v));
        self
    }

    pub fn holds(&self, name: &str, s: u32) -> bool {
        self.props.iter().any(|(n, v)| n == name && v[s as usize])
    }

    fn compile(&self, e: &Expr) -> Result<KripkeAtom, Error> {
        let bx = |x: &Expr| self.compile(x).map(Box::new);
        Ok(match e {
            Expr::Deadlock => KripkeAtom::Deadlock,
            Expr::Name(n) => KripkeAtom::Prop(
                self.props
                    .iter()
                    .position(|(p, _)| p == n)
                    .ok_or_else(|| Error::Query(format!("unknown proposition `{n}`")))?,
            ),
            Expr::Unary(UnOp::Not, a) => KripkeAtom::Not(bx(a)?),
            Expr::Binary(BinOp::And, a, b) => KripkeAtom::And(bx(a)?, bx(b)?),
            Expr::Binary(BinOp::Or, a, b) => KripkeAtom::Or(bx(a)?, bx(b)?),
            other => return Err(Error::Query(format!("`{other}` is not a proposition"))),
        })
    }

    fn eval(&self, a: &KripkeAtom, s: u32, deadlock: bool) -> bool {
        match a {
            KripkeAtom::Prop(k) => self.props[*k].1[s as usize],
            KripkeAtom::Deadlock => deadlock,
            KripkeAtom::Not(x) => !self.eval(x, s, deadlock),
            KripkeAtom::And(x, y) => self.eval(x, s, deadlock) && self.eval(y, s, deadlock),
            KripkeAtom::Or(x, y) => self.eval(x, s, deadlock) || self.eval(y, s, deadlock),
        }
    }
}

impl TransitionSystem for Kripke {
    type State = u32;
    type Label = ();
    type Atom = KripkeAtom;

    fn initial(&self) -> u32 {
        0
    }

    fn successors(&self, s: &u32) -> Result<Vec<((), u32)>, Error> {
        Ok(self.succ[*s as usize].iter().map(|&t| ((), t)).collect())
    }

    fn encode(&self, s: &u32, out: &mut Vec<u8>) {
        out.extend_from_slice(&s.to_le_bytes());
    }

    fn decode(&self, key: &[u8]) -> u32 {
        u32::from_le_bytes([key[0], key[1], key[2], key[3]])
    }

    fn compile_atom(&self, atom: &Expr) -> Result<KripkeAtom, Error> {
        self.compile(atom)
    }

    fn eval_atom(&self, atom: &KripkeAtom, s: &u32, deadlock: bool) -> Result<bool, Error> {
        Ok(self.eval(atom, *s, deadlock))
    }
}

#[cfg(test)]
mod tests;
