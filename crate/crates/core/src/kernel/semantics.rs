//! Operational semantics: evaluation, successor enumeration, canonical keys.

use super::error::{EvalError, ModelError};
use super::expr::{AssignOp, BinOp, Expr, UnOp};
use super::network::{CEdge, CExpr, CStmt, CTarget, Frame, FrameValues, Network};
use super::template::{ChannelMode, Direction};

/// Location vector plus flat valuation (globals, then locals per instance).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkState {
    pub locations: Vec<u16>,
    pub values: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    Internal,
    BinarySync,
    Broadcast,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Participant {
    pub instance: usize,
    /// Edge index in the template's declaration order.
    pub edge: usize,
    /// Selection values in declaration order.
    pub bindings: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionLabel {
    pub kind: TransitionKind,
    /// Channel name and array index, for synchronisations.
    pub channel: Option<(String, Option<usize>)>,
    /// Sender (or the single internal mover) first, receivers by ascending instance.
    pub participants: Vec<Participant>,
}

impl TransitionLabel {
    /// `(selection name, value)` pairs across all participants.
    pub fn bindings(&self, net: &Network) -> Vec<(String, i64)> {
        let mut out = Vec::new();
        for p in &self.participants {
            let edge = &net.template_of(p.instance).edges[p.edge];
            for (s, v) in edge.selections.iter().zip(&p.bindings) {
                out.push((s.name.clone(), *v));
            }
        }
        out
    }

    /// Human-readable action name, e.g. `Voter(0): idle -> has_ballot [v_phase?]`.
    pub fn describe(&self, net: &Network) -> String {
        let parts: Vec<String> = self
            .participants
            .iter()
            .map(|p| {
                let tpl = net.template_of(p.instance);
                let e = &tpl.edges[p.edge];
                format!(
                    "{}: {} -> {}",
                    net.instances[p.instance].name, tpl.locations[e.source].name, tpl.locations[e.target].name
                )
            })
            .collect();
        match &self.channel {
            Some((c, Some(i))) => format!("{} [{c}[{i}]]", parts.join(", ")),
            Some((c, None)) => format!("{} [{c}]", parts.join(", ")),
            None => parts.join(", "),
        }
    }
}

/// A compiled query atom over network states.
#[derive(Debug, Clone)]
pub struct CompiledAtom {
    pub(crate) expr: CExpr,
    pub(crate) needs_deadlock: bool,
}

impl CompiledAtom {
    pub fn needs_deadlock(&self) -> bool {
        self.needs_deadlock
    }
}

struct Ctx<'a> {
    net: &'a Network,
    vals: &'a [i32],
    locs: &'a [u16],
    sels: &'a [i64],
    instance: Option<usize>,
    deadlock: Option<bool>,
}

impl Ctx<'_> {
    fn eval(&self, e: &CExpr) -> Result<i64, EvalError> {
        Ok(match e {
            CExpr::Const(v) => *v,
            CExpr::Slot(s) => self.vals[*s] as i64,
            CExpr::Elem { var, idx } => self.vals[self.offset(*var, idx)?] as i64,
            CExpr::Sel(k) => self.sels[*k],
            CExpr::Loc { instance, location } => (self.locs[*instance] as usize == *location) as i64,
            CExpr::Un(UnOp::Neg, a) => self.eval(a)?.checked_neg().ok_or(EvalError::Overflow)?,
            CExpr::Un(UnOp::Not, a) => (self.eval(a)? == 0) as i64,
            CExpr::Bin(BinOp::And, a, b) => (self.eval(a)? != 0 && self.eval(b)? != 0) as i64,
            CExpr::Bin(BinOp::Or, a, b) => (self.eval(a)? != 0 || self.eval(b)? != 0) as i64,
            CExpr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => x.checked_add(y).ok_or(EvalError::Overflow)?,
                    BinOp::Sub => x.checked_sub(y).ok_or(EvalError::Overflow)?,
                    BinOp::Mul => x.checked_mul(y).ok_or(EvalError::Overflow)?,
                    BinOp::Div => {
                        if y == 0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x.checked_div(y).ok_or(EvalError::Overflow)?
                    }
                    BinOp::Rem => {
                        if y == 0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x.checked_rem(y).ok_or(EvalError::Overflow)?
                    }
                    BinOp::Eq => (x == y) as i64,
                    BinOp::Ne => (x != y) as i64,
                    BinOp::Lt => (x < y) as i64,
                    BinOp::Le => (x <= y) as i64,
                    BinOp::Gt => (x > y) as i64,
                    BinOp::Ge => (x >= y) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            CExpr::Call { proc, args } => {
                let args: Vec<i64> = args.iter().map(|a| self.eval(a)).collect::<Result<_, _>>()?;
                let mut frame = Frame {
                    net: self.net,
                    instance: self.instance,
                    values: FrameValues::Read(self.vals),
                    proc_name: &self.net.proc_names[*proc],
                };
                (self.net.procs[*proc])(&mut frame, &args)?
            }
            CExpr::Deadlock => self.deadlock.map(|d| d as i64).ok_or_else(|| EvalError::Procedure {
                name: "deadlock".into(),
                message: "deadlock status unavailable in this context".into(),
            })?,
        })
    }

    fn offset(&self, var: usize, idx: &[CExpr]) -> Result<usize, EvalError> {
        let info = &self.net.vars[var];
        let mut flat = 0usize;
        for (d, ie) in idx.iter().enumerate() {
            let i = self.eval(ie)?;
            if i < 0 || i as usize >= info.dims[d] {
                return Err(EvalError::IndexOutOfRange {
                    name: info.name.clone(),
                    index: i,
                    len: info.dims[d],
                });
            }
            flat = flat * info.dims[d] + i as usize;
        }
        Ok(info.base + flat)
    }
}

struct Enabled<'a> {
    instance: usize,
    edge: &'a CEdge,
    bindings: Vec<i64>,
    channel: Option<(usize, Direction)>,
}

impl Network {
    /// All instances at their initial locations, all variables at their initial values.
    pub fn initial_state(&self) -> NetworkState {
        let mut values = vec![0i32; self.slot_count];
        for v in &self.vars {
            values[v.base..v.base + v.len()].fill(v.initial as i32);
        }
        NetworkState {
            locations: self.initial_locs.clone(),
            values,
        }
    }

    /// Byte encoding that is injective over well-formed states of this network.
    pub fn canonical_key(&self, state: &NetworkState) -> Vec<u8> {
        let mut out = Vec::with_capacity(state.locations.len() * self.loc_width as usize + state.values.len());
        self.write_key(state, &mut out);
        out
    }

    pub(crate) fn write_key(&self, state: &NetworkState, out: &mut Vec<u8>) {
        for &l in &state.locations {
            if self.loc_width == 1 {
                out.push(l as u8);
            } else {
                out.extend_from_slice(&l.to_le_bytes());
            }
        }
        for (s, &v) in state.values.iter().enumerate() {
            let rel = (v as i64 - self.vars[self.slot_owner[s]].lower) as u64;
            match self.key_widths[s] {
                1 => out.push(rel as u8),
                2 => out.extend_from_slice(&(rel as u16).to_le_bytes()),
                _ => out.extend_from_slice(&(rel as u32).to_le_bytes()),
            }
        }
    }

    /// Inverse of [`Self::canonical_key`].
    pub fn decode_key(&self, key: &[u8]) -> NetworkState {
        let mut pos = 0;
        let mut locations = Vec::with_capacity(self.instances.len());
        for _ in 0..self.instances.len() {
            if self.loc_width == 1 {
                locations.push(key[pos] as u16);
                pos += 1;
            } else {
                locations.push(u16::from_le_bytes([key[pos], key[pos + 1]]));
                pos += 2;
            }
        }
        let mut values = Vec::with_capacity(self.slot_count);
        for s in 0..self.slot_count {
            let lower = self.vars[self.slot_owner[s]].lower;
            let rel = match self.key_widths[s] {
                1 => {
                    pos += 1;
                    key[pos - 1] as u64
                }
                2 => {
                    pos += 2;
                    u16::from_le_bytes([key[pos - 2], key[pos - 1]]) as u64
                }
                _ => {
                    pos += 4;
                    u32::from_le_bytes([key[pos - 4], key[pos - 3], key[pos - 2], key[pos - 1]]) as u64
                }
            };
            values.push((lower + rel as i64) as i32);
        }
        NetworkState { locations, values }
    }

    /// Every value within its declared bounds.
    pub fn in_bounds(&self, state: &NetworkState) -> bool {
        state.values.iter().enumerate().all(|(s, &v)| {
            let info = &self.vars[self.slot_owner[s]];
            (info.lower..=info.upper).contains(&(v as i64))
        })
    }

    /// Compiles a query atom: a location reference, a boolean expression over
    /// variables, or `deadlock`.
    pub fn compile_atom(&self, atom: &Expr) -> Result<CompiledAtom, ModelError> {
        let expr = self.compile_query_expr(atom)?;
        Ok(CompiledAtom {
            needs_deadlock: expr.mentions_deadlock(),
            expr,
        })
    }

    /// Evaluates a compiled atom. `deadlock` must be provided when the atom mentions it.
    pub fn eval_compiled(
        &self,
        atom: &CompiledAtom,
        state: &NetworkState,
        deadlock: Option<bool>,
    ) -> Result<bool, EvalError> {
        let ctx = Ctx {
            net: self,
            vals: &state.values,
            locs: &state.locations,
            sels: &[],
            instance: None,
            deadlock,
        };
        Ok(ctx.eval(&atom.expr)? != 0)
    }

    /// Compiles and evaluates `atom` in `state`.
    pub fn eval_atom(&self, state: &NetworkState, atom: &Expr) -> Result<bool, crate::Error> {
        let c = self.compile_atom(atom)?;
        let deadlock = if c.needs_deadlock {
            Some(self.successors(state)?.is_empty())
        } else {
            None
        };
        Ok(self.eval_compiled(&c, state, deadlock)?)
    }

    /// Value of a scalar or array element by display name (`mixes`, `board[0][1]`,
    /// `Voter(0).chosen`).
    pub fn value_of(&self, state: &NetworkState, name: &str) -> Result<i64, crate::Error> {
        let c = self.compile_query_expr(&Expr::parse(name).map_err(crate::Error::Parse)?)?;
        let ctx = Ctx {
            net: self,
            vals: &state.values,
            locs: &state.locations,
            sels: &[],
            instance: None,
            deadlock: None,
        };
        Ok(ctx.eval(&c)?)
    }

    fn enabled(&self, state: &NetworkState) -> Result<Vec<Enabled<'_>>, EvalError> {
        let mut out = Vec::new();
        for (inst, &loc) in state.locations.iter().enumerate() {
            for edge in &self.edges[inst][loc as usize] {
                let mut binding: Vec<i64> = edge.selections.iter().map(|s| s.0).collect();
                loop {
                    let ctx = Ctx {
                        net: self,
                        vals: &state.values,
                        locs: &state.locations,
                        sels: &binding,
                        instance: Some(inst),
                        deadlock: None,
                    };
                    let wrap = |e: EvalError| EvalError::AtEdge {
                        instance: self.instances[inst].name.clone(),
                        edge: edge.index,
                        inner: Box::new(e),
                    };
                    let ok = match &edge.guard {
                        Some(g) => ctx.eval(g).map_err(wrap)? != 0,
                        None => true,
                    };
                    if ok {
                        let channel = match &edge.sync {
                            None => None,
                            Some(s) => {
                                let k = match &s.index {
                                    None => 0,
                                    Some(i) => {
                                        let k = ctx.eval(i).map_err(wrap)?;
                                        if k < 0 || k as usize >= s.size {
                                            return Err(wrap(EvalError::IndexOutOfRange {
                                                name: s.name.clone(),
                                                index: k,
                                                len: s.size,
                                            }));
                                        }
                                        k as usize
                                    }
                                };
                                Some((s.base + k, s.direction))
                            }
                        };
                        out.push(Enabled {
                            instance: inst,
                            edge,
                            bindings: binding.clone(),
                            channel,
                        });
                    }
                    // Odometer over selection ranges, last selection fastest.
                    let mut advanced = false;
                    for d in (0..binding.len()).rev() {
                        if binding[d] < edge.selections[d].1 {
                            binding[d] += 1;
                            advanced = true;
                            break;
                        }
                        binding[d] = edge.selections[d].0;
                    }
                    if !advanced {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Enumerates all transitions from `state` in deterministic order.
    pub fn successors(&self, state: &NetworkState) -> Result<Vec<(TransitionLabel, NetworkState)>, EvalError> {
        let enabled = self.enabled(state)?;
        let committed_any = state
            .locations
            .iter()
            .enumerate()
            .any(|(i, &l)| self.committed[i][l as usize]);
        let is_committed = |e: &Enabled| self.committed[e.instance][state.locations[e.instance] as usize];
        let mut out = Vec::new();
        for e in &enabled {
            match e.channel {
                None => {
                    if committed_any && !is_committed(e) {
                        continue;
                    }
                    if let Some(next) = self.fire(state, &[e])? {
                        out.push((self.label(TransitionKind::Internal, None, &[e]), next));
                    }
                }
                Some((chan, Direction::Send)) => match self.channel_slots[chan].mode {
                    ChannelMode::Binary => {
                        for r in enabled
                            .iter()
                            .filter(|r| r.instance != e.instance && r.channel == Some((chan, Direction::Receive)))
                        {
                            if committed_any && !is_committed(e) && !is_committed(r) {
                                continue;
                            }
                            let parts = [e, r];
                            if let Some(next) = self.fire(state, &parts)? {
                                out.push((self.label(TransitionKind::BinarySync, Some(chan), &parts), next));
                            }
                        }
                    }
                    ChannelMode::Broadcast => {
                        // Per receiving instance, its enabled receive options.
                        let mut groups: Vec<Vec<&Enabled>> = Vec::new();
                        for r in enabled
                            .iter()
                            .filter(|r| r.instance != e.instance && r.channel == Some((chan, Direction::Receive)))
                        {
                            match groups.last_mut() {
                                Some(g) if g[0].instance == r.instance => g.push(r),
                                _ => groups.push(vec![r]),
                            }
                        }
                        let mut pick = vec![0usize; groups.len()];
                        loop {
                            let mut parts: Vec<&Enabled> = vec![e];
                            parts.extend(groups.iter().zip(&pick).map(|(g, &k)| g[k]));
                            if !committed_any || parts.iter().any(|p| is_committed(p)) {
                                if let Some(next) = self.fire(state, &parts)? {
                                    out.push((self.label(TransitionKind::Broadcast, Some(chan), &parts), next));
                                }
                            }
                            let mut d = groups.len();
                            let mut done = true;
                            while d > 0 {
                                d -= 1;
                                if pick[d] + 1 < groups[d].len() {
                                    pick[d] += 1;
                                    done = false;
                                    break;
                                }
                                pick[d] = 0;
                            }
                            if done {
                                break;
                            }
                        }
                    }
                },
                Some((_, Direction::Receive)) => {}
            }
        }
        Ok(out)
    }

    fn label(&self, kind: TransitionKind, chan: Option<usize>, parts: &[&Enabled]) -> TransitionLabel {
        let channel = chan.map(|slot| {
            let mut base = 0;
            for c in &self.channels {
                if slot < base + c.size {
                    return (c.name.clone(), c.is_array.then_some(slot - base));
                }
                base += c.size;
            }
            unreachable!("channel slot out of range")
        });
        TransitionLabel {
            kind,
            channel,
            participants: parts
                .iter()
                .map(|p| Participant {
                    instance: p.instance,
                    edge: p.edge.index,
                    bindings: p.bindings.clone(),
                })
                .collect(),
        }
    }

    /// Applies participant updates in order; `None` if a bound is violated.
    fn fire(&self, state: &NetworkState, parts: &[&Enabled]) -> Result<Option<NetworkState>, EvalError> {
        let mut next = state.clone();
        for p in parts {
            let wrap = |e: EvalError| EvalError::AtEdge {
                instance: self.instances[p.instance].name.clone(),
                edge: p.edge.index,
                inner: Box::new(e),
            };
            for u in &p.edge.updates {
                self.exec(u, &mut next, &p.bindings, p.instance).map_err(wrap)?;
            }
            next.locations[p.instance] = p.edge.target as u16;
        }
        Ok(self.in_bounds(&next).then_some(next))
    }

    fn exec(&self, stmt: &CStmt, state: &mut NetworkState, sels: &[i64], instance: usize) -> Result<(), EvalError> {
        match stmt {
            CStmt::Assign { target, op, value } => {
                let ctx = Ctx {
                    net: self,
                    vals: &state.values,
                    locs: &state.locations,
                    sels,
                    instance: Some(instance),
                    deadlock: None,
                };
                let v = ctx.eval(value)?;
                let slot = match target {
                    CTarget::Slot(s) => *s,
                    CTarget::Elem { var, idx } => ctx.offset(*var, idx)?,
                };
                let old = state.values[slot] as i64;
                let new = match op {
                    AssignOp::Set => v,
                    AssignOp::Add => old.checked_add(v).ok_or(EvalError::Overflow)?,
                    AssignOp::Sub => old.checked_sub(v).ok_or(EvalError::Overflow)?,
                };
                // Out-of-range values are caught by the bound check after the transition.
                state.values[slot] = i32::try_from(new).map_err(|_| EvalError::Overflow)?;
            }
            CStmt::Call { proc, args } => {
                let args: Vec<i64> = {
                    let ctx = Ctx {
                        net: self,
                        vals: &state.values,
                        locs: &state.locations,
                        sels,
                        instance: Some(instance),
                        deadlock: None,
                    };
                    args.iter().map(|a| ctx.eval(a)).collect::<Result<_, _>>()?
                };
                let mut frame = Frame {
                    net: self,
                    instance: Some(instance),
                    values: FrameValues::Write(&mut state.values),
                    proc_name: &self.proc_names[*proc],
                };
                (self.procs[*proc])(&mut frame, &args)?;
            }
        }
        Ok(())
    }

    /// Flat `(name, value)` rendering of a state: locations as strings, then variables.
    pub fn state_entries(&self, state: &NetworkState) -> Vec<(String, StateValue)> {
        let mut out = Vec::with_capacity(state.locations.len() + state.values.len());
        for (i, &l) in state.locations.iter().enumerate() {
            out.push((
                self.instances[i].name.clone(),
                StateValue::Location(self.location_name(i, l as usize).to_string()),
            ));
        }
        for v in &self.vars {
            let owner = v.owner.map(|o| self.instances[o].name.as_str());
            for k in 0..v.len() {
                out.push((
                    v.element_name(k, owner),
                    StateValue::Int(state.values[v.base + k] as i64),
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateValue {
    Location(String),
    Int(i64),
}
