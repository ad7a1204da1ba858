//! Instantiated networks: variable layout, name resolution and compiled edges.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::error::{EvalError, ModelError};
use super::expr::{AssignOp, BinOp, Expr, Stmt, UnOp};
use super::template::{Channel, ChannelMode, Direction, LocationKind, ProcessTemplate, VariableDecl};

/// Signature of a registered procedure. Arguments are already evaluated.
pub type ProcFn = dyn Fn(&mut Frame<'_>, &[i64]) -> Result<i64, EvalError> + Send + Sync;

/// Storage of one declared variable inside the flat valuation vector.
#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    /// Owning instance for locals.
    pub owner: Option<usize>,
    pub base: usize,
    pub dims: Vec<usize>,
    pub lower: i64,
    pub upper: i64,
    pub initial: i64,
}

impl VarInfo {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Display name of element `k` (flat offset), e.g. `board[2][1]`.
    pub fn element_name(&self, k: usize, owner: Option<&str>) -> String {
        let mut s = match owner {
            Some(o) => format!("{o}.{}", self.name),
            None => self.name.clone(),
        };
        let mut rem = k;
        let mut idx = vec![0; self.dims.len()];
        for d in (0..self.dims.len()).rev() {
            idx[d] = rem % self.dims[d];
            rem /= self.dims[d];
        }
        for i in idx {
            s.push_str(&format!("[{i}]"));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub template: usize,
    /// Index among instances of the same template.
    pub index: usize,
    pub params: Vec<i64>,
    pub name: String,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ChannelSlot {
    pub mode: ChannelMode,
}

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Const(i64),
    Slot(usize),
    Elem { var: usize, idx: Vec<CExpr> },
    Sel(usize),
    Loc { instance: usize, location: usize },
    Un(UnOp, Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Call { proc: usize, args: Vec<CExpr> },
    Deadlock,
}

impl CExpr {
    pub(crate) fn mentions_deadlock(&self) -> bool {
        match self {
            CExpr::Deadlock => true,
            CExpr::Un(_, e) => e.mentions_deadlock(),
            CExpr::Bin(_, a, b) => a.mentions_deadlock() || b.mentions_deadlock(),
            CExpr::Elem { idx, .. } => idx.iter().any(CExpr::mentions_deadlock),
            CExpr::Call { args, .. } => args.iter().any(CExpr::mentions_deadlock),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CTarget {
    Slot(usize),
    Elem { var: usize, idx: Vec<CExpr> },
}

#[derive(Debug, Clone)]
pub(crate) enum CStmt {
    Assign {
        target: CTarget,
        op: AssignOp,
        value: CExpr,
    },
    Call {
        proc: usize,
        args: Vec<CExpr>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct CSync {
    pub direction: Direction,
    pub base: usize,
    pub size: usize,
    pub index: Option<CExpr>,
    pub name: String,
}

#[derive(Debug, Clone)]
pub(crate) struct CEdge {
    pub index: usize,
    pub target: usize,
    pub selections: Vec<(i64, i64)>,
    pub guard: Option<CExpr>,
    pub sync: Option<CSync>,
    pub updates: Vec<CStmt>,
}

/// A network of instantiated processes over shared globals and channels.
///
/// Immutable after [`NetworkBuilder::build`]; safe to share between threads.
pub struct Network {
    pub(crate) templates: Vec<Arc<ProcessTemplate>>,
    pub(crate) instances: Vec<Instance>,
    pub(crate) globals: Vec<VariableDecl>,
    pub(crate) channels: Vec<Channel>,
    pub(crate) channel_slots: Vec<ChannelSlot>,
    pub(crate) vars: Vec<VarInfo>,
    pub(crate) global_names: HashMap<String, usize>,
    pub(crate) constants: HashMap<String, i64>,
    pub(crate) local_names: Vec<HashMap<String, usize>>,
    pub(crate) slot_count: usize,
    pub(crate) slot_owner: Vec<usize>,
    pub(crate) proc_names: Vec<String>,
    pub(crate) procs: Vec<Arc<ProcFn>>,
    /// Compiled edges per instance, grouped by source location.
    pub(crate) edges: Vec<Vec<Vec<CEdge>>>,
    pub(crate) committed: Vec<Vec<bool>>,
    pub(crate) initial_locs: Vec<u16>,
    pub(crate) key_widths: Vec<u8>,
    pub(crate) loc_width: u8,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("instances", &self.instances.iter().map(|i| &i.name).collect::<Vec<_>>())
            .field("slots", &self.slot_count)
            .finish()
    }
}

impl Network {
    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn templates(&self) -> &[Arc<ProcessTemplate>] {
        &self.templates
    }

    pub fn globals(&self) -> &[VariableDecl] {
        &self.globals
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn variables(&self) -> &[VarInfo] {
        &self.vars
    }

    /// Named integer constants visible to every expression.
    pub fn constant(&self, name: &str) -> Option<i64> {
        self.constants.get(name).copied()
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn template_of(&self, instance: usize) -> &ProcessTemplate {
        &self.templates[self.instances[instance].template]
    }

    pub fn location_name(&self, instance: usize, loc: usize) -> &str {
        &self.template_of(instance).locations[loc].name
    }

    pub fn is_committed(&self, instance: usize, loc: usize) -> bool {
        self.committed[instance][loc]
    }

    /// Finds instance `name(index)`; `index == None` requires a unique instance.
    pub fn find_instance(&self, name: &str, index: Option<i64>) -> Option<usize> {
        let mut matches = self
            .instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| self.templates[inst.template].name == name);
        match index {
            Some(i) => matches.find(|(_, inst)| inst.index as i64 == i).map(|(k, _)| k),
            None => {
                let first = matches.next()?;
                if matches.next().is_some() {
                    None
                } else {
                    Some(first.0)
                }
            }
        }
    }

    /// Variable info by name: a local of `instance` shadows a global.
    pub fn lookup_var(&self, instance: Option<usize>, name: &str) -> Option<&VarInfo> {
        instance
            .and_then(|i| self.local_names[i].get(name))
            .or_else(|| self.global_names.get(name))
            .map(|&v| &self.vars[v])
    }

    /// Compiles a query-level expression (qualified references allowed, no
    /// selections, no parameters).
    pub(crate) fn compile_query_expr(&self, e: &Expr) -> Result<CExpr, ModelError> {
        let scope = Scope {
            net_vars: &self.vars,
            globals: &self.global_names,
            constants: &self.constants,
            locals: None,
            params: &[],
            param_names: &[],
            selections: &[],
            procs: &self.proc_names,
            query: Some(self),
            context: "query",
        };
        scope.expr(e)
    }
}

/// Name-resolution context for compilation.
struct Scope<'a> {
    net_vars: &'a [VarInfo],
    globals: &'a HashMap<String, usize>,
    constants: &'a HashMap<String, i64>,
    locals: Option<&'a HashMap<String, usize>>,
    params: &'a [i64],
    param_names: &'a [String],
    selections: &'a [String],
    procs: &'a [String],
    query: Option<&'a Network>,
    context: &'a str,
}

impl Scope<'_> {
    fn unresolved(&self, kind: &'static str, name: &str) -> ModelError {
        ModelError::Unresolved {
            kind,
            name: name.to_string(),
            context: self.context.to_string(),
        }
    }

    fn var(&self, name: &str) -> Option<usize> {
        self.locals
            .and_then(|l| l.get(name))
            .or_else(|| self.globals.get(name))
            .copied()
    }

    fn expr(&self, e: &Expr) -> Result<CExpr, ModelError> {
        Ok(match e {
            Expr::Int(v) => CExpr::Const(*v),
            Expr::Name(n) => {
                if let Some(k) = self.selections.iter().rposition(|s| s == n) {
                    CExpr::Sel(k)
                } else if let Some(k) = self.param_names.iter().position(|s| s == n) {
                    CExpr::Const(self.params[k])
                } else if let Some(v) = self.var(n) {
                    let info = &self.net_vars[v];
                    if !info.dims.is_empty() {
                        return Err(ModelError::Invalid(format!(
                            "{}: array `{n}` used without index",
                            self.context
                        )));
                    }
                    CExpr::Slot(info.base)
                } else if let Some(&c) = self.constants.get(n) {
                    CExpr::Const(c)
                } else {
                    return Err(self.unresolved("name", n));
                }
            }
            Expr::Index(..) => {
                let (var, idx) = self.indexed(e)?;
                CExpr::Elem { var, idx }
            }
            Expr::Qualified { process, index, member } => {
                let net = self.query.ok_or_else(|| {
                    ModelError::Invalid(format!("{}: qualified names are only allowed in queries", self.context))
                })?;
                let inst = net
                    .find_instance(process, *index)
                    .ok_or_else(|| self.unresolved("instance", &format!("{e}")))?;
                if let Some(l) = net.template_of(inst).location_index(member) {
                    CExpr::Loc {
                        instance: inst,
                        location: l,
                    }
                } else if let Some(&v) = net.local_names[inst].get(member) {
                    let info = &net.vars[v];
                    if !info.dims.is_empty() {
                        return Err(ModelError::Invalid(format!("array `{e}` used without index")));
                    }
                    CExpr::Slot(info.base)
                } else {
                    return Err(self.unresolved("location or variable", &format!("{e}")));
                }
            }
            Expr::Call(name, args) => CExpr::Call {
                proc: self
                    .procs
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| self.unresolved("procedure", name))?,
                args: args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?,
            },
            Expr::Unary(op, a) => CExpr::Un(*op, Box::new(self.expr(a)?)),
            Expr::Binary(op, a, b) => CExpr::Bin(*op, Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Deadlock => {
                if self.query.is_none() {
                    return Err(ModelError::Invalid(format!(
                        "{}: `deadlock` is only allowed in queries",
                        self.context
                    )));
                }
                CExpr::Deadlock
            }
        })
    }

    fn indexed(&self, e: &Expr) -> Result<(usize, Vec<CExpr>), ModelError> {
        let mut idx = Vec::new();
        let mut cur = e;
        while let Expr::Index(b, i) = cur {
            idx.push(self.expr(i)?);
            cur = b;
        }
        idx.reverse();
        let var = match cur {
            Expr::Name(n) => self.var(n).ok_or_else(|| self.unresolved("variable", n))?,
            Expr::Qualified { process, index, member } if self.query.is_some() => {
                let net = self.query.unwrap();
                let inst = net
                    .find_instance(process, *index)
                    .ok_or_else(|| self.unresolved("instance", &format!("{cur}")))?;
                *net.local_names[inst]
                    .get(member)
                    .ok_or_else(|| self.unresolved("variable", &format!("{cur}")))?
            }
            _ => return Err(ModelError::Invalid(format!("{}: cannot index `{cur}`", self.context))),
        };
        if self.net_vars[var].dims.len() != idx.len() {
            return Err(ModelError::Invalid(format!(
                "{}: `{}` expects {} indices, got {}",
                self.context,
                self.net_vars[var].name,
                self.net_vars[var].dims.len(),
                idx.len()
            )));
        }
        Ok((var, idx))
    }

    fn stmt(&self, s: &Stmt) -> Result<CStmt, ModelError> {
        Ok(match s {
            Stmt::Assign { target, op, value } => {
                let target = match target {
                    Expr::Name(n) => {
                        if self.selections.contains(n) || self.param_names.contains(n) {
                            return Err(ModelError::Invalid(format!("{}: cannot assign to `{n}`", self.context)));
                        }
                        let v = self.var(n).ok_or_else(|| self.unresolved("variable", n))?;
                        if !self.net_vars[v].dims.is_empty() {
                            return Err(ModelError::Invalid(format!(
                                "{}: array `{n}` used without index",
                                self.context
                            )));
                        }
                        CTarget::Slot(self.net_vars[v].base)
                    }
                    _ => {
                        let (var, idx) = self.indexed(target)?;
                        CTarget::Elem { var, idx }
                    }
                };
                CStmt::Assign {
                    target,
                    op: *op,
                    value: self.expr(value)?,
                }
            }
            Stmt::Call(name, args) => CStmt::Call {
                proc: self
                    .procs
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| self.unresolved("procedure", name))?,
                args: args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?,
            },
        })
    }
}

/// Incrementally assembles a [`Network`].
#[derive(Default)]
pub struct NetworkBuilder {
    templates: Vec<Arc<ProcessTemplate>>,
    instances: Vec<(usize, Vec<i64>)>,
    globals: Vec<VariableDecl>,
    constants: Vec<(String, i64)>,
    channels: Vec<Channel>,
    procs: Vec<(String, Arc<ProcFn>)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global(&mut self, decl: VariableDecl) -> &mut Self {
        self.globals.push(decl);
        self
    }

    /// Declares a read-only named integer.
    pub fn constant(&mut self, name: impl Into<String>, value: i64) -> &mut Self {
        self.constants.push((name.into(), value));
        self
    }

    pub fn channel(&mut self, channel: Channel) -> &mut Self {
        self.channels.push(channel);
        self
    }

    pub fn procedure<F>(&mut self, name: impl Into<String>, f: F) -> &mut Self
    where
        F: Fn(&mut Frame<'_>, &[i64]) -> Result<i64, EvalError> + Send + Sync + 'static,
    {
        self.procs.push((name.into(), Arc::new(f)));
        self
    }

    /// Registers a template; returns its handle for [`Self::instantiate`].
    pub fn template(&mut self, template: ProcessTemplate) -> usize {
        self.templates.push(Arc::new(template));
        self.templates.len() - 1
    }

    /// Adds an instance of `template` with the given parameter values.
    pub fn instantiate(&mut self, template: usize, params: &[i64]) -> &mut Self {
        self.instances.push((template, params.to_vec()));
        self
    }

    pub fn build(self) -> Result<Network, ModelError> {
        let mut names = std::collections::HashSet::new();
        for g in &self.globals {
            g.validate()?;
            if !names.insert(g.name.clone()) {
                return Err(ModelError::Duplicate {
                    kind: "global variable",
                    name: g.name.clone(),
                });
            }
        }
        let mut constants = HashMap::new();
        for (n, v) in &self.constants {
            if names.contains(n) || constants.insert(n.clone(), *v).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "constant",
                    name: n.clone(),
                });
            }
        }
        let mut chan_names = std::collections::HashSet::new();
        let mut channel_slots = Vec::new();
        let mut chan_base: HashMap<String, (usize, usize)> = HashMap::new();
        for c in &self.channels {
            if !chan_names.insert(c.name.clone()) || names.contains(&c.name) {
                return Err(ModelError::Duplicate {
                    kind: "channel",
                    name: c.name.clone(),
                });
            }
            chan_base.insert(c.name.clone(), (channel_slots.len(), c.size));
            for _ in 0..c.size {
                channel_slots.push(ChannelSlot { mode: c.mode });
            }
        }
        let mut tnames = std::collections::HashSet::new();
        for t in &self.templates {
            t.validate()?;
            if !tnames.insert(t.name.clone()) {
                return Err(ModelError::Duplicate {
                    kind: "template",
                    name: t.name.clone(),
                });
            }
        }
        let mut pnames = std::collections::HashSet::new();
        for (p, _) in &self.procs {
            if !pnames.insert(p.clone()) {
                return Err(ModelError::Duplicate {
                    kind: "procedure",
                    name: p.clone(),
                });
            }
        }

        // Layout: globals first, then locals of each instance.
        let mut vars = Vec::new();
        let mut global_names = HashMap::new();
        let mut slot = 0usize;
        for g in &self.globals {
            global_names.insert(g.name.clone(), vars.len());
            vars.push(VarInfo {
                name: g.name.clone(),
                owner: None,
                base: slot,
                dims: g.dims.clone(),
                lower: g.lower,
                upper: g.upper,
                initial: g.initial,
            });
            slot += g.len();
        }
        let mut instances = Vec::new();
        let mut per_template = vec![0usize; self.templates.len()];
        let mut local_names = Vec::new();
        for (k, (t, params)) in self.instances.iter().enumerate() {
            let tpl = self
                .templates
                .get(*t)
                .ok_or_else(|| ModelError::Invalid(format!("unknown template handle {t}")))?;
            if params.len() != tpl.parameters.len() {
                return Err(ModelError::Invalid(format!(
                    "template `{}` expects {} parameters, got {}",
                    tpl.name,
                    tpl.parameters.len(),
                    params.len()
                )));
            }
            let index = per_template[*t];
            per_template[*t] += 1;
            let mut locals = HashMap::new();
            for l in &tpl.locals {
                locals.insert(l.name.clone(), vars.len());
                vars.push(VarInfo {
                    name: l.name.clone(),
                    owner: Some(k),
                    base: slot,
                    dims: l.dims.clone(),
                    lower: l.lower,
                    upper: l.upper,
                    initial: l.initial,
                });
                slot += l.len();
            }
            local_names.push(locals);
            instances.push(Instance {
                template: *t,
                index,
                params: params.clone(),
                name: format!("{}({index})", tpl.name),
            });
        }
        let mut slot_owner = vec![0; slot];
        let mut key_widths = vec![0u8; slot];
        for (vi, v) in vars.iter().enumerate() {
            let range = (v.upper - v.lower) as u64;
            let w = if range <= u8::MAX as u64 {
                1
            } else if range <= u16::MAX as u64 {
                2
            } else {
                4
            };
            for s in v.base..v.base + v.len() {
                slot_owner[s] = vi;
                key_widths[s] = w;
            }
        }
        let proc_names: Vec<String> = self.procs.iter().map(|(n, _)| n.clone()).collect();
        let procs: Vec<Arc<ProcFn>> = self.procs.iter().map(|(_, f)| f.clone()).collect();

        let mut edges = Vec::new();
        let mut committed = Vec::new();
        let mut initial_locs = Vec::new();
        let mut max_locs = 0;
        for (k, inst) in instances.iter().enumerate() {
            let tpl = &self.templates[inst.template];
            max_locs = max_locs.max(tpl.locations.len());
            initial_locs.push(tpl.initial_location()? as u16);
            committed.push(
                tpl.locations
                    .iter()
                    .map(|l| l.kind == LocationKind::Committed)
                    .collect(),
            );
            let mut by_loc: Vec<Vec<CEdge>> = vec![Vec::new(); tpl.locations.len()];
            for (ei, e) in tpl.edges.iter().enumerate() {
                let context = format!("{} edge {ei}", inst.name);
                let sel_names: Vec<String> = e.selections.iter().map(|s| s.name.clone()).collect();
                let scope = Scope {
                    net_vars: &vars,
                    globals: &global_names,
                    constants: &constants,
                    locals: Some(&local_names[k]),
                    params: &inst.params,
                    param_names: &tpl.parameters,
                    selections: &sel_names,
                    procs: &proc_names,
                    query: None,
                    context: &context,
                };
                let guard = e.guard.as_ref().map(|g| scope.expr(g)).transpose()?;
                let sync = match &e.sync {
                    None => None,
                    Some(s) => {
                        let &(base, size) = chan_base.get(&s.channel).ok_or_else(|| ModelError::Unresolved {
                            kind: "channel",
                            name: s.channel.clone(),
                            context: context.clone(),
                        })?;
                        let is_array = self.channels.iter().any(|c| c.name == s.channel && c.is_array);
                        if is_array != s.index.is_some() {
                            return Err(ModelError::Invalid(format!(
                                "{context}: channel `{}` index mismatch",
                                s.channel
                            )));
                        }
                        Some(CSync {
                            direction: s.direction,
                            base,
                            size,
                            index: s.index.as_ref().map(|i| scope.expr(i)).transpose()?,
                            name: s.channel.clone(),
                        })
                    }
                };
                let updates = e.updates.iter().map(|u| scope.stmt(u)).collect::<Result<_, _>>()?;
                by_loc[e.source].push(CEdge {
                    index: ei,
                    target: e.target,
                    selections: e.selections.iter().map(|s| (s.lower, s.upper)).collect(),
                    guard,
                    sync,
                    updates,
                });
            }
            edges.push(by_loc);
        }
        Ok(Network {
            templates: self.templates,
            instances,
            globals: self.globals,
            channels: self.channels,
            channel_slots,
            vars,
            global_names,
            constants,
            local_names,
            slot_count: slot,
            slot_owner,
            proc_names,
            procs,
            edges,
            committed,
            initial_locs,
            key_widths,
            loc_width: if max_locs <= 256 { 1 } else { 2 },
        })
    }
}

/// View of the valuation handed to procedures.
pub struct Frame<'a> {
    pub(crate) net: &'a Network,
    pub(crate) instance: Option<usize>,
    pub(crate) values: FrameValues<'a>,
    pub(crate) proc_name: &'a str,
}

pub(crate) enum FrameValues<'a> {
    Read(&'a [i32]),
    Write(&'a mut [i32]),
}

/// Resolved handle to a variable, obtained from [`Frame::var`].
#[derive(Debug, Clone, Copy)]
pub struct VarHandle {
    base: usize,
    len: usize,
    stride0: usize,
}

impl<'a> Frame<'a> {
    fn err(&self, message: impl Into<String>) -> EvalError {
        EvalError::Procedure {
            name: self.proc_name.to_string(),
            message: message.into(),
        }
    }

    /// Resolves `name` as a local of the calling instance, else a global.
    pub fn var(&self, name: &str) -> Result<VarHandle, EvalError> {
        let info = self
            .net
            .lookup_var(self.instance, name)
            .ok_or_else(|| self.err(format!("unknown variable `{name}`")))?;
        Ok(VarHandle {
            base: info.base,
            len: info.len(),
            stride0: info.dims.iter().skip(1).product(),
        })
    }

    /// Value of template parameter `name` of the calling instance.
    pub fn param(&self, name: &str) -> Result<i64, EvalError> {
        let inst = self.instance.ok_or_else(|| self.err("no calling instance"))?;
        let tpl = self.net.template_of(inst);
        let k = tpl
            .parameters
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| self.err(format!("unknown parameter `{name}`")))?;
        Ok(self.net.instances[inst].params[k])
    }

    fn slice(&self) -> &[i32] {
        match &self.values {
            FrameValues::Read(v) => v,
            FrameValues::Write(v) => v,
        }
    }

    /// Reads flat element `k` of `var`.
    pub fn get(&self, var: VarHandle, k: usize) -> Result<i64, EvalError> {
        if k >= var.len {
            return Err(self.err(format!("index {k} out of range")));
        }
        Ok(self.slice()[var.base + k] as i64)
    }

    /// Reads element `[row][col]` of a two-dimensional `var`.
    pub fn get2(&self, var: VarHandle, row: usize, col: usize) -> Result<i64, EvalError> {
        if col >= var.stride0.max(1) {
            return Err(self.err(format!("column {col} out of range")));
        }
        self.get(var, row * var.stride0 + col)
    }

    pub fn set(&mut self, var: VarHandle, k: usize, value: i64) -> Result<(), EvalError> {
        if k >= var.len {
            return Err(self.err(format!("index {k} out of range")));
        }
        let v = i32::try_from(value).map_err(|_| EvalError::Overflow)?;
        match &mut self.values {
            FrameValues::Read(_) => Err(EvalError::ReadOnly(self.proc_name.to_string())),
            FrameValues::Write(vals) => {
                vals[var.base + k] = v;
                Ok(())
            }
        }
    }

    pub fn set2(&mut self, var: VarHandle, row: usize, col: usize, value: i64) -> Result<(), EvalError> {
        if col >= var.stride0.max(1) {
            return Err(self.err(format!("column {col} out of range")));
        }
        self.set(var, row * var.stride0 + col, value)
    }

    pub fn fail(&self, message: impl Into<String>) -> EvalError {
        self.err(message)
    }
}
