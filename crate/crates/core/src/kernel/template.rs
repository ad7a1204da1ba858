//! Declarations: variables, locations, edges, channels and process templates.

use super::error::{ModelError, ParseError};
use super::expr::{Expr, Stmt};

/// A bounded integer variable (scalar or multi-dimensional array).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub initial: i64,
    /// Array dimensions; empty for scalars.
    pub dims: Vec<usize>,
}

impl VariableDecl {
    pub fn scalar(name: impl Into<String>, lower: i64, upper: i64, initial: i64) -> Self {
        VariableDecl {
            name: name.into(),
            lower,
            upper,
            initial,
            dims: Vec::new(),
        }
    }

    pub fn array(name: impl Into<String>, dims: &[usize], lower: i64, upper: i64, initial: i64) -> Self {
        VariableDecl {
            name: name.into(),
            lower,
            upper,
            initial,
            dims: dims.to_vec(),
        }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Self::scalar(name, 0, 1, 0)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if !(self.lower <= self.initial && self.initial <= self.upper) {
            return Err(ModelError::BadInitial {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
                initial: self.initial,
            });
        }
        if self.lower < i32::MIN as i64 || self.upper > i32::MAX as i64 {
            return Err(ModelError::Invalid(format!(
                "variable `{}`: bounds exceed 32-bit storage",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationKind {
    Initial,
    Normal,
    Committed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub kind: LocationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncSpec {
    pub channel: String,
    pub index: Option<Expr>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
}

/// A guarded edge. Built fluently; syntax errors are held until the edge is
/// added to its template.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub selections: Vec<Selection>,
    pub guard: Option<Expr>,
    pub sync: Option<SyncSpec>,
    pub updates: Vec<Stmt>,
    error: Option<ParseError>,
}

impl Edge {
    pub fn new(source: usize, target: usize) -> Self {
        Edge {
            source,
            target,
            selections: Vec::new(),
            guard: None,
            sync: None,
            updates: Vec::new(),
            error: None,
        }
    }

    /// Binds `name` nondeterministically to each value of `[lower, upper]`.
    pub fn select(mut self, name: impl Into<String>, lower: i64, upper: i64) -> Self {
        self.selections.push(Selection {
            name: name.into(),
            lower,
            upper,
        });
        self
    }

    pub fn guard(mut self, text: &str) -> Self {
        match Expr::parse(text) {
            Ok(g) => {
                self.guard = Some(match self.guard.take() {
                    Some(prev) => Expr::bin(super::expr::BinOp::And, prev, g),
                    None => g,
                })
            }
            Err(e) => self.fail(e),
        }
        self
    }

    pub fn send(self, channel: &str) -> Self {
        self.sync(channel, Direction::Send)
    }

    pub fn recv(self, channel: &str) -> Self {
        self.sync(channel, Direction::Receive)
    }

    fn sync(mut self, channel: &str, direction: Direction) -> Self {
        match Expr::parse(channel) {
            Ok(Expr::Name(n)) => {
                self.sync = Some(SyncSpec {
                    channel: n,
                    index: None,
                    direction,
                })
            }
            Ok(Expr::Index(b, i)) if matches!(*b, Expr::Name(_)) => {
                let Expr::Name(n) = *b else { unreachable!() };
                self.sync = Some(SyncSpec {
                    channel: n,
                    index: Some(*i),
                    direction,
                })
            }
            Ok(_) => self.fail(ParseError::new(1, 1, format!("bad channel reference `{channel}`"))),
            Err(e) => self.fail(e),
        }
        self
    }

    pub fn update(mut self, text: &str) -> Self {
        match Stmt::parse_list(text) {
            Ok(s) => self.updates.extend(s),
            Err(e) => self.fail(e),
        }
        self
    }

    fn fail(&mut self, e: ParseError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    Binary,
    Broadcast,
}

/// A channel, or a one-dimensional array of channels when `size > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub mode: ChannelMode,
    pub size: usize,
    pub is_array: bool,
}

impl Channel {
    pub fn binary(name: impl Into<String>) -> Self {
        Channel {
            name: name.into(),
            mode: ChannelMode::Binary,
            size: 1,
            is_array: false,
        }
    }

    pub fn broadcast(name: impl Into<String>) -> Self {
        Channel {
            name: name.into(),
            mode: ChannelMode::Broadcast,
            size: 1,
            is_array: false,
        }
    }

    pub fn binary_array(name: impl Into<String>, size: usize) -> Self {
        Channel {
            name: name.into(),
            mode: ChannelMode::Binary,
            size,
            is_array: true,
        }
    }
}

/// Parameterised process behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTemplate {
    pub name: String,
    pub parameters: Vec<String>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
    pub locals: Vec<VariableDecl>,
}

impl ProcessTemplate {
    pub fn new(name: impl Into<String>) -> Self {
        ProcessTemplate {
            name: name.into(),
            parameters: Vec::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            locals: Vec::new(),
        }
    }

    pub fn parameter(&mut self, name: impl Into<String>) -> &mut Self {
        self.parameters.push(name.into());
        self
    }

    pub fn local(&mut self, decl: VariableDecl) -> &mut Self {
        self.locals.push(decl);
        self
    }

    pub fn location(&mut self, name: impl Into<String>, kind: LocationKind) -> usize {
        self.locations.push(Location {
            name: name.into(),
            kind,
        });
        self.locations.len() - 1
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<usize, ModelError> {
        if let Some(e) = edge.error {
            return Err(ModelError::Syntax {
                context: format!("{} edge {}", self.name, self.edges.len()),
                source: e,
            });
        }
        self.edges.push(edge);
        Ok(self.edges.len() - 1)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn initial_location(&self) -> Result<usize, ModelError> {
        let mut it = self
            .locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.kind == LocationKind::Initial);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Ok(i),
            _ => Err(ModelError::InitialLocation(self.name.clone())),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        self.initial_location()?;
        let mut seen = std::collections::HashSet::new();
        for l in &self.locations {
            if !seen.insert(&l.name) {
                return Err(ModelError::Duplicate {
                    kind: "location",
                    name: format!("{}.{}", self.name, l.name),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for v in &self.locals {
            v.validate()?;
            if !seen.insert(&v.name) {
                return Err(ModelError::Duplicate {
                    kind: "local variable",
                    name: format!("{}.{}", self.name, v.name),
                });
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(ModelError::Invalid(format!(
                    "{} edge {k}: endpoint is not a location of this template",
                    self.name
                )));
            }
            for s in &e.selections {
                if s.lower > s.upper {
                    return Err(ModelError::Invalid(format!(
                        "{} edge {k}: empty selection range for `{}`",
                        self.name, s.name
                    )));
                }
            }
        }
        Ok(())
    }
}
