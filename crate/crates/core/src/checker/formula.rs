use std::fmt;

use crate::kernel::Expr;

/// CTL over atomic kernel expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Bool(bool),
    /// A location reference, comparison, variable or `deadlock`.
    Atom(Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    EX(Box<Formula>),
    EF(Box<Formula>),
    AG(Box<Formula>),
    AF(Box<Formula>),
    EG(Box<Formula>),
    EU(Box<Formula>, Box<Formula>),
    LeadsTo(Box<Formula>, Box<Formula>),
}

/// Which verification routine a formula is routed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FragmentClass {
    /// A single top-level quantifier over quantifier-free bodies.
    UppaalFragment,
    NestedCtl,
}

impl Formula {
    pub fn atom(e: Expr) -> Self {
        Formula::Atom(e)
    }

    pub fn parse_atom(text: &str) -> Result<Self, crate::kernel::ParseError> {
        Ok(Formula::Atom(Expr::parse(text)?))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn ex(f: Formula) -> Self {
        Formula::EX(Box::new(f))
    }

    pub fn ef(f: Formula) -> Self {
        Formula::EF(Box::new(f))
    }

    pub fn ag(f: Formula) -> Self {
        Formula::AG(Box::new(f))
    }

    pub fn af(f: Formula) -> Self {
        Formula::AF(Box::new(f))
    }

    pub fn eg(f: Formula) -> Self {
        Formula::EG(Box::new(f))
    }

    pub fn eu(a: Formula, b: Formula) -> Self {
        Formula::EU(Box::new(a), Box::new(b))
    }

    pub fn leads_to(a: Formula, b: Formula) -> Self {
        Formula::LeadsTo(Box::new(a), Box::new(b))
    }

    /// No path quantifier anywhere.
    pub fn is_state_formula(&self) -> bool {
        match self {
            Formula::Bool(_) | Formula::Atom(_) => true,
            Formula::Not(a) => a.is_state_formula(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_state_formula() && b.is_state_formula()
            }
            _ => false,
        }
    }

    pub fn fragment(&self) -> FragmentClass {
        match self {
            Formula::EF(p) | Formula::AG(p) | Formula::AF(p) | Formula::EG(p) if p.is_state_formula() => {
                FragmentClass::UppaalFragment
            }
            Formula::LeadsTo(p, q) if p.is_state_formula() && q.is_state_formula() => FragmentClass::UppaalFragment,
            _ => FragmentClass::NestedCtl,
        }
    }

    /// Every atom, left to right.
    pub fn atoms(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Formula::Bool(_) => {}
            Formula::Atom(e) => out.push(e),
            Formula::Not(a) | Formula::EX(a) | Formula::EF(a) | Formula::AG(a) | Formula::AF(a) | Formula::EG(a) => {
                a.collect_atoms(out)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::EU(a, b)
            | Formula::LeadsTo(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

/// Parenthesised wherever precedence could matter; re-parses to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bool(b) => write!(f, "{b}"),
            Formula::Atom(e) => write!(f, "{e}"),
            Formula::Not(a) => write!(f, "not {}", Operand(a)),
            Formula::And(a, b) => write!(f, "({} and {})", Operand(a), Operand(b)),
            Formula::Or(a, b) => write!(f, "({} or {})", Operand(a), Operand(b)),
            Formula::Implies(a, b) => write!(f, "({} imply {})", Operand(a), Operand(b)),
            Formula::EX(a) => write!(f, "EX {}", Operand(a)),
            Formula::EF(a) => write!(f, "E<> {}", Operand(a)),
            Formula::AG(a) => write!(f, "A[] {}", Operand(a)),
            Formula::AF(a) => write!(f, "A<> {}", Operand(a)),
            Formula::EG(a) => write!(f, "E[] {}", Operand(a)),
            Formula::EU(a, b) => write!(f, "E[ {} U {} ]", Operand(a), Operand(b)),
            Formula::LeadsTo(a, b) => write!(f, "{} --> {}", Operand(a), Operand(b)),
        }
    }
}

/// Atoms, constants and binary formulas print self-delimited; everything
/// else gets parentheses when used as an operand.
struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::Atom(_) | Formula::Bool(_) | Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => {
                write!(f, "{}", self.0)
            }
            _ => write!(f, "({})", self.0),
        }
    }
}
