use thiserror::Error;

/// Syntax error in an expression, statement list or query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

/// Malformed network: raised while building or instantiating templates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("unresolved {kind} `{name}` in {context}")]
    Unresolved {
        kind: &'static str,
        name: String,
        context: String,
    },
    #[error("variable `{name}`: initial value {initial} outside [{lower}, {upper}]")]
    BadInitial {
        name: String,
        lower: i64,
        upper: i64,
        initial: i64,
    },
    #[error("template `{0}` must have exactly one initial location")]
    InitialLocation(String),
    #[error("{context}: {source}")]
    Syntax {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Evaluation failure while computing successors or atoms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("index {index} out of range for `{name}` (length {len})")]
    IndexOutOfRange { name: String, index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("procedure `{0}` may not modify state here")]
    ReadOnly(String),
    #[error("procedure `{name}`: {message}")]
    Procedure { name: String, message: String },
    #[error("{inner} (edge {edge} of {instance})")]
    AtEdge {
        instance: String,
        edge: usize,
        inner: Box<EvalError>,
    },
}
