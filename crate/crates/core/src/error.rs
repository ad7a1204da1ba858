use thiserror::Error;

use crate::kernel::{EvalError, ModelError, ParseError};

/// Top-level error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("crypto error: {0}")]
    Crypto(#[from] crate::crypto::CryptoError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("state budget of {budget} states exceeded after {states} states and {transitions} transitions")]
    Budget {
        budget: usize,
        states: usize,
        transitions: usize,
    },
    #[error("trace replay failed at step {step}: {message}")]
    Replay { step: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
