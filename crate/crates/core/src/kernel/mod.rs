//! Finite-state semantics for networks of processes with bounded integer
//! variables, committed locations, and binary and broadcast channels.

pub mod error;
pub mod expr;
pub mod network;
pub mod random;
pub mod semantics;
pub mod template;

pub use error::{EvalError, ModelError, ParseError};
pub use expr::{BinOp, Expr, Stmt, UnOp};
pub use network::{Frame, Instance, Network, NetworkBuilder, VarHandle, VarInfo};
pub use random::{random_network, RandomShape};
pub use semantics::{CompiledAtom, NetworkState, Participant, StateValue, TransitionKind, TransitionLabel};
pub use template::{Channel, ChannelMode, Direction, Edge, Location, LocationKind, ProcessTemplate, VariableDecl};

#[cfg(test)]
mod tests;
