//! Explicit-state verification of a multi-agent Prêt à Voter model.
//!
//! The crate is layered bottom-up:
//!
//! - [`kernel`]: networks of processes with bounded integers, committed
//!   locations and binary/broadcast channels.
//! - [`crypto`]: desk-scale ElGamal over Z*_p, re-encryption, index absorption
//!   and Shamir (2,3) threshold decryption.
//! - [`model`]: the voter, coercer, mix teller, decryption teller, auditor and
//!   election-authority templates assembled into one network.
//! - [`checker`]: reachability, safety, liveness and leads-to routines plus
//!   full CTL labelling, with BFS/DFS/random-DFS orders and traces.
//! - [`epistemic`]: reverse-state augmentation that turns coercer-knowledge
//!   questions into plain CTL.
//! - [`query`], [`config`], [`report`]: query language, configuration files
//!   and JSON traces for the `pav` binary.

pub mod checker;
pub mod cli;
pub mod config;
pub mod crypto;
pub mod epistemic;
pub mod kernel;
pub mod model;
pub mod query;
pub mod report;

mod error;

pub use error::Error;
