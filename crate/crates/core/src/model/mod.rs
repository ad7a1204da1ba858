//! The election network: six templates over a shared bulletin board.
//!
//! Instances are created in the order voters, coercer, mix tellers,
//! decryption tellers, auditor, system, so atoms read `Voter(0).idle`,
//! `MixTeller(0).failed_audit`, `Sys.results` and so on.

mod audit;
mod board;
mod config;
mod procs;
mod templates;

use std::sync::Arc;

pub use audit::{audit_outcomes, is_audit_point, AuditOutcome};
pub use board::{
    c_index, check_mix, corrupted_do_mixing, default_victim, do_mixing, do_rev, generate_ballots, post_results,
    verify_receipt, AuditTables, Board, Revealed,
};
pub use config::{ConfigError, ModelConfig, MAX_VOTERS};

use crate::kernel::{Channel, Network, NetworkBuilder, NetworkState, VariableDecl};

/// Builds the full network for `config`.
pub fn build_network(config: &ModelConfig) -> Result<Network, crate::Error> {
    config.validate().map_err(|e| crate::Error::Config(e.to_string()))?;
    let cfg = Arc::new(config.clone());
    let tables = Arc::new(AuditTables::new(cfg.v_total, cfg.c_total, cfg.audit_subsets()));
    let (v, c, p) = (cfg.v_total as i64, cfg.c_total as i64, cfg.group.p);
    let mut b = NetworkBuilder::new();

    b.global(VariableDecl::array("ballot", &[cfg.v_total, 2], 0, p - 1, 0))
        .global(VariableDecl::array("board", &[cfg.v_total, cfg.cols(), 2], 0, p - 1, 0))
        .global(VariableDecl::scalar("recorded_y1", 0, p - 1, 0))
        .global(VariableDecl::scalar("recorded_y2", 0, p - 1, 0))
        .global(VariableDecl::scalar("recorded_r", 0, c - 1, 0))
        .global(VariableDecl::scalar("shown_y1", 0, p - 1, 0))
        .global(VariableDecl::scalar("shown_y2", 0, p - 1, 0))
        .global(VariableDecl::scalar("shown_r", 0, c - 1, 0))
        .global(VariableDecl::scalar("voted", 0, v, 0))
        .global(VariableDecl::scalar("mixes", 0, cfg.mt_total as i64, 0))
        .global(VariableDecl::scalar("dt_curr", 0, cfg.dt_total as i64, 0))
        .global(VariableDecl::scalar("decryptions", 0, cfg.dt_min as i64, 0))
        .global(VariableDecl::array("dt_participants", &[cfg.dt_total], 0, 1, 0))
        .global(VariableDecl::scalar("ch_j", 0, tables.audit_ch.len() as i64 - 1, 0))
        .global(VariableDecl::scalar("lr_j", 0, (1i64 << v) - 1, 0))
        .global(VariableDecl::array("rev_p", &[cfg.v_total], 0, v - 1, 0))
        .global(VariableDecl::array("rev_r", &[cfg.v_total], 0, cfg.group.ord - 1, 0))
        .global(VariableDecl::array("vote_sum", &[cfg.c_total], 0, v, 0));

    b.constant("c_total", c)
        .constant("v_total", v)
        .constant("mt_total", cfg.mt_total as i64)
        .constant("dt_total", cfg.dt_total as i64)
        .constant("dt_min", cfg.dt_min as i64);

    b.channel(Channel::binary("record"))
        .channel(Channel::binary_array("reveal", cfg.mt_total))
        .channel(Channel::binary("audit_pass"))
        .channel(Channel::binary("audit_fail"))
        .channel(Channel::binary_array("interact", cfg.v_total))
        .channel(Channel::binary_array("show", cfg.v_total))
        .channel(Channel::binary_array("punish", cfg.v_total))
        .channel(Channel::binary_array("not_punish", cfg.v_total))
        .channel(Channel::broadcast("v_phase"))
        .channel(Channel::broadcast("p_phase"))
        .channel(Channel::broadcast("m_phase"))
        .channel(Channel::broadcast("d_phase"));

    procs::register(&mut b, &cfg, &tables);

    let voter = b.template(templates::voter(&cfg)?);
    let coercer = b.template(templates::coercer(&cfg)?);
    let mteller = b.template(templates::mix_teller(&cfg, &tables)?);
    let dteller = b.template(templates::dec_teller(&cfg)?);
    let auditor = b.template(templates::auditor(&cfg, &tables)?);
    let sys = b.template(templates::sys(&cfg)?);
    for i in 0..v {
        b.instantiate(voter, &[i]);
    }
    b.instantiate(coercer, &[]);
    for i in 0..cfg.mt_total {
        b.instantiate(mteller, &[i as i64, cfg.corrupt_mtellers.contains(&i) as i64]);
    }
    for i in 0..cfg.dt_total as i64 {
        b.instantiate(dteller, &[i]);
    }
    b.instantiate(auditor, &[]);
    b.instantiate(sys, &[]);
    Ok(b.build()?)
}

/// Reads the bulletin board out of a state of a network built by [`build_network`].
pub fn board_of(net: &Network, config: &ModelConfig, state: &NetworkState) -> Board {
    let info = net.lookup_var(None, "board").expect("model network declares board");
    let mut board = Board::new(config.v_total, config.cols());
    for r in 0..config.v_total {
        for col in 0..config.cols() {
            let at = info.base + (r * config.cols() + col) * 2;
            board.set(
                r,
                col,
                crate::crypto::Ciphertext::new(state.values[at] as i64, state.values[at + 1] as i64),
            );
        }
    }
    board
}

#[cfg(test)]
mod tests;
