//! Outcomes of every audit choice at one point of a run.

use super::{board_of, do_mixing, AuditTables, ModelConfig};
use crate::kernel::{Network, NetworkState};
use crate::Error;

/// How many audit choices end in `failed_audit`, out of how many.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AuditOutcome {
    pub failed: usize,
    pub total: usize,
    /// Whether the teller's odd column differs from an honest mix of its
    /// input with the same randomness and permutation. In a group this small
    /// `in[target]^delta` can coincide with the honest term it overwrites.
    pub substituted: bool,
}

/// Whether `state` is a point where the auditor is about to pick the
/// challenge and left/right sides for mix teller `teller`.
pub fn is_audit_point(net: &Network, state: &NetworkState, teller: usize) -> Result<bool, Error> {
    let auditor = net.find_instance("Auditor", None).expect("model has an auditor");
    let at = net.location_name(auditor, state.locations[auditor] as usize) == "auditing_mixes";
    Ok(
        at && net.value_of(state, "Auditor(0).mix_i")? == teller as i64
            && net.value_of(state, "mixes")? > teller as i64,
    )
}

/// Tries every challenge/side selection the auditor has in `state` and
/// follows the auditor until teller `teller` has passed or failed.
pub fn audit_outcomes(
    net: &Network,
    cfg: &ModelConfig,
    state: &NetworkState,
    teller: usize,
) -> Result<AuditOutcome, Error> {
    if !is_audit_point(net, state, teller)? {
        return Err(Error::Query(format!("not an audit point for MixTeller({teller})")));
    }
    let auditor = net.find_instance("Auditor", None).expect("model has an auditor");
    let mixer = net
        .find_instance("MixTeller", Some(teller as i64))
        .ok_or_else(|| Error::Query(format!("no MixTeller({teller})")))?;
    let by_auditor = |s: &NetworkState| -> Result<Vec<NetworkState>, Error> {
        Ok(net
            .successors(s)?
            .into_iter()
            .filter(|(l, _)| l.participants.iter().any(|p| p.instance == auditor))
            .map(|(_, n)| n)
            .collect())
    };
    let mut out = AuditOutcome {
        substituted: substituted(net, cfg, state, teller)?,
        ..AuditOutcome::default()
    };
    for chosen in by_auditor(state)? {
        if net.location_name(auditor, chosen.locations[auditor] as usize) != "auditing_mix_i" {
            continue;
        }
        out.total += 1;
        let mut s = chosen;
        loop {
            match net.location_name(mixer, s.locations[mixer] as usize) {
                "failed_audit" => {
                    out.failed += 1;
                    break;
                }
                "passed_audit" => break,
                _ => {}
            }
            let next = by_auditor(&s)?;
            let [n] = <[NetworkState; 1]>::try_from(next)
                .map_err(|v| Error::Query(format!("audit step has {} continuations", v.len())))?;
            s = n;
        }
    }
    Ok(out)
}

fn substituted(net: &Network, cfg: &ModelConfig, state: &NetworkState, teller: usize) -> Result<bool, Error> {
    let local = |name: String| net.value_of(state, &format!("MixTeller({teller}).{name}"));
    let rands = (0..cfg.v_total)
        .map(|k| local(format!("vec_r[0][{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let tables = AuditTables::new(cfg.v_total, cfg.c_total, cfg.audit_subsets());
    let perm = &tables.perms[local("perm_i[0]".into())? as usize];
    let board = board_of(net, cfg, state);
    let mut honest = board.clone();
    let col = cfg.mix_col(teller, 0);
    do_mixing(&cfg.group, &mut honest, col - 1, col, &rands, perm)?;
    Ok(honest.column(col) != board.column(col))
}
