use super::board::AuditTables;
use super::config::ModelConfig;
use crate::kernel::{Edge, LocationKind, LocationKind::*, ModelError, ProcessTemplate, VariableDecl};

/// Kind of a location that is committed only under `atomic_pipeline`.
fn pipeline(cfg: &ModelConfig) -> LocationKind {
    if cfg.atomic_pipeline {
        Committed
    } else {
        Normal
    }
}

pub(super) fn voter(cfg: &ModelConfig) -> Result<ProcessTemplate, ModelError> {
    let (p, c) = (cfg.group.p, cfg.c_total as i64);
    let mut t = ProcessTemplate::new("Voter");
    t.parameter("id")
        .local(VariableDecl::boolean("coerced"))
        .local(VariableDecl::scalar("chosen", 0, c - 1, 0))
        .local(VariableDecl::scalar("rc_y1", 0, p - 1, 0))
        .local(VariableDecl::scalar("rc_y2", 0, p - 1, 0))
        .local(VariableDecl::scalar("rc_r", 0, c - 1, 0))
        .local(VariableDecl::boolean("posted"));
    let idle = t.location("idle", Initial);
    let has_ballot = t.location("has_ballot", Normal);
    let marked = t.location("marked_choice", Normal);
    let received = t.location("received_receipt", Normal);
    let verification = t.location("verification", Committed);
    let passed = t.location("passed", Normal);
    let failed = t.location("failed", Normal);
    let end = t.location("end", Normal);
    let punished = t.location("punished", Normal);
    let not_punished = t.location("not_punished", Normal);

    t.add_edge(
        Edge::new(idle, idle)
            .guard("!coerced")
            .recv("interact[id]")
            .update("coerced = 1"),
    )?;
    t.add_edge(Edge::new(idle, has_ballot).recv("v_phase"))?;
    t.add_edge(
        Edge::new(has_ballot, marked)
            .select("X", 0, c - 1)
            .update("chosen = X, rc_y1 = ballot[id][0], rc_y2 = ballot[id][1], rc_r = c_index(X)"),
    )?;
    t.add_edge(
        Edge::new(marked, received)
            .send("record")
            .update("recorded_y1 = rc_y1, recorded_y2 = rc_y2, recorded_r = rc_r"),
    )?;
    t.add_edge(
        Edge::new(received, received)
            .guard("coerced")
            .send("show[id]")
            .update("shown_y1 = rc_y1, shown_y2 = rc_y2, shown_r = rc_r"),
    )?;
    t.add_edge(Edge::new(received, received).recv("p_phase").update("posted = 1"))?;
    t.add_edge(Edge::new(received, verification).guard("posted").update("posted = 0"))?;
    t.add_edge(Edge::new(verification, passed).guard("verify()"))?;
    t.add_edge(Edge::new(verification, failed).guard("!verify()"))?;
    // the receipt is dead once the voter is done with it
    for from in [received, passed, failed] {
        t.add_edge(Edge::new(from, end).update("rc_y1 = 0, rc_y2 = 0, rc_r = 0, posted = 0"))?;
    }
    t.add_edge(Edge::new(end, punished).guard("coerced").recv("punish[id]"))?;
    t.add_edge(Edge::new(end, not_punished).guard("coerced").recv("not_punish[id]"))?;
    Ok(t)
}

pub(super) fn coercer(cfg: &ModelConfig) -> Result<ProcessTemplate, ModelError> {
    let (v, p, c) = (cfg.v_total, cfg.group.p, cfg.c_total as i64);
    let mut t = ProcessTemplate::new("Coercer");
    t.local(VariableDecl::array("coercion", &[v], 0, 1, 0))
        .local(VariableDecl::array("seen", &[v], 0, 1, 0))
        .local(VariableDecl::array("seen_y1", &[v], 0, p - 1, 0))
        .local(VariableDecl::array("seen_y2", &[v], 0, p - 1, 0))
        .local(VariableDecl::array("seen_r", &[v], 0, c - 1, 0));
    let l = t.location("loop", Initial);
    let vmax = v as i64 - 1;
    t.add_edge(
        Edge::new(l, l)
            .select("v", 0, vmax)
            .guard("!coercion[v] && coercible(v)")
            .send("interact[v]")
            .update("coercion[v] = 1"),
    )?;
    t.add_edge(
        Edge::new(l, l)
            .select("v", 0, vmax)
            .guard("!seen[v]")
            .recv("show[v]")
            .update(
                "seen[v] = 1, seen_y1[v] = shown_y1, seen_y2[v] = shown_y2, seen_r[v] = shown_r, \
                 shown_y1 = 0, shown_y2 = 0, shown_r = 0",
            ),
    )?;
    t.add_edge(
        Edge::new(l, l)
            .select("v", 0, vmax)
            .guard("coercion[v]")
            .send("punish[v]")
            .update("coercion[v] = 0"),
    )?;
    t.add_edge(
        Edge::new(l, l)
            .select("v", 0, vmax)
            .guard("coercion[v]")
            .send("not_punish[v]")
            .update("coercion[v] = 0"),
    )?;
    Ok(t)
}

pub(super) fn mix_teller(cfg: &ModelConfig, tables: &AuditTables) -> Result<ProcessTemplate, ModelError> {
    let v = cfg.v_total;
    let nrand = cfg.rand_values.len() as i64;
    let nperm = tables.perms.len() as i64;
    let mut t = ProcessTemplate::new("MixTeller");
    t.parameter("id")
        .parameter("corrupt")
        .local(VariableDecl::scalar("rand_ptr", 0, v as i64, 0))
        .local(VariableDecl::array("vec_r", &[2, v], 0, cfg.group.ord - 1, 0))
        .local(VariableDecl::array("perm_i", &[2], 0, nperm - 1, 0));
    let idle = t.location("idle", Initial);
    let wait = t.location("wait", pipeline(cfg));
    let odd = t.location("odd", Committed);
    let even = t.location("even", Committed);
    let mixed = t.location("mixed", Normal);
    let revealed = t.location("revealed", Normal);
    let passed = t.location("passed_audit", Normal);
    let failed = t.location("failed_audit", Normal);

    t.add_edge(Edge::new(idle, wait).recv("m_phase"))?;
    t.add_edge(Edge::new(wait, odd).guard("mixes == id").update("rand_ptr = 0"))?;
    t.add_edge(
        Edge::new(odd, odd)
            .select("i", 0, nrand - 1)
            .guard("rand_ptr < v_total")
            .update("vec_r[0][rand_ptr] = rv(i), rand_ptr++"),
    )?;
    t.add_edge(
        Edge::new(odd, even)
            .select("p", 0, nperm - 1)
            .guard("rand_ptr == v_total && !corrupt")
            .update("perm_i[0] = p, do_mixing(0), rand_ptr = 0"),
    )?;
    t.add_edge(
        Edge::new(odd, even)
            .select("p", 0, nperm - 1)
            .select("d", cfg.delta_range.0, cfg.delta_range.1 - 1)
            .guard("rand_ptr == v_total && corrupt")
            .update("perm_i[0] = p, corrupted_mixing(d), rand_ptr = 0"),
    )?;
    t.add_edge(
        Edge::new(even, even)
            .select("i", 0, nrand - 1)
            .guard("rand_ptr < v_total")
            .update("vec_r[1][rand_ptr] = rv(i), rand_ptr++"),
    )?;
    t.add_edge(
        Edge::new(even, mixed)
            .select("p", 0, nperm - 1)
            .guard("rand_ptr == v_total")
            .update("perm_i[1] = p, do_mixing(1), rand_ptr = 0, mixes++"),
    )?;
    t.add_edge(Edge::new(mixed, revealed).recv("reveal[id]").update("do_rev()"))?;
    let forget: String = (0..v)
        .map(|k| format!("vec_r[0][{k}] = 0, vec_r[1][{k}] = 0, "))
        .chain(["perm_i[0] = 0, perm_i[1] = 0".to_string()])
        .collect();
    t.add_edge(Edge::new(revealed, passed).recv("audit_pass").update(&forget))?;
    t.add_edge(Edge::new(revealed, failed).recv("audit_fail").update(&forget))?;
    Ok(t)
}

pub(super) fn dec_teller(cfg: &ModelConfig) -> Result<ProcessTemplate, ModelError> {
    let mut t = ProcessTemplate::new("DecTeller");
    t.parameter("id");
    let idle = t.location("idle", Initial);
    let wait = t.location("wait", pipeline(cfg));
    let refused = t.location("refused", Normal);
    let cooperating = t.location("cooperating", pipeline(cfg));
    let halt = t.location("halt", Normal);
    t.add_edge(Edge::new(idle, wait).recv("d_phase"))?;
    t.add_edge(Edge::new(wait, refused).guard("dt_curr >= dt_min"))?;
    t.add_edge(
        Edge::new(wait, cooperating)
            .guard("dt_curr < dt_min")
            .update("dt_participants[id] = 1, dt_curr++"),
    )?;
    t.add_edge(
        Edge::new(cooperating, halt)
            .guard("dt_curr == dt_min && decryptions == my_rank()")
            .update("my_decr(), decryptions++"),
    )?;
    Ok(t)
}

pub(super) fn auditor(cfg: &ModelConfig, tables: &AuditTables) -> Result<ProcessTemplate, ModelError> {
    let mt = cfg.mt_total as i64;
    let nch = tables.audit_ch.len() as i64;
    let nlr = tables.audit_lr.len() as i64;
    let mut t = ProcessTemplate::new("Auditor");
    t.local(VariableDecl::scalar("mix_i", 0, mt, 0))
        .local(VariableDecl::scalar("ch_i", 0, nch - 1, 0))
        .local(VariableDecl::scalar("lr_i", 0, nlr - 1, 0));
    let idle = t.location("idle", Initial);
    let mixes = t.location("auditing_mixes", pipeline(cfg));
    let mix_i = t.location("auditing_mix_i", Committed);
    let checking = t.location("checking", Committed);
    let end = t.location("end", Normal);
    t.add_edge(Edge::new(idle, mixes).recv("m_phase").update("mix_i = 0"))?;
    t.add_edge(
        Edge::new(mixes, mix_i)
            .select("ch", 0, nch - 1)
            .select("lr", 0, nlr - 1)
            .guard("mix_i < mt_total && mixes > mix_i")
            .update("ch_i = ch, lr_i = lr"),
    )?;
    t.add_edge(
        Edge::new(mix_i, checking)
            .send("reveal[mix_i]")
            .update("ch_j = ch_i, lr_j = lr_i"),
    )?;
    let clear = "mix_i++, ch_i = 0, lr_i = 0, ch_j = 0, lr_j = 0";
    let clear_rev: String = (0..cfg.v_total)
        .map(|k| format!(", rev_p[{k}] = 0, rev_r[{k}] = 0"))
        .collect();
    t.add_edge(
        Edge::new(checking, mixes)
            .guard("check_mix()")
            .send("audit_pass")
            .update(&format!("{clear}{clear_rev}")),
    )?;
    t.add_edge(
        Edge::new(checking, mixes)
            .guard("!check_mix()")
            .send("audit_fail")
            .update(&format!("{clear}{clear_rev}")),
    )?;
    t.add_edge(Edge::new(mixes, end).guard("mix_i == mt_total"))?;
    Ok(t)
}

pub(super) fn sys(cfg: &ModelConfig) -> Result<ProcessTemplate, ModelError> {
    let v = cfg.v_total;
    let nrand = cfg.rand_values.len() as i64;
    let mut t = ProcessTemplate::new("Sys");
    t.local(VariableDecl::scalar("r_ptr", 0, v as i64, 0))
        .local(VariableDecl::array("r_vec", &[v], 0, cfg.group.ord - 1, 0));
    let idle = t.location("idle", Initial);
    let generating = t.location("generating_ballots", Committed);
    let ready = t.location("ballots_ready", Normal);
    let voting = t.location("voting", Normal);
    let intake = t.location("intake", Committed);
    let posted = t.location("receipts_posted", pipeline(cfg));
    let mixing = t.location("mixing", pipeline(cfg));
    let decryption = t.location("decryption", pipeline(cfg));
    let results = t.location("results", Normal);
    let clear_r: String = (0..v).map(|k| format!(", r_vec[{k}] = 0")).collect();
    let clear_dt: String = (0..cfg.dt_total)
        .map(|k| format!(", dt_participants[{k}] = 0"))
        .collect();

    t.add_edge(Edge::new(idle, generating).update("r_ptr = 0"))?;
    t.add_edge(
        Edge::new(generating, generating)
            .select("i", 0, nrand - 1)
            .guard("r_ptr < v_total")
            .update("r_vec[r_ptr] = rv(i), r_ptr++"),
    )?;
    t.add_edge(
        Edge::new(generating, ready)
            .guard("r_ptr == v_total")
            .update(&format!("generate_ballots(), r_ptr = 0{clear_r}")),
    )?;
    t.add_edge(Edge::new(ready, voting).send("v_phase"))?;
    t.add_edge(Edge::new(voting, intake).recv("record"))?;
    t.add_edge(
        Edge::new(intake, voting).update("absorb_i(), voted++, recorded_y1 = 0, recorded_y2 = 0, recorded_r = 0"),
    )?;
    t.add_edge(Edge::new(voting, posted).guard("voted == v_total").send("p_phase"))?;
    t.add_edge(Edge::new(posted, mixing).send("m_phase"))?;
    t.add_edge(Edge::new(mixing, decryption).guard("mixes == mt_total").send("d_phase"))?;
    t.add_edge(
        Edge::new(decryption, results)
            .guard("decryptions == dt_min")
            .update(&format!("post_results(){clear_dt}")),
    )?;
    Ok(t)
}
