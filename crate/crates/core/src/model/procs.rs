//! Procedures callable from template guards and updates.

use std::sync::Arc;

use super::board::{self, AuditTables, Board};
use super::config::ModelConfig;
use crate::crypto::{self, candidate_list, Ciphertext, Receipt};
use crate::kernel::{EvalError, Frame, NetworkBuilder};

fn load_board(f: &Frame<'_>, cfg: &ModelConfig) -> Result<Board, EvalError> {
    let h = f.var("board")?;
    let mut b = Board::new(cfg.v_total, cfg.cols());
    for r in 0..cfg.v_total {
        for c in 0..cfg.cols() {
            let at = (r * cfg.cols() + c) * 2;
            b.set(r, c, Ciphertext::new(f.get(h, at)?, f.get(h, at + 1)?));
        }
    }
    Ok(b)
}

fn store_column(f: &mut Frame<'_>, cfg: &ModelConfig, board: &Board, col: usize) -> Result<(), EvalError> {
    let h = f.var("board")?;
    for r in 0..cfg.v_total {
        let at = (r * cfg.cols() + col) * 2;
        let c = board.get(r, col);
        f.set(h, at, c.y1)?;
        f.set(h, at + 1, c.y2)?;
    }
    Ok(())
}

fn read_vec(f: &Frame<'_>, name: &str, from: usize, len: usize) -> Result<Vec<i64>, EvalError> {
    let h = f.var(name)?;
    (from..from + len).map(|k| f.get(h, k)).collect()
}

fn index(f: &Frame<'_>, v: i64, len: usize, what: &str) -> Result<usize, EvalError> {
    usize::try_from(v)
        .ok()
        .filter(|&i| i < len)
        .ok_or_else(|| f.fail(format!("{what} {v} out of range")))
}

macro_rules! crypto {
    ($f:expr, $e:expr) => {
        $e.map_err(|e: crypto::CryptoError| $f.fail(e.to_string()))?
    };
}

pub(super) fn register(b: &mut NetworkBuilder, cfg: &Arc<ModelConfig>, tables: &Arc<AuditTables>) {
    let c = cfg.clone();
    b.procedure("rv", move |f, a| {
        let i = index(f, a[0], c.rand_values.len(), "randomness index")?;
        Ok(c.rand_values[i])
    });

    let c = cfg.clone();
    b.procedure("coercible", move |f, a| {
        let i = index(f, a[0], c.v_total, "voter")?;
        Ok(c.coercible(i) as i64)
    });

    let c = cfg.clone();
    b.procedure("c_index", move |f, a| {
        let id = f.param("id")? as usize;
        let target = index(f, a[0], c.c_total, "candidate")?;
        Ok(candidate_list(id, c.c_total)
            .iter()
            .position(|&x| x == target)
            .expect("shift") as i64)
    });

    let c = cfg.clone();
    b.procedure("verify", move |f, _| {
        let board = load_board(f, &c)?;
        let onion = Ciphertext::new(f.get(f.var("rc_y1")?, 0)?, f.get(f.var("rc_y2")?, 0)?);
        let marked = f.get(f.var("rc_r")?, 0)? as usize;
        Ok(board::verify_receipt(&c.group, &board, &Receipt { onion, marked }) as i64)
    });

    let c = cfg.clone();
    b.procedure("generate_ballots", move |f, _| {
        let r_vec = read_vec(f, "r_vec", 0, c.v_total)?;
        let ballots = crypto!(f, board::generate_ballots(&c.group, &r_vec, c.c_total));
        let h = f.var("ballot")?;
        for (i, bl) in ballots.iter().enumerate() {
            f.set(h, 2 * i, bl.onion.y1)?;
            f.set(h, 2 * i + 1, bl.onion.y2)?;
        }
        Ok(0)
    });

    let c = cfg.clone();
    b.procedure("absorb_i", move |f, _| {
        let onion = Ciphertext::new(f.get(f.var("recorded_y1")?, 0)?, f.get(f.var("recorded_y2")?, 0)?);
        let r = f.get(f.var("recorded_r")?, 0)?;
        let row = index(f, f.get(f.var("voted")?, 0)?, c.v_total, "board row")?;
        let out = crypto!(f, c.group.absorb_index(onion, r));
        let h = f.var("board")?;
        f.set(h, row * c.cols() * 2, out.y1)?;
        f.set(h, row * c.cols() * 2 + 1, out.y2)?;
        Ok(0)
    });

    let (c, t) = (cfg.clone(), tables.clone());
    b.procedure("do_mixing", move |f, a| {
        let mi = index(f, a[0], 2, "mix")?;
        let id = f.param("id")? as usize;
        let rands = read_vec(f, "vec_r", mi * c.v_total, c.v_total)?;
        let p = index(f, f.get(f.var("perm_i")?, mi)?, t.perms.len(), "permutation")?;
        let mut board = load_board(f, &c)?;
        let out = c.mix_col(id, mi);
        crypto!(
            f,
            board::do_mixing(&c.group, &mut board, out - 1, out, &rands, &t.perms[p])
        );
        store_column(f, &c, &board, out)?;
        Ok(0)
    });

    let (c, t) = (cfg.clone(), tables.clone());
    b.procedure("corrupted_mixing", move |f, a| {
        let delta = a[0];
        let id = f.param("id")? as usize;
        let rands = read_vec(f, "vec_r", 0, c.v_total)?;
        let p = index(f, f.get(f.var("perm_i")?, 0)?, t.perms.len(), "permutation")?;
        let perm = &t.perms[p];
        let mut board = load_board(f, &c)?;
        let out = c.mix_col(id, 0);
        let victim = board::default_victim(perm, 0);
        crypto!(
            f,
            board::corrupted_do_mixing(&c.group, &mut board, out - 1, out, &rands, perm, 0, victim, delta)
        );
        store_column(f, &c, &board, out)?;
        Ok(0)
    });

    let (c, t) = (cfg.clone(), tables.clone());
    b.procedure("do_rev", move |f, _| {
        let ch = t.audit_ch[index(f, f.get(f.var("ch_j")?, 0)?, t.audit_ch.len(), "audit subset")?];
        let lr = f.get(f.var("lr_j")?, 0)? as u32;
        let r_odd = read_vec(f, "vec_r", 0, c.v_total)?;
        let r_even = read_vec(f, "vec_r", c.v_total, c.v_total)?;
        let pi = f.var("perm_i")?;
        let po = index(f, f.get(pi, 0)?, t.perms.len(), "permutation")?;
        let pe = index(f, f.get(pi, 1)?, t.perms.len(), "permutation")?;
        let rev = board::do_rev(&t.perms[po], &t.perms[pe], &r_odd, &r_even, ch, lr);
        let (hp, hr) = (f.var("rev_p")?, f.var("rev_r")?);
        for (k, link) in rev.links.iter().enumerate() {
            let (j, r) = link.unwrap_or((0, 0));
            f.set(hp, k, j as i64)?;
            f.set(hr, k, r)?;
        }
        Ok(0)
    });

    let (c, t) = (cfg.clone(), tables.clone());
    b.procedure("check_mix", move |f, _| {
        let mix = index(f, f.get(f.var("mix_i")?, 0)?, c.mt_total, "mix teller")?;
        let ch = t.audit_ch[index(f, f.get(f.var("ch_i")?, 0)?, t.audit_ch.len(), "audit subset")?];
        let lr = f.get(f.var("lr_i")?, 0)? as u32;
        let rev_p = read_vec(f, "rev_p", 0, c.v_total)?;
        let rev_r = read_vec(f, "rev_r", 0, c.v_total)?;
        let links = (0..c.v_total)
            .map(|k| (ch >> k & 1 == 1).then_some((rev_p[k] as usize, rev_r[k])))
            .collect();
        let board = load_board(f, &c)?;
        Ok(board::check_mix(&c.group, &board, c.mix_col(mix, 0), &board::Revealed { links }, lr) as i64)
    });

    b.procedure("my_rank", move |f, _| {
        let id = f.param("id")? as usize;
        read_vec(f, "dt_participants", 0, id).map(|v| v.iter().sum())
    });

    let c = cfg.clone();
    b.procedure("my_decr", move |f, _| {
        let id = f.param("id")?;
        let parts = read_vec(f, "dt_participants", 0, c.dt_total)?;
        let xs: Vec<i64> = (0..c.dt_total as i64)
            .filter(|&j| parts[j as usize] == 1)
            .map(|j| j + 1)
            .collect();
        if xs.len() != 2 || !xs.contains(&(id + 1)) {
            return Err(f.fail(format!("participants {xs:?} do not form a pair containing teller {id}")));
        }
        let rank = xs.iter().position(|&x| x == id + 1).expect("checked");
        let shares = crypto!(f, crypto::shamir_shares(c.group.secret_key(), c.a1, c.dt_total));
        let e = crypto!(f, crypto::lagrange_exponent(&shares, [xs[0], xs[1]], id + 1));
        let out = 1 + 2 * c.mt_total + rank;
        let mut board = load_board(f, &c)?;
        for r in 0..c.v_total {
            let d = crypto!(f, c.group.partial_decrypt_step(board.get(r, out - 1), e));
            board.set(r, out, d);
        }
        store_column(f, &c, &board, out)?;
        Ok(0)
    });

    let c = cfg.clone();
    b.procedure("post_results", move |f, _| {
        let board = load_board(f, &c)?;
        let sum = crypto!(f, board::post_results(&c.group, &board, c.c_total));
        let h = f.var("vote_sum")?;
        for (x, n) in sum.iter().enumerate() {
            f.set(h, x, *n)?;
        }
        Ok(0)
    });
}
