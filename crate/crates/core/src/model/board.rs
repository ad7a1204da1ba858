//! Board arithmetic used by the model procedures, as plain functions.

use itertools::Itertools;

use crate::crypto::{candidate_list, Ballot, Ciphertext, CryptoError, GroupParams, Receipt};

/// The bulletin board: `rows` terms by `cols` columns of ciphertexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    rows: usize,
    cols: usize,
    cells: Vec<Ciphertext>,
}

impl Board {
    pub fn new(rows: usize, cols: usize) -> Self {
        Board {
            rows,
            cols,
            cells: vec![Ciphertext::EMPTY; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Ciphertext {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, c: Ciphertext) {
        self.cells[row * self.cols + col] = c;
    }

    pub fn column(&self, col: usize) -> Vec<Ciphertext> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn set_column(&mut self, col: usize, terms: &[Ciphertext]) {
        for (r, &c) in terms.iter().enumerate() {
            self.set(r, col, c);
        }
    }
}

/// Permutations, candidate shifts and audit encodings derived from the sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditTables {
    /// All permutations of the batch, lexicographic; `perm[t]` is where term `t` goes.
    pub perms: Vec<Vec<usize>>,
    pub shifts: Vec<Vec<usize>>,
    pub audit_ch: Vec<u32>,
    /// Side assignments; bit `t` set means term `t` reveals its right link.
    pub audit_lr: Vec<u32>,
}

impl AuditTables {
    pub fn new(v_total: usize, c_total: usize, audit_ch: Vec<u32>) -> Self {
        AuditTables {
            perms: (0..v_total).permutations(v_total).collect(),
            shifts: (0..c_total).map(|s| candidate_list(s, c_total)).collect(),
            audit_ch,
            audit_lr: (0..1u32 << v_total).collect(),
        }
    }
}

/// Ballot `i` encrypts seed `alpha^i` with randomness `r_vec[i]`.
pub fn generate_ballots(g: &GroupParams, r_vec: &[i64], c_total: usize) -> Result<Vec<Ballot>, CryptoError> {
    r_vec
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            Ok(Ballot {
                onion: g.encr(g.zpow(g.alpha, i as i64)?, r)?,
                candidates: candidate_list(i, c_total),
            })
        })
        .collect()
}

pub fn c_index(ballot: &Ballot, target: usize) -> usize {
    ballot.index_of(target).expect("candidate list is a permutation")
}

/// Whether the receipt, with its index absorbed, appears in column 0.
pub fn verify_receipt(g: &GroupParams, board: &Board, receipt: &Receipt) -> bool {
    match g.absorb_index(receipt.onion, receipt.marked as i64) {
        Ok(c) => board.column(0).contains(&c),
        Err(_) => false,
    }
}

/// `out[perm[t]] = reencrypt(in[t], rands[t])`.
pub fn do_mixing(
    g: &GroupParams,
    board: &mut Board,
    in_col: usize,
    out_col: usize,
    rands: &[i64],
    perm: &[usize],
) -> Result<(), CryptoError> {
    for t in 0..board.rows() {
        let c = g.reencrypt(board.get(t, in_col), rands[t])?;
        board.set(perm[t], out_col, c);
    }
    Ok(())
}

/// Output slot overwritten by the attack: the last index other than `perm[target]`.
/// A single-term batch has no other slot, so the target's own output is used.
pub fn default_victim(perm: &[usize], target: usize) -> usize {
    (0..perm.len())
        .rev()
        .find(|&j| j != perm[target])
        .unwrap_or(perm[target])
}

/// Honest mix, then `out[victim] = in[target]^delta` componentwise.
#[allow(clippy::too_many_arguments)]
pub fn corrupted_do_mixing(
    g: &GroupParams,
    board: &mut Board,
    in_col: usize,
    out_col: usize,
    rands: &[i64],
    perm: &[usize],
    target: usize,
    victim: usize,
    delta: i64,
) -> Result<(), CryptoError> {
    do_mixing(g, board, in_col, out_col, rands, perm)?;
    let c = g.power(board.get(target, in_col), delta)?;
    board.set(victim, out_col, c);
    Ok(())
}

/// One revealed link per odd-mix output term; `None` for unaudited terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revealed {
    /// `(linked index, randomness)`: the input index on the left, the even-mix
    /// output index on the right.
    pub links: Vec<Option<(usize, i64)>>,
}

pub fn do_rev(perm_odd: &[usize], perm_even: &[usize], r_odd: &[i64], r_even: &[i64], ch: u32, lr: u32) -> Revealed {
    let links = (0..perm_odd.len())
        .map(|t| {
            if ch >> t & 1 == 0 {
                None
            } else if lr >> t & 1 == 0 {
                let src = perm_odd.iter().position(|&p| p == t).expect("bijection");
                Some((src, r_odd[src]))
            } else {
                Some((perm_even[t], r_even[t]))
            }
        })
        .collect();
    Revealed { links }
}

/// Checks every revealed link of the teller whose odd mix is in `odd_col`.
pub fn check_mix(g: &GroupParams, board: &Board, odd_col: usize, revealed: &Revealed, lr: u32) -> bool {
    revealed.links.iter().enumerate().all(|(t, link)| match link {
        None => true,
        Some((j, r)) => {
            let (from, to) = if lr >> t & 1 == 0 {
                (board.get(*j, odd_col - 1), board.get(t, odd_col))
            } else {
                (board.get(t, odd_col), board.get(*j, odd_col + 1))
            };
            g.reencrypt(from, *r).map(|c| c == to).unwrap_or(false)
        }
    })
}

/// Tally of the fully decrypted last column.
pub fn post_results(g: &GroupParams, board: &Board, c_total: usize) -> Result<Vec<i64>, CryptoError> {
    let mut sum = vec![0i64; c_total];
    for c in board.column(board.cols() - 1) {
        if c.is_empty() {
            return Err(CryptoError::BadCiphertext(c.y1, c.y2));
        }
        sum[(g.dlog(c.y2)? as usize) % c_total] += 1;
    }
    Ok(sum)
}
