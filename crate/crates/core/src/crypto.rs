//! Desk-scale exponential ElGamal over Z*_p.
//!
//! Messages are group elements `alpha^s`; a ciphertext under public key
//! `beta = alpha^k` with randomness `r` is `(alpha^r, m * beta^r)`. The group is
//! tiny (default p = 7) so that every ciphertext fits a bounded model variable
//! and discrete logarithms are a table lookup.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("{0} is not an element of the group generated by alpha")]
    NotInGroup(i64),
    #[error("invalid group parameters: {0}")]
    BadParams(String),
    #[error("invalid ciphertext ({0}, {1})")]
    BadCiphertext(i64, i64),
    #[error("Lagrange product {num}/{den} is not an integer")]
    NonIntegral { num: i64, den: i64 },
    #[error("invalid share subset: {0}")]
    BadSubset(String),
}

/// Public parameters `(p, alpha, beta)` with derived order and secret exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupParams {
    pub p: i64,
    pub alpha: i64,
    pub beta: i64,
    /// Multiplicative order of `alpha`.
    pub ord: i64,
    #[serde(skip)]
    dlog_table: Vec<Option<i64>>,
}

impl Default for GroupParams {
    fn default() -> Self {
        GroupParams::new(7, 3, 6).expect("default parameters are valid")
    }
}

impl GroupParams {
    pub fn new(p: i64, alpha: i64, beta: i64) -> Result<Self, CryptoError> {
        if !(3..=32_749).contains(&p) {
            return Err(CryptoError::BadParams(format!("modulus {p} out of supported range")));
        }
        if (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(CryptoError::BadParams(format!("modulus {p} is not prime")));
        }
        if !(1..p).contains(&alpha) {
            return Err(CryptoError::BadParams(format!("generator {alpha} outside [1, {p})")));
        }
        let mut table = vec![None; p as usize];
        let (mut x, mut ord) = (1i64, 0i64);
        loop {
            if table[x as usize].is_some() {
                break;
            }
            table[x as usize] = Some(ord);
            x = x * alpha % p;
            ord += 1;
        }
        if ord < 2 {
            return Err(CryptoError::BadParams(format!("generator {alpha} has trivial order")));
        }
        let params = GroupParams {
            p,
            alpha,
            beta,
            ord,
            dlog_table: table,
        };
        if !(1..p).contains(&beta) || params.dlog_table[beta as usize].is_none() {
            return Err(CryptoError::BadParams(format!(
                "beta = {beta} is not a power of alpha = {alpha}"
            )));
        }
        Ok(params)
    }

    /// The private exponent `k` with `alpha^k = beta`.
    pub fn secret_key(&self) -> i64 {
        self.dlog(self.beta).expect("beta checked at construction")
    }

    fn check(&self, a: i64) -> Result<i64, CryptoError> {
        let a = a.rem_euclid(self.p);
        match self.dlog_table[a as usize] {
            Some(_) if a != 0 => Ok(a),
            _ => Err(CryptoError::NotInGroup(a)),
        }
    }

    /// `a^b mod p`, exponent reduced modulo the order of alpha (negatives allowed).
    pub fn zpow(&self, a: i64, b: i64) -> Result<i64, CryptoError> {
        let a = self.check(a)?;
        let mut e = b.rem_euclid(self.ord);
        let (mut base, mut acc) = (a, 1i64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Unique `x` in `[0, ord)` with `alpha^x = e`.
    pub fn dlog(&self, e: i64) -> Result<i64, CryptoError> {
        let a = self.check(e)?;
        Ok(self.dlog_table[a as usize].expect("checked"))
    }

    fn check_ct(&self, c: Ciphertext) -> Result<(), CryptoError> {
        if self.check(c.y1).is_err()
            || self.check(c.y2).is_err()
            || c.y1 >= self.p
            || c.y2 >= self.p
            || c.y1 < 1
            || c.y2 < 1
        {
            return Err(CryptoError::BadCiphertext(c.y1, c.y2));
        }
        Ok(())
    }

    pub fn encr(&self, m: i64, r: i64) -> Result<Ciphertext, CryptoError> {
        let m = self.check(m)?;
        Ok(Ciphertext {
            y1: self.zpow(self.alpha, r)?,
            y2: m * self.zpow(self.beta, r)? % self.p,
        })
    }

    pub fn decr(&self, c: Ciphertext, k: i64) -> Result<i64, CryptoError> {
        self.check_ct(c)?;
        Ok(c.y2 * self.zpow(c.y1, -k)? % self.p)
    }

    /// Multiplies in a fresh encryption of 1; the plaintext is unchanged.
    pub fn reencrypt(&self, c: Ciphertext, r: i64) -> Result<Ciphertext, CryptoError> {
        self.check_ct(c)?;
        Ok(Ciphertext {
            y1: c.y1 * self.zpow(self.alpha, r)? % self.p,
            y2: c.y2 * self.zpow(self.beta, r)? % self.p,
        })
    }

    /// Folds the marked-cell index into the onion: plaintext `m` becomes `m * alpha^i`.
    pub fn absorb_index(&self, c: Ciphertext, i: i64) -> Result<Ciphertext, CryptoError> {
        self.check_ct(c)?;
        Ok(Ciphertext {
            y1: c.y1,
            y2: c.y2 * self.zpow(self.alpha, i)? % self.p,
        })
    }

    /// Strips one share-holder's exponent contribution from `y2`.
    pub fn partial_decrypt_step(&self, c: Ciphertext, contribution: i64) -> Result<Ciphertext, CryptoError> {
        self.check_ct(c)?;
        Ok(Ciphertext {
            y1: c.y1,
            y2: c.y2 * self.zpow(c.y1, -contribution)? % self.p,
        })
    }

    /// Componentwise power `(y1^d, y2^d)`, an encryption of `m^d`.
    pub fn power(&self, c: Ciphertext, d: i64) -> Result<Ciphertext, CryptoError> {
        self.check_ct(c)?;
        Ok(Ciphertext {
            y1: self.zpow(c.y1, d)?,
            y2: self.zpow(c.y2, d)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ciphertext {
    pub y1: i64,
    pub y2: i64,
}

impl Ciphertext {
    /// Marker for an unwritten board cell; not a valid ciphertext.
    pub const EMPTY: Ciphertext = Ciphertext { y1: 0, y2: 0 };

    pub fn new(y1: i64, y2: i64) -> Self {
        Ciphertext { y1, y2 }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::EMPTY
    }
}

/// Onion plus the cyclically shifted candidate list it encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub onion: Ciphertext,
    pub candidates: Vec<usize>,
}

impl Ballot {
    /// Cell index at which `target` appears on the candidate list.
    pub fn index_of(&self, target: usize) -> Option<usize> {
        self.candidates.iter().position(|&c| c == target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    pub onion: Ciphertext,
    pub marked: usize,
}

/// Candidate list for `seed`: `cl[r] = (r + seed) mod c_total`.
///
/// With this orientation the decrypted exponent `seed + r` reduced modulo
/// `c_total` is exactly the candidate printed at cell `r`.
pub fn candidate_list(seed: usize, c_total: usize) -> Vec<usize> {
    (0..c_total).map(|r| (r + seed) % c_total).collect()
}

/// Shamir shares of `k` on the line `a(x) = k + a1 * x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyShares {
    pub k: i64,
    pub a1: i64,
    /// `(x, a(x))` for `x = 1..=n`.
    pub shares: Vec<(i64, i64)>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `lambda_member(subset) * y_member` as an exact fraction `(num, den)`, den > 0, reduced.
fn lagrange_fraction(subset: &[(i64, i64)], member: usize) -> (i64, i64) {
    let (xi, yi) = subset[member];
    let (mut num, mut den) = (yi, 1i64);
    for (j, &(xj, _)) in subset.iter().enumerate() {
        if j != member {
            num *= xj;
            den *= xj - xi;
        }
    }
    if den < 0 {
        num = -num;
        den = -den;
    }
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

/// Shares for `x = 1..=n`; rejects `a1` if some pair of shares would need a
/// fractional Lagrange product.
pub fn shamir_shares(k: i64, a1: i64, n: usize) -> Result<KeyShares, CryptoError> {
    let shares: Vec<(i64, i64)> = (1..=n as i64).map(|x| (x, k + a1 * x)).collect();
    for i in 0..shares.len() {
        for j in i + 1..shares.len() {
            let pair = [shares[i], shares[j]];
            for m in 0..2 {
                let (num, den) = lagrange_fraction(&pair, m);
                if den != 1 {
                    return Err(CryptoError::NonIntegral { num, den });
                }
            }
        }
    }
    Ok(KeyShares { k, a1, shares })
}

/// Integer exponent contribution of `member` when reconstructing with `subset`.
pub fn lagrange_exponent(shares: &KeyShares, subset: [i64; 2], member: i64) -> Result<i64, CryptoError> {
    if subset[0] == subset[1] {
        return Err(CryptoError::BadSubset("subset members must be distinct".into()));
    }
    let pts: Vec<(i64, i64)> = subset
        .iter()
        .map(|x| {
            shares
                .shares
                .iter()
                .find(|s| s.0 == *x)
                .copied()
                .ok_or_else(|| CryptoError::BadSubset(format!("no share with x = {x}")))
        })
        .collect::<Result<_, _>>()?;
    let m = subset
        .iter()
        .position(|&x| x == member)
        .ok_or_else(|| CryptoError::BadSubset(format!("{member} is not in the subset")))?;
    match lagrange_fraction(&pts, m) {
        (num, 1) => Ok(num),
        (num, den) => Err(CryptoError::NonIntegral { num, den }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GroupParams {
        GroupParams::default()
    }

    #[test]
    fn defaults() {
        let g = g();
        assert_eq!((g.p, g.alpha, g.beta, g.ord), (7, 3, 6, 6));
        assert_eq!(g.secret_key(), 3);
    }

    #[test]
    fn zpow_examples() {
        let g = g();
        assert_eq!(g.zpow(3, 0).unwrap(), 1);
        assert_eq!(g.zpow(3, 3).unwrap(), 6);
        assert_eq!(g.zpow(3, -3).unwrap(), 6);
        assert_eq!(g.zpow(0, 2), Err(CryptoError::NotInGroup(0)));
        assert_eq!(g.zpow(14, 2), Err(CryptoError::NotInGroup(0)));
    }

    #[test]
    fn encr_decr_examples() {
        let g = g();
        for m in 1..7 {
            assert_eq!(g.encr(m, 0).unwrap(), Ciphertext::new(1, m));
            assert_eq!(g.decr(Ciphertext::new(1, m), 3).unwrap(), m);
        }
        assert_eq!(g.encr(1, 1).unwrap(), Ciphertext::new(3, 6));
        assert_eq!(g.encr(2, 2).unwrap(), Ciphertext::new(2, 2));
        assert_eq!(g.decr(g.encr(1, 1).unwrap(), 3).unwrap(), 1);
        assert_eq!(g.decr(g.encr(4, 5).unwrap(), 3).unwrap(), 4);
        assert!(g.encr(0, 1).is_err());
        assert!(g.decr(Ciphertext::EMPTY, 3).is_err());
    }

    #[test]
    fn reencrypt_examples() {
        let g = g();
        let c = g.encr(1, 1).unwrap();
        assert_eq!(g.reencrypt(c, 0).unwrap(), c);
        assert_eq!(g.reencrypt(c, 1).unwrap(), Ciphertext::new(2, 1));
        assert_eq!(g.reencrypt(c, 1).unwrap(), g.encr(1, 2).unwrap());
        assert_eq!(g.decr(g.reencrypt(g.encr(2, 2).unwrap(), 5).unwrap(), 3).unwrap(), 2);
    }

    #[test]
    fn absorb_examples() {
        let g = g();
        let c = g.encr(1, 1).unwrap();
        assert_eq!(g.absorb_index(c, 0).unwrap(), c);
        assert_eq!(g.absorb_index(c, 2).unwrap(), Ciphertext::new(3, 5));
        let c = g.encr(g.zpow(3, 1).unwrap(), 0).unwrap();
        assert_eq!(g.decr(g.absorb_index(c, 2).unwrap(), 3).unwrap(), 6);
    }

    #[test]
    fn dlog_examples() {
        let g = g();
        assert_eq!(g.dlog(1).unwrap(), 0);
        assert_eq!(g.dlog(3).unwrap(), 1);
        assert_eq!(g.dlog(6).unwrap(), 3);
        // <2> = {1, 2, 4} in Z*_7
        let h = GroupParams::new(7, 2, 4).unwrap();
        assert_eq!(h.ord, 3);
        assert_eq!(h.dlog(3), Err(CryptoError::NotInGroup(3)));
    }

    #[test]
    fn bad_params() {
        assert!(GroupParams::new(8, 3, 1).is_err());
        assert!(GroupParams::new(7, 2, 3).is_err());
        assert!(GroupParams::new(7, 1, 1).is_err());
    }

    #[test]
    fn candidate_lists() {
        assert_eq!(candidate_list(0, 3), vec![0, 1, 2]);
        assert_eq!(candidate_list(1, 3), vec![1, 2, 0]);
        let cl = candidate_list(2, 3);
        let r = cl.iter().position(|&c| c == 0).unwrap();
        assert_eq!(r, 1);
        assert_eq!((2 + r) % 3, 0);
    }

    #[test]
    fn shares_and_lagrange() {
        let ks = shamir_shares(3, 1, 3).unwrap();
        assert_eq!(ks.shares, vec![(1, 4), (2, 5), (3, 6)]);
        assert!(shamir_shares(2, 0, 3).unwrap().shares.iter().all(|s| s.1 == 2));
        assert_eq!(shamir_shares(3, 0, 3), Err(CryptoError::NonIntegral { num: 9, den: 2 }));
        assert_eq!(
            shamir_shares(3, 2, 3),
            Err(CryptoError::NonIntegral { num: 15, den: 2 })
        );

        assert_eq!(lagrange_exponent(&ks, [1, 2], 1).unwrap(), 8);
        assert_eq!(lagrange_exponent(&ks, [1, 2], 2).unwrap(), -5);
        assert_eq!(lagrange_exponent(&ks, [1, 3], 1).unwrap(), 6);
        assert_eq!(lagrange_exponent(&ks, [1, 3], 3).unwrap(), -3);
        assert!(lagrange_exponent(&ks, [1, 3], 2).is_err());
        assert!(lagrange_exponent(&ks, [1, 1], 1).is_err());
    }

    #[test]
    fn partial_decryption_examples() {
        let g = g();
        let c = Ciphertext::new(3, 6);
        assert_eq!(g.partial_decrypt_step(c, 0).unwrap(), c);
        let a = g.partial_decrypt_step(c, 8).unwrap();
        assert_eq!(a, Ciphertext::new(3, 3));
        assert_eq!(g.partial_decrypt_step(a, -5).unwrap(), Ciphertext::new(3, 1));
        let b = g.partial_decrypt_step(c, -5).unwrap();
        assert_eq!(g.partial_decrypt_step(b, 8).unwrap(), Ciphertext::new(3, 1));
    }
}
