use std::collections::BTreeSet;

use serde::Serialize;

use crate::crypto::{CryptoError, GroupParams};

/// Size and crypto parameters of the election model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelConfig {
    pub c_total: usize,
    pub v_total: usize,
    pub mt_total: usize,
    pub dt_total: usize,
    pub dt_min: usize,
    pub group: GroupParams,
    /// Slope of the key-sharing line `a(x) = k + a1 * x`.
    pub a1: i64,
    pub corrupt_mtellers: BTreeSet<usize>,
    /// Half-open range `[lo, hi)` of exponents the corrupted teller may use.
    pub delta_range: (i64, i64),
    /// Randomness exponents available to ballot generation and mixing.
    pub rand_values: Vec<i64>,
    /// Audited subsets as bitmasks over the batch; empty means the full batch only.
    pub audit_ch: Vec<u32>,
    /// Runs everything between posting the receipts and publishing the tally
    /// as one committed block, so voters and coercer cannot interleave with it.
    pub atomic_pipeline: bool,
    /// Voters the coercer may approach; empty means every voter.
    pub coerced_voters: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let group = GroupParams::default();
        let ord = group.ord;
        ModelConfig {
            c_total: 3,
            v_total: 3,
            mt_total: 3,
            dt_total: 3,
            dt_min: 2,
            group,
            a1: 1,
            corrupt_mtellers: BTreeSet::new(),
            delta_range: (2, ord),
            rand_values: (0..ord).collect(),
            audit_ch: Vec::new(),
            atomic_pipeline: false,
            coerced_voters: Vec::new(),
        }
    }
}

/// Largest batch for which the permutation table is built.
pub const MAX_VOTERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Constraint(String),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

impl ModelConfig {
    /// A configuration with `v_total` voters and defaults elsewhere.
    pub fn with_voters(v_total: usize) -> Self {
        ModelConfig {
            v_total,
            ..Self::default()
        }
    }

    pub fn cols(&self) -> usize {
        1 + 2 * self.mt_total + self.dt_min
    }

    /// Column of teller `id`'s odd (`mi = 0`) or even (`mi = 1`) mix.
    pub fn mix_col(&self, id: usize, mi: usize) -> usize {
        1 + 2 * id + mi
    }

    /// Audited subsets in effect.
    pub fn audit_subsets(&self) -> Vec<u32> {
        if self.audit_ch.is_empty() {
            vec![(1u32 << self.v_total) - 1]
        } else {
            self.audit_ch.clone()
        }
    }

    /// Whether the coercer may approach voter `i`.
    pub fn coercible(&self, i: usize) -> bool {
        self.coerced_voters.is_empty() || self.coerced_voters.contains(&i)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Constraint(m));
        let ord = self.group.ord;
        if self.v_total < 1 {
            return fail("v_total must be at least 1".into());
        }
        if self.v_total > MAX_VOTERS {
            return fail(format!(
                "v_total = {} exceeds the supported maximum {MAX_VOTERS}",
                self.v_total
            ));
        }
        if self.c_total < 2 {
            return fail("c_total must be at least 2".into());
        }
        if self.mt_total < 1 {
            return fail("mt_total must be at least 1".into());
        }
        if self.dt_min > self.dt_total {
            return fail(format!("dt_min = {} exceeds dt_total = {}", self.dt_min, self.dt_total));
        }
        if self.dt_min != 2 {
            return fail(format!(
                "dt_min = {} unsupported: key shares lie on a line, so exactly 2 are combined",
                self.dt_min
            ));
        }
        if self.v_total as i64 > ord {
            return fail(format!(
                "v_total = {} exceeds the group order {ord}; seeds would collide",
                self.v_total
            ));
        }
        let (v, c) = (self.v_total as i64, self.c_total as i64);
        if (v - 1) + (c - 1) >= ord && ord % c != 0 {
            return fail(format!(
                "seed + index can wrap modulo {ord} and {ord} is not a multiple of c_total = {c}; the tally would be wrong"
            ));
        }
        crate::crypto::shamir_shares(self.group.secret_key(), self.a1, self.dt_total)?;
        if let Some(&m) = self.corrupt_mtellers.iter().find(|&&m| m >= self.mt_total) {
            return fail(format!(
                "corrupt mix teller {m} does not exist (mt_total = {})",
                self.mt_total
            ));
        }
        let (lo, hi) = self.delta_range;
        if lo >= hi {
            return fail(format!("delta_range [{lo}, {hi}) is empty"));
        }
        if let Some(d) = (lo..hi).find(|d| d.rem_euclid(ord) == 1) {
            return fail(format!("delta_range contains {d}, which leaves the term unchanged"));
        }
        if self.rand_values.is_empty() {
            return fail("rand_values must not be empty".into());
        }
        if let Some(r) = self.rand_values.iter().find(|r| !(0..ord).contains(*r)) {
            return fail(format!("rand_values entry {r} outside [0, {ord})"));
        }
        if let Some(i) = self.coerced_voters.iter().find(|&&i| i >= self.v_total) {
            return fail(format!("coerced voter {i} does not exist (v_total = {})", self.v_total));
        }
        let full = (1u32 << self.v_total) - 1;
        if let Some(m) = self.audit_ch.iter().find(|&&m| m == 0 || m > full) {
            return fail(format!(
                "audit_ch entry {m} is not a non-empty subset of {} terms",
                self.v_total
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!(
            (c.c_total, c.v_total, c.mt_total, c.dt_total, c.dt_min),
            (3, 3, 3, 3, 2)
        );
        assert_eq!(c.cols(), 9);
        assert_eq!(c.delta_range, (2, 6));
        assert_eq!(c.audit_subsets(), vec![7]);
    }

    #[test]
    fn constraints() {
        let bad = |f: fn(&mut ModelConfig)| {
            let mut c = ModelConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.v_total = 0));
        assert!(bad(|c| c.c_total = 1));
        assert!(bad(|c| c.mt_total = 0));
        assert!(bad(|c| c.dt_min = 5));
        assert!(bad(|c| c.v_total = 7));
        assert!(bad(|c| c.a1 = 2));
        assert!(bad(|c| {
            c.corrupt_mtellers.insert(3);
        }));
        assert!(bad(|c| c.delta_range = (1, 3)));
        assert!(bad(|c| c.delta_range = (3, 3)));
        assert!(bad(|c| c.rand_values = vec![6]));
        assert!(bad(|c| c.audit_ch = vec![8]));
        assert!(bad(|c| c.coerced_voters = vec![3]));
        // 3 voters, 4 candidates: exponents reach 5 < 6, fine; 5 candidates: 2 + 4 = 6 wraps.
        let mut c = ModelConfig {
            c_total: 4,
            ..ModelConfig::default()
        };
        c.validate().unwrap();
        c.c_total = 5;
        assert!(c.validate().is_err());
    }
}
