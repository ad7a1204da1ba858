//! Flat `key = value` configuration files.
//!
//! One assignment per line; a value is an integer or a bracketed list of
//! integers, `#` starts a comment. Omitted keys keep their defaults:
//!
//! ```text
//! # three voters, the first mix teller corrupted
//! v_total = 3
//! corrupt_mtellers = [0]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::crypto::GroupParams;
use crate::model::ModelConfig;
use crate::Error;

/// Every accepted key.
pub const KEYS: [&str; 15] = [
    "c_total",
    "v_total",
    "mt_total",
    "dt_total",
    "dt_min",
    "p",
    "alpha",
    "beta",
    "a1",
    "corrupt_mtellers",
    "delta_range",
    "rand_values",
    "audit_ch",
    "atomic_pipeline",
    "coerced_voters",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Int(i64),
    List(Vec<i64>),
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ModelConfig, Error> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ModelConfig, Error> {
    let mut entries: BTreeMap<&'static str, (usize, Value)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |m: String| Error::Config(format!("line {line_no}: {m}"));
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(format!("unknown key `{key}`")))?;
        let value = parse_value(value.trim()).map_err(err)?;
        if entries.insert(key, (line_no, value)).is_some() {
            return Err(err(format!("`{key}` given twice")));
        }
    }
    build(&entries)
}

fn parse_value(v: &str) -> Result<Value, String> {
    let int = |s: &str| {
        let s = s.trim();
        match s {
            "true" => Ok(1),
            "false" => Ok(0),
            _ => s.parse::<i64>().map_err(|_| format!("`{s}` is not an integer")),
        }
    };
    if let Some(inner) = v.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner.split(',').map(int).collect::<Result<_, _>>().map(Value::List);
    }
    if v.is_empty() {
        return Err("missing value".into());
    }
    int(v).map(Value::Int)
}

fn build(entries: &BTreeMap<&'static str, (usize, Value)>) -> Result<ModelConfig, Error> {
    let at = |key: &str, m: String| {
        let line = entries.get(key).map(|e| e.0).unwrap_or(0);
        Error::Config(format!("line {line}: {m}"))
    };
    let int = |key: &str, default: i64| -> Result<i64, Error> {
        match entries.get(key) {
            None => Ok(default),
            Some((_, Value::Int(v))) => Ok(*v),
            Some(_) => Err(at(key, format!("`{key}` expects an integer"))),
        }
    };
    let list = |key: &str| -> Result<Option<Vec<i64>>, Error> {
        match entries.get(key) {
            None => Ok(None),
            Some((_, Value::List(v))) => Ok(Some(v.clone())),
            Some(_) => Err(at(key, format!("`{key}` expects a list"))),
        }
    };
    let count = |key: &str, default: usize| -> Result<usize, Error> {
        let v = int(key, default as i64)?;
        usize::try_from(v).map_err(|_| at(key, format!("`{key}` must be non-negative")))
    };
    let indices = |key: &str| -> Result<Vec<usize>, Error> {
        list(key)?
            .unwrap_or_default()
            .into_iter()
            .map(|v| usize::try_from(v).map_err(|_| at(key, format!("`{key}` entries must be non-negative"))))
            .collect()
    };

    let d = ModelConfig::default();
    let group = GroupParams::new(
        int("p", d.group.p)?,
        int("alpha", d.group.alpha)?,
        int("beta", d.group.beta)?,
    )
    .map_err(|e| at("p", e.to_string()))?;
    let ord = group.ord;
    let delta_range = match list("delta_range")? {
        None => (2, ord),
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(_) => return Err(at("delta_range", "`delta_range` expects `[lo, hi]`".into())),
    };
    let atomic = int("atomic_pipeline", 0)?;
    if !(0..=1).contains(&atomic) {
        return Err(at("atomic_pipeline", "`atomic_pipeline` is 0 or 1".into()));
    }
    let cfg = ModelConfig {
        c_total: count("c_total", d.c_total)?,
        v_total: count("v_total", d.v_total)?,
        mt_total: count("mt_total", d.mt_total)?,
        dt_total: count("dt_total", d.dt_total)?,
        dt_min: count("dt_min", d.dt_min)?,
        a1: int("a1", d.a1)?,
        corrupt_mtellers: indices("corrupt_mtellers")?.into_iter().collect::<BTreeSet<_>>(),
        delta_range,
        rand_values: list("rand_values")?.unwrap_or_else(|| (0..ord).collect()),
        audit_ch: list("audit_ch")?
            .unwrap_or_default()
            .into_iter()
            .map(|m| u32::try_from(m).map_err(|_| at("audit_ch", format!("audit_ch entry {m} out of range"))))
            .collect::<Result<_, _>>()?,
        atomic_pipeline: atomic == 1,
        coerced_voters: indices("coerced_voters")?,
        group,
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Renders `cfg` in the file format; `parse_config` reads it back unchanged.
pub fn render_config(cfg: &ModelConfig) -> String {
    let list = |v: &mut dyn Iterator<Item = i64>| {
        let items: Vec<String> = v.map(|x| x.to_string()).collect();
        format!("[{}]", items.join(", "))
    };
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    line("c_total", cfg.c_total.to_string());
    line("v_total", cfg.v_total.to_string());
    line("mt_total", cfg.mt_total.to_string());
    line("dt_total", cfg.dt_total.to_string());
    line("dt_min", cfg.dt_min.to_string());
    line("p", cfg.group.p.to_string());
    line("alpha", cfg.group.alpha.to_string());
    line("beta", cfg.group.beta.to_string());
    line("a1", cfg.a1.to_string());
    line(
        "corrupt_mtellers",
        list(&mut cfg.corrupt_mtellers.iter().map(|&x| x as i64)),
    );
    line(
        "delta_range",
        list(&mut [cfg.delta_range.0, cfg.delta_range.1].into_iter()),
    );
    line("rand_values", list(&mut cfg.rand_values.iter().copied()));
    line("audit_ch", list(&mut cfg.audit_ch.iter().map(|&x| x as i64)));
    line("atomic_pipeline", (cfg.atomic_pipeline as i64).to_string());
    line(
        "coerced_voters",
        list(&mut cfg.coerced_voters.iter().map(|&x| x as i64)),
    );
    out
}
