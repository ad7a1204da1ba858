//! Run reports and JSON traces.
//!
//! A trace file looks like
//!
//! ```json
//! {
//!   "config": { "c_total": 3, "v_total": 1, ... },
//!   "query": "E<> MixTeller(0).failed_audit",
//!   "verdict": "SATISFIED",
//!   "steps": [
//!     { "action": "initial", "participants": [], "bindings": {}, "state": { "Voter(0)": "idle", ... } },
//!     { "action": "Sys(0): idle -> generating_ballots", "participants": ["Sys(0)"],
//!       "bindings": {}, "state": { "Sys(0)": "generating_ballots" } }
//!   ],
//!   "loop_start": null
//! }
//! ```
//!
//! The first state is complete; every later state lists only what changed.
//! [`replay`] rebuilds the network from `config`, reconstitutes each state
//! and checks that it is a successor of the one before.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::checker::{validate_trace, ExploreStats, Trace};
use crate::config::{parse_config, render_config};
use crate::kernel::{Network, NetworkState, StateValue, TransitionLabel};
use crate::model::{build_network, ModelConfig};
use crate::Error;

pub const SATISFIED: &str = "SATISFIED";
pub const NOT_SATISFIED: &str = "NOT SATISFIED";

pub fn verdict_text(satisfied: bool) -> &'static str {
    if satisfied {
        SATISFIED
    } else {
        NOT_SATISFIED
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub action: String,
    pub participants: Vec<String>,
    pub bindings: BTreeMap<String, i64>,
    /// Flat name -> value map; locations are strings, variables integers.
    pub state: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub config: Map<String, Value>,
    pub query: String,
    pub verdict: String,
    pub steps: Vec<TraceStep>,
    pub loop_start: Option<usize>,
}

/// `cfg` as a JSON object with one member per configuration key.
pub fn config_json(cfg: &ModelConfig) -> Map<String, Value> {
    let mut out = Map::new();
    for line in render_config(cfg).lines() {
        let (k, v) = line.split_once(" = ").expect("render_config writes `key = value`");
        out.insert(
            k.to_string(),
            serde_json::from_str(v).expect("values are JSON integers or lists"),
        );
    }
    out
}

pub fn config_from_json(obj: &Map<String, Value>) -> Result<ModelConfig, Error> {
    let mut text = String::new();
    for (k, v) in obj {
        text.push_str(&format!("{k} = {v}\n"));
    }
    parse_config(&text)
}

fn value_json(v: &StateValue) -> Value {
    match v {
        StateValue::Location(l) => Value::String(l.clone()),
        StateValue::Int(i) => json!(i),
    }
}

impl TraceFile {
    pub fn new(
        net: &Network,
        cfg: &ModelConfig,
        query: &str,
        satisfied: bool,
        trace: &Trace<NetworkState, TransitionLabel>,
    ) -> Self {
        let mut steps = Vec::with_capacity(trace.states.len());
        let mut prev: Vec<(String, StateValue)> = Vec::new();
        for (k, s) in trace.states.iter().enumerate() {
            let entries = net.state_entries(s);
            let state: Map<String, Value> = entries
                .iter()
                .enumerate()
                .filter(|(i, e)| k == 0 || prev[*i].1 != e.1)
                .map(|(_, (n, v))| (n.clone(), value_json(v)))
                .collect();
            let step = if k == 0 {
                TraceStep {
                    action: "initial".into(),
                    participants: Vec::new(),
                    bindings: BTreeMap::new(),
                    state,
                }
            } else {
                let label = &trace.labels[k - 1];
                let mut bindings = BTreeMap::new();
                for p in &label.participants {
                    let edge = &net.template_of(p.instance).edges[p.edge];
                    for (sel, v) in edge.selections.iter().zip(&p.bindings) {
                        bindings.insert(format!("{}.{}", net.instances()[p.instance].name, sel.name), *v);
                    }
                }
                TraceStep {
                    action: label.describe(net),
                    participants: label
                        .participants
                        .iter()
                        .map(|p| net.instances()[p.instance].name.clone())
                        .collect(),
                    bindings,
                    state,
                }
            };
            steps.push(step);
            prev = entries;
        }
        TraceFile {
            config: config_json(cfg),
            query: query.to_string(),
            verdict: verdict_text(satisfied).to_string(),
            steps,
            loop_start: trace.loop_start,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Where each flat state name lives.
enum Slot {
    Location(usize),
    Value(usize),
}

fn name_index(net: &Network) -> HashMap<String, Slot> {
    let mut out = HashMap::new();
    for (i, inst) in net.instances().iter().enumerate() {
        out.insert(inst.name.clone(), Slot::Location(i));
    }
    for v in net.variables() {
        let owner = v.owner.map(|o| net.instances()[o].name.as_str());
        for k in 0..v.len() {
            out.insert(v.element_name(k, owner), Slot::Value(v.base + k));
        }
    }
    out
}

fn apply(
    net: &Network,
    index: &HashMap<String, Slot>,
    state: &mut NetworkState,
    diff: &Map<String, Value>,
    step: usize,
) -> Result<(), Error> {
    let bad = |m: String| Error::Replay { step, message: m };
    for (name, v) in diff {
        match (index.get(name), v) {
            (Some(Slot::Location(i)), Value::String(l)) => {
                let loc = net
                    .template_of(*i)
                    .locations
                    .iter()
                    .position(|x| &x.name == l)
                    .ok_or_else(|| bad(format!("`{name}` has no location `{l}`")))?;
                state.locations[*i] = loc as u16;
            }
            (Some(Slot::Value(s)), Value::Number(n)) => {
                let x = n.as_i64().ok_or_else(|| bad(format!("`{name}` is not an integer")))?;
                state.values[*s] = i32::try_from(x).map_err(|_| bad(format!("`{name}` out of range")))?;
            }
            (Some(_), _) => return Err(bad(format!("`{name}` has a value of the wrong kind"))),
            (None, _) => return Err(bad(format!("unknown state entry `{name}`"))),
        }
    }
    Ok(())
}

/// Result of a successful replay.
pub struct Replayed {
    pub config: ModelConfig,
    pub network: Network,
    pub trace: Trace<NetworkState, TransitionLabel>,
}

/// Rebuilds the network from the trace's config and validates every step.
pub fn replay(file: &TraceFile) -> Result<Replayed, Error> {
    let config = config_from_json(&file.config)?;
    let network = build_network(&config)?;
    let index = name_index(&network);
    let first = file.steps.first().ok_or(Error::Replay {
        step: 0,
        message: "trace has no steps".into(),
    })?;
    let mut state = network.initial_state();
    apply(&network, &index, &mut state, &first.state, 0)?;
    let mut states = vec![state.clone()];
    let mut labels = Vec::new();
    for (k, step) in file.steps.iter().enumerate().skip(1) {
        apply(&network, &index, &mut state, &step.state, k)?;
        let label = network
            .successors(&states[k - 1])?
            .into_iter()
            .find(|(l, s)| *s == state && l.describe(&network) == step.action)
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Replay {
                step: k,
                message: format!("`{}` does not lead to the recorded state", step.action),
            })?;
        labels.push(label);
        states.push(state.clone());
    }
    let trace = Trace {
        states,
        labels,
        loop_start: file.loop_start,
    };
    validate_trace(&network, &trace)?;
    Ok(Replayed { config, network, trace })
}

/// Machine-readable summary of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fragment: Option<crate::checker::FragmentClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub states: usize,
    pub transitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore: Option<ExploreStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_length: Option<usize>,
    pub search: String,
    pub seed: u64,
    /// Omitted under `--deterministic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, cfg: &ModelConfig) -> Self {
        RunReport {
            command: command.to_string(),
            config: config_json(cfg),
            query: None,
            fragment: None,
            verdict: None,
            states: 0,
            transitions: 0,
            explore: None,
            trace_length: None,
            search: "bfs".into(),
            seed: 0,
            wall_time_ms: None,
        }
    }

    /// 0 when satisfied, 1 when not; commands without a verdict exit 0.
    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_deref() {
            Some(NOT_SATISFIED) => 1,
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check, CheckOptions, Formula};

    fn small() -> ModelConfig {
        parse_config("v_total = 1\nc_total = 2\nmt_total = 1\ndt_total = 2\nrand_values = [1]\ncoerced_voters = [0]")
            .unwrap()
    }

    fn punished_trace() -> (Network, ModelConfig, TraceFile) {
        let cfg = small();
        let net = build_network(&cfg).unwrap();
        let f = Formula::ag(Formula::not(Formula::parse_atom("Voter(0).punished").unwrap()));
        let v = check(&net, &f, &CheckOptions::default()).unwrap();
        assert!(!v.satisfied);
        let file = TraceFile::new(&net, &cfg, "A[] not Voter(0).punished", v.satisfied, &v.trace.unwrap());
        (net, cfg, file)
    }

    #[test]
    fn config_survives_json() {
        let cfg = small();
        assert_eq!(config_from_json(&config_json(&cfg)).unwrap(), cfg);
        assert_eq!(config_json(&cfg)["rand_values"], json!([1]));
    }

    #[test]
    fn trace_round_trip_and_replay() {
        let (net, cfg, file) = punished_trace();
        assert_eq!(file.verdict, NOT_SATISFIED);
        assert_eq!(file.steps[0].action, "initial");
        assert_eq!(file.steps[0].state.len(), net.state_entries(&net.initial_state()).len());
        assert!(file.steps[1..]
            .iter()
            .all(|s| !s.state.is_empty() && s.state.len() < 10));
        assert_eq!(file.steps.last().unwrap().state["Voter(0)"], json!("punished"));
        let back = TraceFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let r = replay(&back).unwrap();
        assert_eq!(r.config, cfg);
        assert_eq!(r.trace.states.len(), file.steps.len());
        assert!(net
            .eval_atom(
                r.trace.last_state(),
                &crate::kernel::Expr::parse("Voter(0).punished").unwrap()
            )
            .unwrap());
    }

    #[test]
    fn tampered_traces_are_rejected() {
        let (_, _, file) = punished_trace();
        let mut bad = file.clone();
        bad.steps[2].state.insert("voted".into(), json!(1));
        assert!(matches!(replay(&bad), Err(Error::Replay { step: 2, .. })));
        let mut bad = file.clone();
        bad.steps[1].action = "nothing".into();
        assert!(matches!(replay(&bad), Err(Error::Replay { step: 1, .. })));
        let mut bad = file.clone();
        bad.steps[0].state.insert("nope".into(), json!(0));
        assert!(matches!(replay(&bad), Err(Error::Replay { step: 0, .. })));
        let mut bad = file;
        bad.steps[0].state.insert("Voter(0)".into(), json!("end"));
        assert!(matches!(replay(&bad), Err(Error::Replay { .. })));
    }

    #[test]
    fn bindings_are_recorded() {
        let (_, _, file) = punished_trace();
        let marked = file
            .steps
            .iter()
            .find(|s| s.action.contains("has_ballot -> marked_choice"))
            .unwrap();
        assert_eq!(marked.bindings.keys().collect::<Vec<_>>(), ["Voter(0).X"]);
    }

    #[test]
    fn report_exit_codes() {
        let mut r = RunReport::new("verify", &small());
        assert_eq!(r.exit_code(), 0);
        r.verdict = Some(NOT_SATISFIED.into());
        assert_eq!(r.exit_code(), 1);
        r.verdict = Some(SATISFIED.into());
        assert_eq!(r.exit_code(), 0);
        assert!(!r.to_json().contains("wall_time_ms"));
    }
}
