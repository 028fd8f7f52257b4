//! Machine-readable run reports.
//!
//! Every subcommand emits one report. The JSON layout is fixed:
//! `command`, `input_sha256`, `seed`, `result`, `witness`, `matrix`,
//! `profile`, `details`, `wall_time_ms`. Re-running a command with the same
//! inputs and seed reproduces the report byte for byte except for
//! `wall_time_ms`. All relay and source indices in reports are 1-based.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sman_core::{Verdict, Witness};

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub result: Value,
    pub witness: Value,
    pub matrix: Value,
    pub profile: Value,
    pub details: Value,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A witness as JSON, indices shifted to 1-based.
pub fn witness_json(witness: &Witness) -> Value {
    let kind = match witness {
        Witness::Relays(_) => "relays",
        Witness::Sources(_) => "sources",
    };
    json!({ "kind": kind, "indices": witness.one_based() })
}

pub fn verdict_witness_json(verdict: &Verdict) -> Value {
    match verdict.witness() {
        Some(w) => witness_json(w),
        None => Value::Null,
    }
}

/// Human-readable rendering of a witness, e.g. `relays {4,5,6}`.
pub fn witness_text(witness: &Witness) -> String {
    let kind = match witness {
        Witness::Relays(_) => "relays",
        Witness::Sources(_) => "sources",
    };
    let indices: Vec<String> = witness.one_based().iter().map(usize::to_string).collect();
    format!("{kind} {{{}}}", indices.join(","))
}

pub fn verdict_text(verdict: &Verdict) -> String {
    match verdict.witness() {
        None => "holds".to_string(),
        Some(w) => format!("fails  witness {}", witness_text(w)),
    }
}
