use serde::{Deserialize, Serialize};

/// Wall-clock seconds spent per phase. Rebalancing time is part of the jet
/// time and additionally reported on its own.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub coarsening: f64,
    pub flows: f64,
    pub initial: f64,
    pub jet: f64,
    pub rebalance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseHash {
    pub hash: String,
    pub phase: String,
}

/// One line of the JSON-lines run log.
///
/// Fields are declared in lexicographic order, which is also the order in
/// which they are serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub balanced: bool,
    pub epsilon: String,
    pub imbalance: f64,
    pub instance: String,
    pub k: usize,
    pub metric: i64,
    /// FNV-1a 64 of the final assignment, 16 lowercase hex digits.
    pub partition_hash: String,
    pub phase_hashes: Vec<PhaseHash>,
    pub phase_times: PhaseTimes,
    pub preset: String,
    pub seed: u64,
    pub threads: usize,
    pub total_time: f64,
}

impl RunRecord {
    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("run records always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }
}

pub fn format_hash(h: u64) -> String {
    format!("{h:016x}")
}
