//! Output records, one JSON object per line. Field names are stable.

use obring_core::analysis::{Judgement, MonteCarloReport};
use obring_core::protocols::Exponent;
use obring_core::sim::{Outcome, ProcessCounters, RunResult, TerminalClass};
use serde::Serialize;

use crate::scenario::Algorithm;

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub kind: &'static str,
    pub scenario_hash: String,
    /// Master seed; with `run` it determines everything random in the run.
    pub seed: u64,
    pub run: u64,
    pub scheduler_seed: Option<u64>,
    pub algorithm: Algorithm,
    pub n: usize,
    #[serde(rename = "U")]
    pub bound: u64,
    pub d: Option<u64>,
    pub ids: Vec<u64>,
    pub terminal: TerminalClass,
    pub steps: u64,
    pub leader: Option<usize>,
    pub verdicts: Vec<Outcome>,
    pub cw_per_proc: Vec<u64>,
    pub ccw_per_proc: Vec<u64>,
    pub counters: Vec<ProcessCounters>,
    pub passed: bool,
    pub judgement: Judgement,
}

impl RunRecord {
    pub fn counts(result: &RunResult) -> (Vec<u64>, Vec<u64>) {
        (
            result.counters.iter().map(|c| c.sent_cw).collect(),
            result.counters.iter().map(|c| c.sent_ccw).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignatureRecord {
    pub verdicts: Vec<Outcome>,
    pub terminal: TerminalClass,
    pub counters: Vec<ProcessCounters>,
    pub passed: bool,
    pub judgement: Judgement,
    /// Indices into the sorted enabled-delivery list, one per step; replays
    /// this signature under the script scheduler.
    pub witness: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExploreRecord {
    pub kind: &'static str,
    pub scenario_hash: String,
    pub algorithm: Algorithm,
    pub n: usize,
    #[serde(rename = "U")]
    pub bound: u64,
    pub d: Option<u64>,
    pub ids: Vec<u64>,
    pub states: usize,
    pub max_depth: usize,
    pub signatures: Vec<SignatureRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloRecord {
    pub kind: &'static str,
    pub scenario_hash: String,
    #[serde(rename = "U")]
    pub bound: u64,
    pub c: Exponent,
    pub c1: Exponent,
    pub c2: Exponent,
    pub d: u64,
    pub id_bits: usize,
    pub n_choices: Vec<usize>,
    pub passed: bool,
    #[serde(flatten)]
    pub report: MonteCarloReport,
}

pub fn to_line<T: Serialize>(record: &T) -> String {
    let mut line = serde_json::to_string(record).expect("records serialize");
    line.push('\n');
    line
}
