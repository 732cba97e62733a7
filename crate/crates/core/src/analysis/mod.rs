//! Judging runs against the correctness and message-count claims, solitude
//! patterns, and Monte Carlo experiments for the randomized election.

mod judge;
mod montecarlo;
mod solitude;

pub use judge::{
    check_return_order, judge_const_direction, judge_log_election, min_encoding, Judgement,
    Violation,
};
pub use montecarlo::{
    exact_collision_probability, mc_collisions, mc_randomized_success, mc_scatteredness, trial_rng,
    FailureTaxonomy, MonteCarloReport,
};
pub use solitude::{solitude_pattern, SolitudePattern};

use thiserror::Error;

use crate::protocols::ProtocolError;
use crate::sim::SimError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("no termination within {0} deliveries")]
    StepCapExceeded(u64),
    #[error("machine deadlocked before terminating")]
    Deadlock,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
