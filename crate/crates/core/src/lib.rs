//! Leader election on oriented rings where messages carry no content.
//!
//! Processes only see *that* a pulse arrived and on which port. The crate
//! provides the ring model, the identifier encoding and its predicates, the
//! election protocols as resumable machines, an asynchronous simulator with
//! pluggable schedulers and exhaustive exploration, and analysis helpers.

pub mod analysis;
pub mod codec;
pub mod protocols;
pub mod ring;
pub mod sim;

pub use analysis::{AnalysisError, Judgement, MonteCarloReport, SolitudePattern};
pub use codec::{encode, Arrangement, CodecError, EncodedId};
pub use protocols::{
    AnyMachine, ConstDirection, Exponent, LogElection, Machine, ProtocolError, RandomizedParams,
};
pub use ring::{
    BlockedOn, DeliveryEvent, Direction, LinkState, Port, ProcessAction, RingConfig, RingError,
    Verdict,
};
pub use sim::{
    run, run_with, Outcome, ProcessCounters, RunOptions, RunResult, SchedulerStrategy, SimError,
    Simulation, TerminalClass, Trace,
};
