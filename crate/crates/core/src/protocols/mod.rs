//! Election protocols as resumable state machines.
//!
//! A machine is resumed once with no delivery to start it, then once per
//! delivered pulse. Each resumption runs local computation to the next
//! blocking receive and appends the sends (and possibly one `Return`) it
//! performed to the caller's buffer.

mod const_direction;
mod kill_relay;
mod log_election;
mod randomized;

pub use const_direction::{const_direction_new, ConstDirection, ConstPhase};
pub use kill_relay::{kill_and_relay_step, KillRelayState};
pub use log_election::{log_election_new, LogElection, LogPhase};
pub use randomized::{
    ceil_log2_pow, randomized_election_new, randomized_id_from_draw, randomized_make_id, Exponent,
    RandomizedParams,
};

use thiserror::Error;

use crate::ring::{BlockedOn, Port, ProcessAction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("machine already terminated")]
    AlreadyTerminated,
    #[error("machine was resumed {got} while blocked on {expected:?}")]
    UnexpectedResume { expected: BlockedOn, got: String },
}

impl ProtocolError {
    pub(crate) fn unexpected(expected: BlockedOn, delivered: Option<Port>) -> Self {
        let got = match delivered {
            None => "without a delivery".to_owned(),
            Some(p) => format!("with a pulse on port {p}"),
        };
        ProtocolError::UnexpectedResume { expected, got }
    }
}

/// A process-local protocol driven by the simulator.
pub trait Machine {
    /// Resumes the machine. `delivered` is `None` for the very first
    /// resumption and otherwise names the port the consumed pulse arrived on.
    fn resume(
        &mut self,
        delivered: Option<Port>,
        out: &mut Vec<ProcessAction>,
    ) -> Result<(), ProtocolError>;

    fn blocked_on(&self) -> BlockedOn;

    /// Convenience wrapper returning the emitted actions.
    fn step(&mut self, delivered: Option<Port>) -> Result<Vec<ProcessAction>, ProtocolError> {
        let mut out = Vec::new();
        self.resume(delivered, &mut out)?;
        Ok(out)
    }
}

/// Checks that `delivered` is acceptable in the `blocked` state.
pub(crate) fn check_resume(
    blocked: BlockedOn,
    delivered: Option<Port>,
) -> Result<(), ProtocolError> {
    match (blocked, delivered) {
        (BlockedOn::Terminated(_), _) => Err(ProtocolError::AlreadyTerminated),
        (BlockedOn::Start, None) => Ok(()),
        (b, Some(p)) if b.accepts(p) => Ok(()),
        (b, d) => Err(ProtocolError::unexpected(b, d)),
    }
}

/// Any of the built-in protocols, for callers that pick one at run time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnyMachine {
    Log(LogElection),
    Const(ConstDirection),
}

impl Machine for AnyMachine {
    fn resume(
        &mut self,
        delivered: Option<Port>,
        out: &mut Vec<ProcessAction>,
    ) -> Result<(), ProtocolError> {
        match self {
            AnyMachine::Log(m) => m.resume(delivered, out),
            AnyMachine::Const(m) => m.resume(delivered, out),
        }
    }

    fn blocked_on(&self) -> BlockedOn {
        match self {
            AnyMachine::Log(m) => m.blocked_on(),
            AnyMachine::Const(m) => m.blocked_on(),
        }
    }
}

impl From<LogElection> for AnyMachine {
    fn from(m: LogElection) -> Self {
        AnyMachine::Log(m)
    }
}

impl From<ConstDirection> for AnyMachine {
    fn from(m: ConstDirection) -> Self {
        AnyMachine::Const(m)
    }
}
