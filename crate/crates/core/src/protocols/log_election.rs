//! Bit-by-bit elimination election.
//!
//! Round `i` compares bit `i` of the (encoded) identifiers of the processes
//! still active. Every active process first circulates clockwise pulses
//! until it has received `(2i - 1) * d` of them in total. A process whose bit
//! is 0 then signals with one counter-clockwise pulse and waits for one to
//! come back, blocking clockwise traffic. A process whose bit is 1 keeps
//! circulating clockwise pulses up to `2i * d`, and is eliminated if a
//! counter-clockwise pulse reaches it first. After the last bit the sole
//! survivor sends one extra counter-clockwise pulse that tells every relay
//! to stop.

use crate::codec::EncodedId;
use crate::ring::{BlockedOn, Port, ProcessAction, Verdict};

use super::{check_resume, KillRelayState, Machine, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogPhase {
    Init,
    Synchronization,
    ZeroSignaling,
    Termination,
    NoZeroChecking,
    Inactive(KillRelayState),
    Done(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogElection {
    id: EncodedId,
    d: u64,
    round: usize,
    received_cw: u64,
    phase: LogPhase,
}

pub fn log_election_new(id: EncodedId, d: u64) -> Result<LogElection, ProtocolError> {
    LogElection::new(id, d)
}

impl LogElection {
    pub fn new(id: EncodedId, d: u64) -> Result<Self, ProtocolError> {
        if d == 0 {
            return Err(ProtocolError::BadParam("d must be at least 1".into()));
        }
        if id.is_empty() {
            return Err(ProtocolError::BadParam(
                "identifier must be non-empty".into(),
            ));
        }
        Ok(Self {
            id,
            d,
            round: 1,
            received_cw: 0,
            phase: LogPhase::Init,
        })
    }

    pub fn id(&self) -> &EncodedId {
        &self.id
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// Current round, 1-based.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn received_cw(&self) -> u64 {
        self.received_cw
    }

    pub fn phase(&self) -> LogPhase {
        self.phase
    }

    /// Active in the elimination sense: not relaying and not done.
    pub fn is_active(&self) -> bool {
        !matches!(self.phase, LogPhase::Inactive(_) | LogPhase::Done(_))
    }

    fn bit(&self) -> bool {
        self.id.bits()[self.round - 1]
    }

    fn sync_target(&self) -> u64 {
        (2 * self.round as u64 - 1) * self.d
    }

    fn check_target(&self) -> u64 {
        2 * self.round as u64 * self.d
    }

    fn enter_synchronization(&mut self, out: &mut Vec<ProcessAction>) {
        self.phase = LogPhase::Synchronization;
        out.push(ProcessAction::SendPulse(Port::Zero));
    }

    fn after_synchronization(&mut self, out: &mut Vec<ProcessAction>) {
        if self.bit() {
            self.phase = LogPhase::NoZeroChecking;
            out.push(ProcessAction::SendPulse(Port::Zero));
        } else {
            self.phase = LogPhase::ZeroSignaling;
            out.push(ProcessAction::SendPulse(Port::One));
        }
    }

    fn next_round(&mut self, out: &mut Vec<ProcessAction>) {
        if self.round == self.id.len() {
            // Only reachable when the last bit is 1: the loop runs out
            // without a return statement.
            self.finish(Verdict::NonLeader, out);
            return;
        }
        self.round += 1;
        self.enter_synchronization(out);
    }

    fn finish(&mut self, verdict: Verdict, out: &mut Vec<ProcessAction>) {
        self.phase = LogPhase::Done(verdict);
        out.push(ProcessAction::Return(verdict));
    }
}

impl Machine for LogElection {
    fn resume(
        &mut self,
        delivered: Option<Port>,
        out: &mut Vec<ProcessAction>,
    ) -> Result<(), ProtocolError> {
        check_resume(self.blocked_on(), delivered)?;
        let Some(port) = delivered else {
            self.enter_synchronization(out);
            return Ok(());
        };
        match self.phase {
            LogPhase::Init | LogPhase::Done(_) => unreachable!("rejected by check_resume"),
            LogPhase::Synchronization => {
                self.received_cw += 1;
                if self.received_cw == self.sync_target() {
                    self.after_synchronization(out);
                } else {
                    out.push(ProcessAction::SendPulse(Port::Zero));
                }
            }
            LogPhase::ZeroSignaling => {
                if self.round == self.id.len() {
                    self.phase = LogPhase::Termination;
                    out.push(ProcessAction::SendPulse(Port::One));
                } else {
                    self.round += 1;
                    self.enter_synchronization(out);
                }
            }
            LogPhase::Termination => self.finish(Verdict::Leader, out),
            LogPhase::NoZeroChecking => match port {
                Port::Zero => {
                    out.push(ProcessAction::SendPulse(Port::One));
                    self.phase = LogPhase::Inactive(KillRelayState::new());
                }
                Port::One => {
                    self.received_cw += 1;
                    if self.received_cw == self.check_target() {
                        self.next_round(out);
                    } else {
                        out.push(ProcessAction::SendPulse(Port::Zero));
                    }
                }
            },
            LogPhase::Inactive(mut relay) => {
                relay.advance(port, out)?;
                if relay.is_terminated() {
                    self.phase = LogPhase::Done(Verdict::NonLeader);
                } else {
                    self.phase = LogPhase::Inactive(relay);
                }
            }
        }
        Ok(())
    }

    fn blocked_on(&self) -> BlockedOn {
        match self.phase {
            LogPhase::Init => BlockedOn::Start,
            LogPhase::Synchronization => BlockedOn::SpecificPort(Port::One),
            LogPhase::ZeroSignaling | LogPhase::Termination => BlockedOn::SpecificPort(Port::Zero),
            LogPhase::NoZeroChecking | LogPhase::Inactive(_) => BlockedOn::AnyPort,
            LogPhase::Done(v) => BlockedOn::Terminated(v),
        }
    }
}
