//! Election that spends exactly three counter-clockwise pulses.
//!
//! Every process competes by circulating up to `U * id` clockwise pulses.
//! The minimum identifier finishes first; it then sends one
//! counter-clockwise pulse that knocks everyone else out of the competition,
//! a second one that sweeps the leftover clockwise pulses, and a third that
//! terminates the relays.

use crate::ring::{BlockedOn, Port, ProcessAction, Verdict};

use super::{check_resume, Machine, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstPhase {
    Init,
    /// Competition loop, at the given 1-based iteration.
    Competing {
        iteration: u64,
    },
    /// Knocked out; waiting to swallow one clockwise pulse.
    RelayKill,
    /// Relaying in both directions; counts counter-clockwise receptions.
    Relay {
        ccw_received: u8,
    },
    /// Leader waiting for its first counter-clockwise pulse to return.
    AwaitFirst,
    /// Leader forwarding clockwise pulses until the second returns.
    Draining,
    /// Leader waiting for the final counter-clockwise pulse.
    AwaitLast,
    Done(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstDirection {
    id: u64,
    bound: u64,
    rounds: u64,
    phase: ConstPhase,
}

pub fn const_direction_new(id: u64, bound: u64) -> Result<ConstDirection, ProtocolError> {
    ConstDirection::new(id, bound)
}

impl ConstDirection {
    pub fn new(id: u64, bound: u64) -> Result<Self, ProtocolError> {
        if id == 0 || bound == 0 {
            return Err(ProtocolError::BadParam("id and U must be positive".into()));
        }
        let rounds = id
            .checked_mul(bound)
            .ok_or_else(|| ProtocolError::BadParam("U * id overflows".into()))?;
        Ok(Self {
            id,
            bound,
            rounds,
            phase: ConstPhase::Init,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn phase(&self) -> ConstPhase {
        self.phase
    }

    pub fn is_competing(&self) -> bool {
        matches!(self.phase, ConstPhase::Init | ConstPhase::Competing { .. })
    }

    fn finish(&mut self, verdict: Verdict, out: &mut Vec<ProcessAction>) {
        self.phase = ConstPhase::Done(verdict);
        out.push(ProcessAction::Return(verdict));
    }
}

impl Machine for ConstDirection {
    fn resume(
        &mut self,
        delivered: Option<Port>,
        out: &mut Vec<ProcessAction>,
    ) -> Result<(), ProtocolError> {
        use ProcessAction::SendPulse;

        check_resume(self.blocked_on(), delivered)?;
        let Some(port) = delivered else {
            self.phase = ConstPhase::Competing { iteration: 1 };
            out.push(SendPulse(Port::Zero));
            return Ok(());
        };
        match self.phase {
            ConstPhase::Init | ConstPhase::Done(_) => unreachable!("rejected by check_resume"),
            ConstPhase::Competing { iteration } => match port {
                Port::Zero => {
                    out.push(SendPulse(Port::One));
                    self.phase = ConstPhase::RelayKill;
                }
                Port::One if iteration == self.rounds => {
                    out.push(SendPulse(Port::One));
                    self.phase = ConstPhase::AwaitFirst;
                }
                Port::One => {
                    self.phase = ConstPhase::Competing {
                        iteration: iteration + 1,
                    };
                    out.push(SendPulse(Port::Zero));
                }
            },
            ConstPhase::RelayKill => self.phase = ConstPhase::Relay { ccw_received: 0 },
            ConstPhase::Relay { ccw_received } => {
                let ccw_received = ccw_received + u8::from(port == Port::Zero);
                out.push(SendPulse(port.opposite()));
                if ccw_received == 2 {
                    self.finish(Verdict::NonLeader, out);
                } else {
                    self.phase = ConstPhase::Relay { ccw_received };
                }
            }
            ConstPhase::AwaitFirst => {
                out.push(SendPulse(Port::One));
                self.phase = ConstPhase::Draining;
            }
            ConstPhase::Draining => match port {
                Port::One => out.push(SendPulse(Port::Zero)),
                Port::Zero => {
                    out.push(SendPulse(Port::One));
                    self.phase = ConstPhase::AwaitLast;
                }
            },
            ConstPhase::AwaitLast => self.finish(Verdict::Leader, out),
        }
        Ok(())
    }

    fn blocked_on(&self) -> BlockedOn {
        match self.phase {
            ConstPhase::Init => BlockedOn::Start,
            ConstPhase::Competing { .. } | ConstPhase::Relay { .. } | ConstPhase::Draining => {
                BlockedOn::AnyPort
            }
            ConstPhase::RelayKill => BlockedOn::SpecificPort(Port::One),
            ConstPhase::AwaitFirst | ConstPhase::AwaitLast => BlockedOn::SpecificPort(Port::Zero),
            ConstPhase::Done(v) => BlockedOn::Terminated(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ProcessAction::*;

    #[test]
    fn rejects_zero_inputs() {
        assert!(const_direction_new(0, 3).is_err());
        assert!(const_direction_new(3, 0).is_err());
    }

    // Alone on the self-loop ring with id 1, U 2.
    #[test]
    fn solo_trace() {
        let mut m = const_direction_new(1, 2).unwrap();
        let script = [
            (None, vec![SendPulse(Port::Zero)]),
            (Some(Port::One), vec![SendPulse(Port::Zero)]),
            (Some(Port::One), vec![SendPulse(Port::One)]),
            (Some(Port::Zero), vec![SendPulse(Port::One)]),
            (Some(Port::Zero), vec![SendPulse(Port::One)]),
            (Some(Port::Zero), vec![Return(Verdict::Leader)]),
        ];
        for (delivered, expected) in script {
            assert_eq!(m.step(delivered).unwrap(), expected);
        }
    }

    #[test]
    fn knocked_out_process_relays_and_kills() {
        let mut m = const_direction_new(5, 3).unwrap();
        m.step(None).unwrap();
        assert_eq!(
            m.step(Some(Port::Zero)).unwrap(),
            vec![SendPulse(Port::One)]
        );
        assert_eq!(m.blocked_on(), BlockedOn::SpecificPort(Port::One));
        assert_eq!(m.step(Some(Port::One)).unwrap(), vec![]);
        assert_eq!(
            m.step(Some(Port::One)).unwrap(),
            vec![SendPulse(Port::Zero)]
        );
        assert_eq!(
            m.step(Some(Port::Zero)).unwrap(),
            vec![SendPulse(Port::One)]
        );
        assert_eq!(
            m.step(Some(Port::Zero)).unwrap(),
            vec![SendPulse(Port::One), Return(Verdict::NonLeader)]
        );
    }
}
