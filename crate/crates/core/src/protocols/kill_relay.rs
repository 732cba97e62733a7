use crate::ring::{Port, ProcessAction, Verdict};

use super::ProtocolError;

/// Relay loop run by an eliminated process: it swallows the first
/// clockwise pulse it sees, forwards everything else, and stops after two
/// consecutive counter-clockwise pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KillRelayState {
    pub consecutive_ccw: u8,
    pub killed: bool,
}

impl KillRelayState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_terminated(&self) -> bool {
        self.consecutive_ccw >= 2
    }

    pub(crate) fn advance(
        &mut self,
        delivered: Port,
        out: &mut Vec<ProcessAction>,
    ) -> Result<(), ProtocolError> {
        if self.is_terminated() {
            return Err(ProtocolError::AlreadyTerminated);
        }
        match delivered {
            Port::One if !self.killed => {
                self.killed = true;
                return Ok(());
            }
            Port::One => self.consecutive_ccw = 0,
            Port::Zero => self.consecutive_ccw += 1,
        }
        out.push(ProcessAction::SendPulse(delivered.opposite()));
        if self.is_terminated() {
            out.push(ProcessAction::Return(Verdict::NonLeader));
        }
        Ok(())
    }
}

/// One iteration of the relay loop as a pure function.
pub fn kill_and_relay_step(
    state: KillRelayState,
    delivered: Port,
) -> Result<(KillRelayState, Vec<ProcessAction>), ProtocolError> {
    let mut next = state;
    let mut out = Vec::with_capacity(2);
    next.advance(delivered, &mut out)?;
    Ok((next, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ProcessAction::*;

    fn st(ccw: u8, killed: bool) -> KillRelayState {
        KillRelayState {
            consecutive_ccw: ccw,
            killed,
        }
    }

    #[test]
    fn first_clockwise_pulse_is_killed() {
        assert_eq!(
            kill_and_relay_step(st(0, false), Port::One).unwrap(),
            (st(0, true), vec![])
        );
    }

    #[test]
    fn counter_clockwise_is_relayed() {
        assert_eq!(
            kill_and_relay_step(st(0, true), Port::Zero).unwrap(),
            (st(1, true), vec![SendPulse(Port::One)])
        );
    }

    #[test]
    fn second_consecutive_ccw_forwards_then_returns() {
        let (s, actions) = kill_and_relay_step(st(1, true), Port::Zero).unwrap();
        assert!(s.is_terminated());
        assert_eq!(
            actions,
            vec![SendPulse(Port::One), Return(Verdict::NonLeader)]
        );
        assert_eq!(
            kill_and_relay_step(s, Port::Zero),
            Err(ProtocolError::AlreadyTerminated)
        );
    }

    #[test]
    fn clockwise_after_kill_resets_and_forwards() {
        assert_eq!(
            kill_and_relay_step(st(1, true), Port::One).unwrap(),
            (st(0, true), vec![SendPulse(Port::Zero)])
        );
    }

    #[test]
    fn ccw_before_kill_still_counts() {
        let (s, a) = kill_and_relay_step(st(0, false), Port::Zero).unwrap();
        assert_eq!((s, a), (st(1, false), vec![SendPulse(Port::One)]));
        // the kill does not reset the counter
        let (s, a) = kill_and_relay_step(s, Port::One).unwrap();
        assert_eq!((s, a), (st(1, true), vec![]));
    }
}
