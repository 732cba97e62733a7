//! Oriented ring topology, pulse links, and the action vocabulary shared by
//! every protocol and scheduler.
//!
//! Process `p_j` reaches `p_{j+1}` through port 0 and `p_{j-1}` through
//! port 1. A pulse sent on port 0 travels clockwise and is received on the
//! successor's port 1; a pulse sent on port 1 travels counter-clockwise and
//! is received on the predecessor's port 0. Pulses carry no payload, so a
//! directed link is just a count of pulses in transit.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring size must be at least 1")]
    EmptyRing,
    #[error("expected {expected} identifiers, got {got}")]
    IdCountMismatch { expected: usize, got: usize },
    #[error("process index {index} out of range for ring of size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("no pulse in transit toward process {target} on port {port}")]
    EmptyLink { target: usize, port: Port },
}

/// One of the two local ports of a process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    /// Leads to the clockwise successor.
    Zero,
    /// Leads to the counter-clockwise predecessor.
    One,
}

impl Port {
    pub const fn index(self) -> usize {
        match self {
            Port::Zero => 0,
            Port::One => 1,
        }
    }

    pub const fn from_index(index: usize) -> Option<Port> {
        match index {
            0 => Some(Port::Zero),
            1 => Some(Port::One),
            _ => None,
        }
    }

    /// `1 - q` in the pseudocode's notation.
    pub const fn opposite(self) -> Port {
        match self {
            Port::Zero => Port::One,
            Port::One => Port::Zero,
        }
    }

    /// Direction of a pulse sent on this port.
    pub const fn send_direction(self) -> Direction {
        match self {
            Port::Zero => Direction::Clockwise,
            Port::One => Direction::CounterClockwise,
        }
    }

    /// Direction of a pulse received on this port.
    pub const fn receive_direction(self) -> Direction {
        match self {
            Port::One => Direction::Clockwise,
            Port::Zero => Direction::CounterClockwise,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Clockwise,
    CounterClockwise,
}

/// Final state of a process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Leader,
    NonLeader,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Leader => f.write_str("Leader"),
            Verdict::NonLeader => f.write_str("NonLeader"),
        }
    }
}

/// What a suspended machine is waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockedOn {
    /// Not yet started; the scheduler resumes it once with no delivery.
    Start,
    SpecificPort(Port),
    AnyPort,
    Terminated(Verdict),
}

impl BlockedOn {
    pub fn accepts(self, port: Port) -> bool {
        match self {
            BlockedOn::SpecificPort(p) => p == port,
            BlockedOn::AnyPort => true,
            BlockedOn::Start | BlockedOn::Terminated(_) => false,
        }
    }

    pub fn is_terminated(self) -> bool {
        matches!(self, BlockedOn::Terminated(_))
    }
}

/// Output of a single resumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessAction {
    SendPulse(Port),
    Return(Verdict),
}

/// Delivery of one pulse to `target`, received on `port`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeliveryEvent {
    pub target: usize,
    pub port: Port,
}

/// Ring size, the known upper bound `U`, and an optional identifier
/// assignment (`ids[j]` belongs to `p_j`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingConfig {
    n: usize,
    bound: u64,
    ids: Option<Vec<u64>>,
}

impl RingConfig {
    pub fn new(n: usize, bound: u64, ids: Option<Vec<u64>>) -> Result<Self, RingError> {
        if n == 0 {
            return Err(RingError::EmptyRing);
        }
        if let Some(ids) = &ids {
            if ids.len() != n {
                return Err(RingError::IdCountMismatch {
                    expected: n,
                    got: ids.len(),
                });
            }
        }
        Ok(Self { n, bound, ids })
    }

    pub fn anonymous(n: usize, bound: u64) -> Result<Self, RingError> {
        Self::new(n, bound, None)
    }

    pub fn with_ids(ids: Vec<u64>, bound: u64) -> Result<Self, RingError> {
        Self::new(ids.len(), bound, Some(ids))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The known upper bound `U` on the ring size.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn ids(&self) -> Option<&[u64]> {
        self.ids.as_deref()
    }

    pub fn is_bound_valid(&self) -> bool {
        self.bound >= self.n as u64
    }

    pub fn successor(&self, j: usize) -> usize {
        (j + 1) % self.n
    }

    pub fn predecessor(&self, j: usize) -> usize {
        (j + self.n - 1) % self.n
    }

    /// Process that receives a pulse sent by `sender` on `port`.
    pub fn receiver_of(&self, sender: usize, port: Port) -> usize {
        match port {
            Port::Zero => self.successor(sender),
            Port::One => self.predecessor(sender),
        }
    }

    /// Process whose link feeds `target`'s `port`.
    pub fn sender_into(&self, target: usize, port: Port) -> usize {
        match port {
            Port::One => self.predecessor(target),
            Port::Zero => self.successor(target),
        }
    }
}

/// `(clockwise successor, counter-clockwise successor)` of `j`.
pub fn neighbors(j: usize, config: &RingConfig) -> Result<(usize, usize), RingError> {
    if j >= config.n {
        return Err(RingError::IndexOutOfRange {
            index: j,
            n: config.n,
        });
    }
    Ok((config.successor(j), config.predecessor(j)))
}

/// In-transit pulse counts per directed link.
///
/// `cw[j]` counts pulses sent by `p_j` on port 0 and not yet received by
/// `p_{j+1}`; `ccw[j]` counts pulses sent by `p_j` on port 1 and not yet
/// received by `p_{j-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinkState {
    pub cw: Vec<u64>,
    pub ccw: Vec<u64>,
}

impl LinkState {
    pub fn new(n: usize) -> Self {
        Self {
            cw: vec![0; n],
            ccw: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.cw.len()
    }

    pub fn total_cw(&self) -> u64 {
        self.cw.iter().sum()
    }

    pub fn total_ccw(&self) -> u64 {
        self.ccw.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.total_cw() + self.total_ccw()
    }

    pub fn is_empty(&self) -> bool {
        self.cw.iter().chain(&self.ccw).all(|&c| c == 0)
    }

    fn source_counter(&mut self, event: DeliveryEvent) -> &mut u64 {
        let n = self.n();
        match event.port {
            Port::One => &mut self.cw[(event.target + n - 1) % n],
            Port::Zero => &mut self.ccw[(event.target + 1) % n],
        }
    }

    /// Pulses waiting on the link that feeds `event`.
    pub fn pending(&self, event: DeliveryEvent) -> u64 {
        let n = self.n();
        match event.port {
            Port::One => self.cw[(event.target + n - 1) % n],
            Port::Zero => self.ccw[(event.target + 1) % n],
        }
    }

    pub fn record_send(&mut self, sender: usize, port: Port) {
        match port {
            Port::Zero => self.cw[sender] += 1,
            Port::One => self.ccw[sender] += 1,
        }
    }

    pub fn record_delivery(&mut self, event: DeliveryEvent) -> Result<(), RingError> {
        let counter = self.source_counter(event);
        if *counter == 0 {
            return Err(RingError::EmptyLink {
                target: event.target,
                port: event.port,
            });
        }
        *counter -= 1;
        Ok(())
    }
}

pub fn apply_send(state: &LinkState, sender: usize, port: Port) -> Result<LinkState, RingError> {
    if sender >= state.n() {
        return Err(RingError::IndexOutOfRange {
            index: sender,
            n: state.n(),
        });
    }
    let mut next = state.clone();
    next.record_send(sender, port);
    Ok(next)
}

pub fn apply_delivery(state: &LinkState, event: DeliveryEvent) -> Result<LinkState, RingError> {
    if event.target >= state.n() {
        return Err(RingError::IndexOutOfRange {
            index: event.target,
            n: state.n(),
        });
    }
    let mut next = state.clone();
    next.record_delivery(event)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> RingConfig {
        RingConfig::anonymous(n, n as u64).unwrap()
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(neighbors(2, &ring(5)).unwrap(), (3, 1));
        assert_eq!(neighbors(0, &ring(5)).unwrap(), (1, 4));
        assert_eq!(neighbors(0, &ring(1)).unwrap(), (0, 0));
        assert!(neighbors(5, &ring(5)).is_err());
    }

    #[test]
    fn send_increments_one_counter() {
        let s = apply_send(&LinkState::new(3), 0, Port::Zero).unwrap();
        assert_eq!(s.cw, vec![1, 0, 0]);
        assert_eq!(s.ccw, vec![0, 0, 0]);

        let s = LinkState {
            cw: vec![2, 0],
            ccw: vec![0, 0],
        };
        assert_eq!(apply_send(&s, 0, Port::Zero).unwrap().cw, vec![3, 0]);

        let s = apply_send(&LinkState::new(2), 1, Port::One).unwrap();
        assert_eq!(s.ccw, vec![0, 1]);
        // that pulse is delivered to p_0 on port 0
        assert_eq!(
            s.pending(DeliveryEvent {
                target: 0,
                port: Port::Zero
            }),
            1
        );
    }

    #[test]
    fn delivery_decrements_source() {
        let s = LinkState {
            cw: vec![1, 0, 0],
            ccw: vec![0; 3],
        };
        let s = apply_delivery(
            &s,
            DeliveryEvent {
                target: 1,
                port: Port::One,
            },
        )
        .unwrap();
        assert_eq!(s.cw, vec![0, 0, 0]);

        let s = LinkState {
            cw: vec![0, 0],
            ccw: vec![0, 1],
        };
        let s = apply_delivery(
            &s,
            DeliveryEvent {
                target: 0,
                port: Port::Zero,
            },
        )
        .unwrap();
        assert_eq!(s.ccw, vec![0, 0]);

        let s = LinkState::new(1);
        assert_eq!(
            apply_delivery(
                &s,
                DeliveryEvent {
                    target: 0,
                    port: Port::One
                }
            ),
            Err(RingError::EmptyLink {
                target: 0,
                port: Port::One
            })
        );
    }

    #[test]
    fn self_loop_routes_back_to_sender() {
        let r = ring(1);
        assert_eq!(r.receiver_of(0, Port::Zero), 0);
        let s = apply_send(&LinkState::new(1), 0, Port::Zero).unwrap();
        assert_eq!(
            s.pending(DeliveryEvent {
                target: 0,
                port: Port::One
            }),
            1
        );
        assert_eq!(
            s.pending(DeliveryEvent {
                target: 0,
                port: Port::Zero
            }),
            0
        );
    }

    #[test]
    fn config_validation() {
        assert_eq!(RingConfig::anonymous(0, 1), Err(RingError::EmptyRing));
        assert!(matches!(
            RingConfig::new(3, 3, Some(vec![1, 2])),
            Err(RingError::IdCountMismatch {
                expected: 3,
                got: 2
            })
        ));
        assert!(!RingConfig::with_ids(vec![1, 2, 3], 2)
            .unwrap()
            .is_bound_valid());
    }
}
