//! Discrete-event driver for a ring of protocol machines.
//!
//! Local computation is atomic: after a delivery the target machine runs to
//! its next blocking receive before anything else happens. The only
//! nondeterminism is which enabled delivery fires next, and that choice
//! belongs to a [`Scheduler`].

mod explore;
mod scheduler;
mod trace;

pub use explore::{explore_all, ExploreError, ExploreReport, Signature};
pub use scheduler::{Scheduler, SchedulerStrategy};
pub use trace::{Trace, TraceEvent, TraceKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::{Machine, ProtocolError};
use crate::ring::{
    BlockedOn, DeliveryEvent, Direction, LinkState, Port, ProcessAction, RingConfig, RingError,
    Verdict,
};

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("ring has {expected} processes but {got} machines were supplied")]
    ConfigMismatch { expected: usize, got: usize },
    #[error("process {process}: {source}")]
    Protocol {
        process: usize,
        source: ProtocolError,
    },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("delivery {0:?} is not enabled")]
    NotEnabled(DeliveryEvent),
    #[error("invariant violated at step {step}: {detail}")]
    InvariantViolation { step: u64, detail: String },
}

/// Per-process pulse counters.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct ProcessCounters {
    pub sent_cw: u64,
    pub sent_ccw: u64,
    pub received_cw: u64,
    pub received_ccw: u64,
}

impl ProcessCounters {
    /// Sent on port 0 minus received on port 1.
    pub fn cw_unbalance(&self) -> i64 {
        self.sent_cw as i64 - self.received_cw as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Leader,
    NonLeader,
    Unfinished,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Leader => Outcome::Leader,
            Verdict::NonLeader => Outcome::NonLeader,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TerminalClass {
    /// Every machine returned and no pulse is in transit.
    Quiescent,
    /// Every machine returned but pulses are left in transit.
    NonQuiescentTermination,
    /// Some machine is still waiting and nothing it waits for can arrive.
    Deadlock,
    StepCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub verdicts: Vec<Outcome>,
    pub counters: Vec<ProcessCounters>,
    pub terminal: TerminalClass,
    pub steps: u64,
    /// Seed of the scheduler, when it has one.
    pub seed: Option<u64>,
    pub trace: Option<Trace>,
}

impl RunResult {
    pub fn leaders(&self) -> Vec<usize> {
        (0..self.verdicts.len())
            .filter(|&j| self.verdicts[j] == Outcome::Leader)
            .collect()
    }

    pub fn n(&self) -> usize {
        self.verdicts.len()
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub step_cap: u64,
    pub record_trace: bool,
    /// Check pulse conservation after every step.
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            step_cap: DEFAULT_STEP_CAP,
            record_trace: false,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

impl RunOptions {
    pub fn with_step_cap(step_cap: u64) -> Self {
        Self {
            step_cap,
            ..Self::default()
        }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

const NOT_ENABLED: usize = usize::MAX;

/// A ring of machines plus the pulses in flight between them.
#[derive(Debug, Clone)]
pub struct Simulation<M> {
    config: RingConfig,
    links: LinkState,
    machines: Vec<M>,
    counters: Vec<ProcessCounters>,
    step: u64,
    trace: Option<Trace>,
    /// Enabled deliveries, in an order that depends only on history.
    enabled: Vec<DeliveryEvent>,
    /// Position in `enabled` for slot `target * 2 + port`.
    enabled_pos: Vec<usize>,
    live: usize,
    started: bool,
    actions: Vec<ProcessAction>,
}

fn slot(event: DeliveryEvent) -> usize {
    event.target * 2 + event.port.index()
}

impl<M: Machine> Simulation<M> {
    pub fn new(config: RingConfig, machines: Vec<M>, record_trace: bool) -> Result<Self, SimError> {
        let n = config.n();
        if machines.len() != n {
            return Err(SimError::ConfigMismatch {
                expected: n,
                got: machines.len(),
            });
        }
        let live = machines
            .iter()
            .filter(|m| !m.blocked_on().is_terminated())
            .count();
        Ok(Self {
            config,
            links: LinkState::new(n),
            machines,
            counters: vec![ProcessCounters::default(); n],
            step: 0,
            trace: record_trace.then(Trace::new),
            enabled: Vec::with_capacity(2 * n),
            enabled_pos: vec![NOT_ENABLED; 2 * n],
            live,
            started: false,
            actions: Vec::new(),
        })
    }

    pub fn config(&self) -> &RingConfig {
        &self.config
    }

    pub fn links(&self) -> &LinkState {
        &self.links
    }

    pub fn machines(&self) -> &[M] {
        &self.machines
    }

    pub fn counters(&self) -> &[ProcessCounters] {
        &self.counters
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    pub fn is_started(&self) -> bool {
        self.started
    }

    /// Resumes every machine once, in index order. Idempotent.
    pub fn start(&mut self) -> Result<(), SimError> {
        if self.started {
            return Ok(());
        }
        self.started = true;
        for j in 0..self.config.n() {
            if self.machines[j].blocked_on() != BlockedOn::Start {
                continue;
            }
            self.log(TraceKind::Resume, j, None);
            self.resume(j, None)?;
        }
        Ok(())
    }

    /// Deliveries whose link holds a pulse and whose target waits on that
    /// port, sorted by `(target, port)`.
    pub fn enabled_events(&self) -> Vec<DeliveryEvent> {
        let mut events = self.enabled.clone();
        events.sort_unstable();
        events
    }

    pub(crate) fn enabled_unordered(&self) -> &[DeliveryEvent] {
        &self.enabled
    }

    pub(crate) fn is_slot_enabled(&self, target: usize, port: Port) -> bool {
        self.enabled_pos[target * 2 + port.index()] != NOT_ENABLED
    }

    pub fn deliver(&mut self, event: DeliveryEvent) -> Result<(), SimError> {
        if event.target >= self.config.n() || self.enabled_pos[slot(event)] == NOT_ENABLED {
            return Err(SimError::NotEnabled(event));
        }
        self.step += 1;
        self.links.record_delivery(event)?;
        let c = &mut self.counters[event.target];
        match event.port.receive_direction() {
            Direction::Clockwise => c.received_cw += 1,
            Direction::CounterClockwise => c.received_ccw += 1,
        }
        self.log(TraceKind::Deliver, event.target, Some(event.port));
        self.resume(event.target, Some(event.port))
    }

    fn resume(&mut self, j: usize, delivered: Option<Port>) -> Result<(), SimError> {
        let mut actions = std::mem::take(&mut self.actions);
        actions.clear();
        self.machines[j]
            .resume(delivered, &mut actions)
            .map_err(|source| SimError::Protocol { process: j, source })?;
        for &action in &actions {
            match action {
                ProcessAction::SendPulse(port) => {
                    self.links.record_send(j, port);
                    match port.send_direction() {
                        Direction::Clockwise => self.counters[j].sent_cw += 1,
                        Direction::CounterClockwise => self.counters[j].sent_ccw += 1,
                    }
                    self.log(TraceKind::Send, j, Some(port));
                    let receiver = self.config.receiver_of(j, port);
                    self.refresh(DeliveryEvent {
                        target: receiver,
                        port: port.opposite(),
                    });
                }
                ProcessAction::Return(v) => {
                    self.live -= 1;
                    self.log(TraceKind::Return(v), j, None);
                }
            }
        }
        self.actions = actions;
        self.refresh(DeliveryEvent {
            target: j,
            port: Port::Zero,
        });
        self.refresh(DeliveryEvent {
            target: j,
            port: Port::One,
        });
        Ok(())
    }

    fn refresh(&mut self, event: DeliveryEvent) {
        let s = slot(event);
        let want = self.links.pending(event) > 0
            && self.machines[event.target].blocked_on().accepts(event.port);
        let pos = self.enabled_pos[s];
        match (want, pos != NOT_ENABLED) {
            (true, false) => {
                self.enabled_pos[s] = self.enabled.len();
                self.enabled.push(event);
            }
            (false, true) => {
                self.enabled.swap_remove(pos);
                if let Some(&moved) = self.enabled.get(pos) {
                    self.enabled_pos[slot(moved)] = pos;
                }
                self.enabled_pos[s] = NOT_ENABLED;
            }
            _ => {}
        }
    }

    fn log(&mut self, kind: TraceKind, process: usize, port: Option<Port>) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent {
                step: self.step,
                kind,
                process,
                port,
            });
        }
    }

    /// Terminal classification, or `None` while deliveries remain.
    pub fn status(&self) -> Option<TerminalClass> {
        if !self.started {
            return None;
        }
        if self.live == 0 {
            return Some(if self.links.is_empty() {
                TerminalClass::Quiescent
            } else {
                TerminalClass::NonQuiescentTermination
            });
        }
        self.enabled.is_empty().then_some(TerminalClass::Deadlock)
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.machines
            .iter()
            .map(|m| match m.blocked_on() {
                BlockedOn::Terminated(v) => v.into(),
                _ => Outcome::Unfinished,
            })
            .collect()
    }

    /// Per direction: pulses sent on a link minus pulses received from it
    /// equals the link's in-transit count.
    pub fn check_conservation(&self) -> Result<(), SimError> {
        for j in 0..self.config.n() {
            let succ = self.config.successor(j);
            let pred = self.config.predecessor(j);
            let cw = self.counters[j].sent_cw - self.counters[succ].received_cw;
            let ccw = self.counters[j].sent_ccw - self.counters[pred].received_ccw;
            if cw != self.links.cw[j] || ccw != self.links.ccw[j] {
                return Err(SimError::InvariantViolation {
                    step: self.step,
                    detail: format!(
                        "link from p{j}: counters give cw={cw} ccw={ccw}, links hold cw={} ccw={}",
                        self.links.cw[j], self.links.ccw[j]
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn into_result(self, terminal: TerminalClass, seed: Option<u64>) -> RunResult {
        RunResult {
            verdicts: self.outcomes(),
            counters: self.counters,
            terminal,
            steps: self.step,
            seed,
            trace: self.trace,
        }
    }

    /// Runs to a terminal class under `scheduler`.
    pub fn run_to_end(
        &mut self,
        scheduler: &mut Scheduler,
        options: &RunOptions,
    ) -> Result<TerminalClass, SimError> {
        self.start()?;
        loop {
            if options.check_invariants {
                self.check_conservation()?;
            }
            if let Some(class) = self.status() {
                return Ok(class);
            }
            if self.step >= options.step_cap {
                return Ok(TerminalClass::StepCapExceeded);
            }
            let event = scheduler.choose(self);
            self.deliver(event)?;
        }
    }
}

/// Runs `machines` on `config` to completion.
pub fn run<M: Machine>(
    config: &RingConfig,
    machines: Vec<M>,
    strategy: SchedulerStrategy,
    step_cap: u64,
) -> Result<RunResult, SimError> {
    run_with(
        config,
        machines,
        strategy,
        &RunOptions::with_step_cap(step_cap),
    )
}

pub fn run_with<M: Machine>(
    config: &RingConfig,
    machines: Vec<M>,
    strategy: SchedulerStrategy,
    options: &RunOptions,
) -> Result<RunResult, SimError> {
    let seed = strategy.seed();
    let mut sim = Simulation::new(config.clone(), machines, options.record_trace)?;
    let mut scheduler = Scheduler::new(strategy);
    let terminal = sim.run_to_end(&mut scheduler, options)?;
    Ok(sim.into_result(terminal, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Arrangement;
    use crate::protocols::{const_direction_new, log_election_new, LogElection};

    fn log_machines(ids: &[u64], d: u64) -> Vec<LogElection> {
        Arrangement::encoded(ids)
            .unwrap()
            .ids()
            .iter()
            .map(|e| log_election_new(e.clone(), d).unwrap())
            .collect()
    }

    /// Blocks on port 0 forever after sending one clockwise pulse.
    #[derive(Debug, Clone)]
    struct Stubborn(bool);

    impl Machine for Stubborn {
        fn resume(
            &mut self,
            _delivered: Option<Port>,
            out: &mut Vec<ProcessAction>,
        ) -> Result<(), ProtocolError> {
            self.0 = true;
            out.push(ProcessAction::SendPulse(Port::Zero));
            Ok(())
        }

        fn blocked_on(&self) -> BlockedOn {
            if self.0 {
                BlockedOn::SpecificPort(Port::Zero)
            } else {
                BlockedOn::Start
            }
        }
    }

    #[test]
    fn log_election_three_processes_any_seed() {
        let config = RingConfig::with_ids(vec![1, 2, 3], 3).unwrap();
        for seed in 0..100 {
            let r = run(
                &config,
                log_machines(&[1, 2, 3], 3),
                SchedulerStrategy::SeededRandom(seed),
                1 << 20,
            )
            .unwrap();
            assert_eq!(r.terminal, TerminalClass::Quiescent);
            assert_eq!(r.leaders(), vec![0]);
            for c in &r.counters {
                assert_eq!(c.sent_cw, 21);
                assert_eq!(c.sent_ccw, 3);
            }
        }
    }

    #[test]
    fn const_direction_solo() {
        let config = RingConfig::with_ids(vec![1], 2).unwrap();
        let r = run(
            &config,
            vec![const_direction_new(1, 2).unwrap()],
            SchedulerStrategy::RoundRobin,
            1000,
        )
        .unwrap();
        assert_eq!(r.terminal, TerminalClass::Quiescent);
        assert_eq!(r.verdicts, vec![Outcome::Leader]);
        assert_eq!((r.counters[0].sent_cw, r.counters[0].sent_ccw), (2, 3));
    }

    #[test]
    fn stubborn_machines_deadlock() {
        let config = RingConfig::anonymous(3, 3).unwrap();
        let r = run(
            &config,
            vec![Stubborn(false); 3],
            SchedulerStrategy::RoundRobin,
            100,
        )
        .unwrap();
        assert_eq!(r.terminal, TerminalClass::Deadlock);
        assert_eq!(r.verdicts, vec![Outcome::Unfinished; 3]);
    }

    #[test]
    fn machine_count_must_match() {
        let config = RingConfig::anonymous(3, 3).unwrap();
        assert_eq!(
            run(
                &config,
                log_machines(&[1, 2], 3),
                SchedulerStrategy::RoundRobin,
                100
            )
            .unwrap_err(),
            SimError::ConfigMismatch {
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn step_cap_is_reported() {
        let config = RingConfig::with_ids(vec![1, 2, 3], 3).unwrap();
        let r = run(
            &config,
            log_machines(&[1, 2, 3], 3),
            SchedulerStrategy::RoundRobin,
            5,
        )
        .unwrap();
        assert_eq!(r.terminal, TerminalClass::StepCapExceeded);
        assert_eq!(r.steps, 5);
    }

    #[test]
    fn enabled_event_examples() {
        let config = RingConfig::anonymous(2, 2).unwrap();
        let mut sim = Simulation::new(config, log_machines(&[1, 2], 1), false).unwrap();
        assert!(sim.enabled_events().is_empty());
        sim.start().unwrap();
        // both sent one clockwise pulse and wait on port 1
        assert_eq!(
            sim.enabled_events(),
            vec![
                DeliveryEvent {
                    target: 0,
                    port: Port::One
                },
                DeliveryEvent {
                    target: 1,
                    port: Port::One
                }
            ]
        );
        assert!(matches!(
            sim.deliver(DeliveryEvent {
                target: 0,
                port: Port::Zero
            }),
            Err(SimError::NotEnabled(_))
        ));
    }

    /// Sends a fixed list of pulses when started, then waits forever.
    #[derive(Debug, Clone)]
    struct Waiter {
        sends: Vec<Port>,
        wait: BlockedOn,
        started: bool,
    }

    impl Waiter {
        fn new(sends: &[Port], wait: BlockedOn) -> Self {
            Self {
                sends: sends.to_vec(),
                wait,
                started: false,
            }
        }
    }

    impl Machine for Waiter {
        fn resume(
            &mut self,
            _delivered: Option<Port>,
            out: &mut Vec<ProcessAction>,
        ) -> Result<(), ProtocolError> {
            self.started = true;
            out.extend(self.sends.iter().map(|&p| ProcessAction::SendPulse(p)));
            Ok(())
        }

        fn blocked_on(&self) -> BlockedOn {
            if self.started {
                self.wait
            } else {
                BlockedOn::Start
            }
        }
    }

    #[test]
    fn pulse_counts_collapse_to_one_event() {
        let config = RingConfig::anonymous(2, 2).unwrap();
        let machines = vec![
            Waiter::new(
                &[Port::Zero, Port::Zero],
                BlockedOn::SpecificPort(Port::Zero),
            ),
            Waiter::new(&[], BlockedOn::SpecificPort(Port::One)),
        ];
        let mut sim = Simulation::new(config, machines, false).unwrap();
        sim.start().unwrap();
        assert_eq!(sim.links().cw, vec![2, 0]);
        assert_eq!(
            sim.enabled_events(),
            vec![DeliveryEvent {
                target: 1,
                port: Port::One
            }]
        );
    }

    #[test]
    fn any_port_waiter_sees_both_links() {
        let config = RingConfig::anonymous(3, 3).unwrap();
        let machines = vec![
            Waiter::new(&[Port::Zero], BlockedOn::SpecificPort(Port::Zero)),
            Waiter::new(&[], BlockedOn::AnyPort),
            Waiter::new(&[Port::One], BlockedOn::SpecificPort(Port::One)),
        ];
        let mut sim = Simulation::new(config, machines, false).unwrap();
        sim.start().unwrap();
        assert_eq!(
            sim.enabled_events(),
            vec![
                DeliveryEvent {
                    target: 1,
                    port: Port::Zero
                },
                DeliveryEvent {
                    target: 1,
                    port: Port::One
                }
            ]
        );
    }

    #[test]
    fn all_terminated_with_empty_links_has_no_events() {
        let config = RingConfig::with_ids(vec![2], 1).unwrap();
        let mut sim =
            Simulation::new(config, vec![const_direction_new(2, 1).unwrap()], false).unwrap();
        let class = sim.run_to_end(
            &mut Scheduler::new(SchedulerStrategy::RoundRobin),
            &RunOptions::default(),
        );
        assert_eq!(class.unwrap(), TerminalClass::Quiescent);
        assert!(sim.enabled_events().is_empty());
        assert!(sim.links().is_empty());
    }

    #[test]
    fn traced_run_is_replayable() {
        let config = RingConfig::with_ids(vec![3, 1, 2], 3).unwrap();
        let opts = RunOptions::with_step_cap(1 << 20).traced();
        let a = run_with(
            &config,
            log_machines(&[3, 1, 2], 3),
            SchedulerStrategy::SeededRandom(5),
            &opts,
        )
        .unwrap();
        let b = run_with(
            &config,
            log_machines(&[3, 1, 2], 3),
            SchedulerStrategy::SeededRandom(5),
            &opts,
        )
        .unwrap();
        assert_eq!(a, b);
        let text = a.trace.unwrap().to_text();
        assert!(
            text.starts_with("step=0 kind=resume proc=0 port=-\nstep=0 kind=send proc=0 port=0\n")
        );
    }
}
