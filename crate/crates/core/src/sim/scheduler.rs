use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::protocols::Machine;
use crate::ring::{DeliveryEvent, Port};

use super::Simulation;

/// How the next delivery is picked among the enabled ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchedulerStrategy {
    /// Cycles over `(process, port)` slots.
    RoundRobin,
    /// Uniform choice among enabled deliveries, driven by ChaCha8 seeded
    /// from the given value.
    SeededRandom(u64),
    /// Clockwise pulses first, counter-clockwise only when no clockwise
    /// delivery is possible.
    CwPriority,
    /// Entry `k` picks index `script[k] % len` of the sorted enabled list at
    /// step `k`; round robin takes over when the script runs out.
    AdversarialScript(Vec<u32>),
}

impl SchedulerStrategy {
    pub fn seed(&self) -> Option<u64> {
        match self {
            SchedulerStrategy::SeededRandom(seed) => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    strategy: SchedulerStrategy,
    rng: Option<ChaCha8Rng>,
    cursor: usize,
    script_pos: usize,
}

impl Scheduler {
    pub fn new(strategy: SchedulerStrategy) -> Self {
        let rng = strategy.seed().map(ChaCha8Rng::seed_from_u64);
        Self {
            strategy,
            rng,
            cursor: 0,
            script_pos: 0,
        }
    }

    pub fn strategy(&self) -> &SchedulerStrategy {
        &self.strategy
    }

    /// Picks one enabled delivery.
    ///
    /// # Panics
    /// If nothing is enabled.
    pub fn choose<M: Machine>(&mut self, sim: &Simulation<M>) -> DeliveryEvent {
        let enabled = sim.enabled_unordered();
        assert!(
            !enabled.is_empty(),
            "scheduler asked to choose with nothing enabled"
        );
        match &self.strategy {
            SchedulerStrategy::SeededRandom(_) => {
                let rng = self.rng.as_mut().expect("seeded strategy has an rng");
                enabled[rng.gen_range(0..enabled.len())]
            }
            SchedulerStrategy::RoundRobin => self.round_robin(sim),
            SchedulerStrategy::CwPriority => self
                .rotate(sim, Port::One)
                .or_else(|| self.rotate(sim, Port::Zero))
                .expect("something is enabled"),
            SchedulerStrategy::AdversarialScript(script) => {
                match script.get(self.script_pos).copied() {
                    Some(pick) => {
                        self.script_pos += 1;
                        let sorted = sim.enabled_events();
                        sorted[pick as usize % sorted.len()]
                    }
                    None => self.round_robin(sim),
                }
            }
        }
    }

    fn round_robin<M: Machine>(&mut self, sim: &Simulation<M>) -> DeliveryEvent {
        let slots = 2 * sim.config().n();
        for k in 0..slots {
            let s = (self.cursor + k) % slots;
            let event = DeliveryEvent {
                target: s / 2,
                port: Port::from_index(s % 2).unwrap(),
            };
            if sim.is_slot_enabled(event.target, event.port) {
                self.cursor = s + 1;
                return event;
            }
        }
        unreachable!("something is enabled")
    }

    /// Next enabled delivery on `port`, cycling over targets.
    fn rotate<M: Machine>(&mut self, sim: &Simulation<M>, port: Port) -> Option<DeliveryEvent> {
        let n = sim.config().n();
        (0..n)
            .map(|k| (self.cursor + k) % n)
            .find(|&t| sim.is_slot_enabled(t, port))
            .map(|t| {
                self.cursor = t + 1;
                DeliveryEvent { target: t, port }
            })
    }
}
