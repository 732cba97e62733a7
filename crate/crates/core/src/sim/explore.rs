//! Exhaustive enumeration of delivery orders for tiny rings.
//!
//! Depth-first over every enabled delivery at every state (an `AnyPort`
//! waiter with both links loaded branches on the port). States are
//! deduplicated on links, machine states and counters, which is exact
//! because pulses are indistinguishable.

use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

use thiserror::Error;

use crate::protocols::Machine;
use crate::ring::{LinkState, RingConfig};

use super::{Outcome, ProcessCounters, SimError, Simulation, TerminalClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("explored more than {0} distinct states")]
    StateCapExceeded(usize),
    #[error("an execution ran past {0} deliveries without terminating")]
    StepCapExceeded(u64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// What distinguishes one terminal state from another.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub verdicts: Vec<Outcome>,
    pub terminal: TerminalClass,
    pub counters: Vec<ProcessCounters>,
}

#[derive(Debug, Clone)]
pub struct ExploreReport {
    /// Every terminal signature, with the first delivery script that
    /// reached it (replayable with `SchedulerStrategy::AdversarialScript`).
    pub signatures: BTreeMap<Signature, Vec<u32>>,
    pub states: usize,
    pub max_depth: usize,
}

impl ExploreReport {
    pub fn is_singleton(&self) -> bool {
        self.signatures.len() == 1
    }
}

#[derive(PartialEq, Eq, Hash)]
struct StateKey<M> {
    links: LinkState,
    machines: Vec<M>,
    counters: Vec<ProcessCounters>,
}

fn key<M: Machine + Clone>(sim: &Simulation<M>) -> StateKey<M> {
    StateKey {
        links: sim.links().clone(),
        machines: sim.machines().to_vec(),
        counters: sim.counters().to_vec(),
    }
}

pub fn explore_all<M>(
    config: &RingConfig,
    machines: Vec<M>,
    step_cap: u64,
    state_cap: usize,
) -> Result<ExploreReport, ExploreError>
where
    M: Machine + Clone + Eq + Hash,
{
    let mut root = Simulation::new(config.clone(), machines, false)?;
    root.start()?;

    let mut seen = HashSet::new();
    seen.insert(key(&root));
    let mut stack = vec![(root, Vec::<u32>::new())];
    let mut signatures = BTreeMap::new();
    let mut max_depth = 0;

    while let Some((sim, path)) = stack.pop() {
        max_depth = max_depth.max(path.len());
        if let Some(terminal) = sim.status() {
            let sig = Signature {
                verdicts: sim.outcomes(),
                terminal,
                counters: sim.counters().to_vec(),
            };
            signatures.entry(sig).or_insert(path);
            continue;
        }
        if path.len() as u64 >= step_cap {
            return Err(ExploreError::StepCapExceeded(step_cap));
        }
        for (choice, event) in sim.enabled_events().into_iter().enumerate() {
            let mut next = sim.clone();
            next.deliver(event)?;
            if seen.insert(key(&next)) {
                if seen.len() > state_cap {
                    return Err(ExploreError::StateCapExceeded(state_cap));
                }
                let mut next_path = path.clone();
                next_path.push(choice as u32);
                stack.push((next, next_path));
            }
        }
    }
    Ok(ExploreReport {
        signatures,
        states: seen.len(),
        max_depth,
    })
}
