use serde::Serialize;

use crate::protocols::Machine;
use crate::ring::{Port, RingConfig};
use crate::sim::{Scheduler, SchedulerStrategy, Simulation, TerminalClass};

use super::AnalysisError;

/// Clockwise reception counts of a process running alone: `cw[i]` is the
/// count seen just before the `(i+1)`-th counter-clockwise reception, and
/// `cw[t]` the count at termination.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SolitudePattern {
    pub t: usize,
    pub cw: Vec<u64>,
}

/// Runs `machine` on a one-process ring, delivering clockwise pulses
/// whenever possible.
pub fn solitude_pattern<M: Machine>(
    machine: M,
    step_cap: u64,
) -> Result<SolitudePattern, AnalysisError> {
    let config = RingConfig::anonymous(1, 1).expect("n = 1 is valid");
    let mut sim = Simulation::new(config, vec![machine], false)?;
    let mut scheduler = Scheduler::new(SchedulerStrategy::CwPriority);
    sim.start()?;
    let mut cw = Vec::new();
    loop {
        match sim.status() {
            Some(TerminalClass::Deadlock) => return Err(AnalysisError::Deadlock),
            Some(_) if sim.machines()[0].blocked_on().is_terminated() => break,
            _ => {}
        }
        if sim.step_count() >= step_cap {
            return Err(AnalysisError::StepCapExceeded(step_cap));
        }
        let event = scheduler.choose(&sim);
        // port 0 receives counter-clockwise pulses
        if event.port == Port::Zero {
            cw.push(sim.counters()[0].received_cw);
        }
        sim.deliver(event)?;
    }
    cw.push(sim.counters()[0].received_cw);
    Ok(SolitudePattern {
        t: cw.len() - 1,
        cw,
    })
}
