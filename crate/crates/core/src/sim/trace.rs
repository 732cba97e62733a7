//! Line-oriented event log.
//!
//! One event per line, fields always in this order:
//!
//! ```text
//! step=<k> kind=<resume|deliver|send|return> proc=<j> port=<0|1|-> [verdict=<Leader|NonLeader>]
//! ```
//!
//! Initial resumptions are logged at step 0. Step `k >= 1` is the `k`-th
//! delivery; the sends and return it triggers carry the same step number.

use std::fmt;

use crate::ring::{Port, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Resume,
    Deliver,
    Send,
    Return(Verdict),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub step: u64,
    pub kind: TraceKind,
    pub process: usize,
    pub port: Option<Port>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            TraceKind::Resume => "resume",
            TraceKind::Deliver => "deliver",
            TraceKind::Send => "send",
            TraceKind::Return(_) => "return",
        };
        write!(
            f,
            "step={} kind={} proc={} port=",
            self.step, kind, self.process
        )?;
        match self.port {
            Some(p) => write!(f, "{p}")?,
            None => f.write_str("-")?,
        }
        if let TraceKind::Return(v) = self.kind {
            write!(f, " verdict={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
