use serde::Serialize;

use crate::codec::{min_id_index, Arrangement, EncodedId};
use crate::ring::{Port, Verdict};
use crate::sim::{Outcome, RunResult, TerminalClass, Trace, TraceKind};

/// A broken claim, with the step where it shows up when that is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub name: &'static str,
    pub step: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Judgement {
    pub leader_ok: bool,
    pub quiescent_ok: bool,
    pub cw_count_ok: bool,
    pub ccw_count_ok: bool,
    pub violated: Vec<Violation>,
}

impl Judgement {
    pub fn passed(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn violated_names(&self) -> Vec<&'static str> {
        self.violated.iter().map(|v| v.name).collect()
    }
}

#[derive(Default)]
struct Builder {
    violated: Vec<Violation>,
}

impl Builder {
    fn check(
        &mut self,
        name: &'static str,
        ok: bool,
        step: Option<u64>,
        detail: impl FnOnce() -> String,
    ) -> bool {
        if !ok {
            self.violated.push(Violation {
                name,
                step,
                detail: detail(),
            });
        }
        ok
    }
}

/// Step of the first `return` by a process other than `leader`, or of a
/// wrong verdict.
fn first_bad_return(trace: Option<&Trace>, leader: Option<usize>) -> Option<u64> {
    trace?.events().iter().find_map(|e| match e.kind {
        TraceKind::Return(Verdict::Leader) if Some(e.process) != leader => Some(e.step),
        TraceKind::Return(Verdict::NonLeader) if Some(e.process) == leader => Some(e.step),
        _ => None,
    })
}

fn leader_check(b: &mut Builder, result: &RunResult, expected: Option<usize>) -> bool {
    let ok = expected.is_some_and(|leader| {
        result.verdicts.iter().enumerate().all(|(j, &v)| {
            v == if j == leader {
                Outcome::Leader
            } else {
                Outcome::NonLeader
            }
        })
    });
    b.check(
        "leader_ok",
        ok,
        first_bad_return(result.trace.as_ref(), expected),
        || match expected {
            None => "no unique minimum identifier".to_owned(),
            Some(leader) => format!(
                "expected p{leader} as sole leader, got {:?}",
                result.verdicts
            ),
        },
    )
}

fn quiescent_check(b: &mut Builder, result: &RunResult) -> bool {
    b.check(
        "quiescent_ok",
        result.terminal == TerminalClass::Quiescent,
        Some(result.steps),
        || format!("run ended as {:?}", result.terminal),
    )
}

/// The minimal encoded identifier, i.e. the one that survives every
/// elimination round (the first survivor if several tie).
pub fn min_encoding(a: &Arrangement) -> &EncodedId {
    let last = a.rounds().pop().expect("non-empty arrangement");
    let survivors = if last.zero.is_empty() {
        last.all
    } else {
        last.zero
    };
    &a.ids()[survivors[0]]
}

/// Checks a run of the elimination protocol: the minimum wins, the run
/// ends quiescently, every process sends exactly `(2 len(min) - 1) d`
/// clockwise and `1 + zeros(min)` counter-clockwise pulses.
pub fn judge_log_election(result: &RunResult, arrangement: &Arrangement, d: u64) -> Judgement {
    let mut b = Builder::default();
    let expected = min_id_index(arrangement).ok();
    let leader_ok = leader_check(&mut b, result, expected);
    let quiescent_ok = quiescent_check(&mut b, result);

    let min = min_encoding(arrangement);
    let cw_expected = (2 * min.len() as u64 - 1) * d;
    let ccw_expected = 1 + min.zero_count() as u64;
    let cw_bad: Vec<usize> = (0..result.n())
        .filter(|&j| result.counters[j].sent_cw != cw_expected)
        .collect();
    let ccw_bad: Vec<usize> = (0..result.n())
        .filter(|&j| result.counters[j].sent_ccw != ccw_expected)
        .collect();
    let cw_count_ok = b.check("cw_count_ok", cw_bad.is_empty(), Some(result.steps), || {
        format!("expected {cw_expected} clockwise sends each; off at processes {cw_bad:?}")
    });
    let ccw_count_ok = b.check("ccw_count_ok", ccw_bad.is_empty(), Some(result.steps), || {
        format!("expected {ccw_expected} counter-clockwise sends each; off at processes {ccw_bad:?}")
    });
    Judgement {
        leader_ok,
        quiescent_ok,
        cw_count_ok,
        ccw_count_ok,
        violated: b.violated,
    }
}

/// Checks a run of the three-counter-clockwise-pulse protocol: the minimum
/// wins, quiescent end, exactly 3 counter-clockwise sends and at most
/// `U * min + 2n` clockwise sends per process.
pub fn judge_const_direction(result: &RunResult, ids: &[u64], bound: u64) -> Judgement {
    let mut b = Builder::default();
    let min = ids.iter().copied().min().unwrap_or(0);
    let expected = match ids.iter().filter(|&&id| id == min).count() {
        1 => ids.iter().position(|&id| id == min),
        _ => None,
    };
    let leader_ok = leader_check(&mut b, result, expected);
    let quiescent_ok = quiescent_check(&mut b, result);

    let cw_limit = bound * min + 2 * ids.len() as u64;
    let cw_bad: Vec<usize> = (0..result.n())
        .filter(|&j| result.counters[j].sent_cw > cw_limit)
        .collect();
    let ccw_bad: Vec<usize> = (0..result.n())
        .filter(|&j| result.counters[j].sent_ccw != 3)
        .collect();
    let cw_count_ok = b.check("cw_count_ok", cw_bad.is_empty(), Some(result.steps), || {
        format!("clockwise sends above {cw_limit} at processes {cw_bad:?}")
    });
    let ccw_count_ok = b.check(
        "ccw_count_ok",
        ccw_bad.is_empty(),
        Some(result.steps),
        || format!("expected exactly 3 counter-clockwise sends; off at processes {ccw_bad:?}"),
    );
    Judgement {
        leader_ok,
        quiescent_ok,
        cw_count_ok,
        ccw_count_ok,
        violated: b.violated,
    }
}

/// No process returns `NonLeader` before `leader` has sent its final
/// counter-clockwise pulse (the one that starts the termination wave).
pub fn check_return_order(trace: &Trace, leader: usize) -> Result<(), Violation> {
    let events = trace.events();
    let last_leader_ccw = events.iter().rposition(|e| {
        e.kind == TraceKind::Send && e.process == leader && e.port == Some(Port::One)
    });
    let first_other_return = events
        .iter()
        .position(|e| matches!(e.kind, TraceKind::Return(_)) && e.process != leader);
    match (first_other_return, last_leader_ccw) {
        (Some(r), Some(s)) if r < s => Err(Violation {
            name: "return_order",
            step: Some(events[r].step),
            detail: format!(
                "p{} returned before the leader's final counter-clockwise send at step {}",
                events[r].process, events[s].step
            ),
        }),
        (Some(r), None) => Err(Violation {
            name: "return_order",
            step: Some(events[r].step),
            detail: "leader never sent counter-clockwise".to_owned(),
        }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{const_direction_new, log_election_new, LogElection};
    use crate::ring::RingConfig;
    use crate::sim::{run, run_with, ProcessCounters, RunOptions, SchedulerStrategy};

    fn log_run(
        ids: &[u64],
        d: u64,
        strategy: SchedulerStrategy,
        cap: u64,
    ) -> (RunResult, Arrangement) {
        let a = Arrangement::encoded(ids).unwrap();
        let machines: Vec<LogElection> = a
            .ids()
            .iter()
            .map(|e| log_election_new(e.clone(), d).unwrap())
            .collect();
        let config = RingConfig::with_ids(ids.to_vec(), ids.len() as u64).unwrap();
        let opts = RunOptions::with_step_cap(cap).traced();
        (run_with(&config, machines, strategy, &opts).unwrap(), a)
    }

    #[test]
    fn valid_log_run_passes() {
        for seed in 0..20 {
            let (r, a) = log_run(
                &[1, 2, 3],
                3,
                SchedulerStrategy::SeededRandom(seed),
                1 << 20,
            );
            let j = judge_log_election(&r, &a, 3);
            assert!(j.passed(), "{j:?}");
            assert_eq!(r.counters[0].sent_cw, 21);
            assert_eq!(r.counters[0].sent_ccw, 3);
            check_return_order(r.trace.as_ref().unwrap(), 0).unwrap();
        }
    }

    #[test]
    fn duplicate_minimum_fails_leader_check() {
        let (r, a) = log_run(&[1, 1, 3], 3, SchedulerStrategy::SeededRandom(1), 1 << 20);
        let j = judge_log_election(&r, &a, 3);
        assert!(!j.leader_ok);
        assert!(j.violated_names().contains(&"leader_ok"));
    }

    #[test]
    fn truncated_run_is_not_quiescent() {
        let (r, a) = log_run(&[1, 2, 3], 3, SchedulerStrategy::RoundRobin, 10);
        let j = judge_log_election(&r, &a, 3);
        assert!(!j.quiescent_ok);
        assert!(!j.passed());
    }

    #[test]
    fn const_direction_examples() {
        let ids = [2, 3, 4];
        let config = RingConfig::with_ids(ids.to_vec(), 3).unwrap();
        for seed in 0..100 {
            let machines = ids
                .iter()
                .map(|&id| const_direction_new(id, 3).unwrap())
                .collect();
            let r = run(
                &config,
                machines,
                SchedulerStrategy::SeededRandom(seed),
                1 << 20,
            )
            .unwrap();
            let j = judge_const_direction(&r, &ids, 3);
            assert!(j.passed(), "seed {seed}: {j:?}");
            assert!(r.counters.iter().all(|c| c.sent_cw <= 12));
        }
        let config = RingConfig::with_ids(vec![1], 2).unwrap();
        let r = run(
            &config,
            vec![const_direction_new(1, 2).unwrap()],
            SchedulerStrategy::RoundRobin,
            100,
        )
        .unwrap();
        assert!(judge_const_direction(&r, &[1], 2).passed());
        assert_eq!(
            r.counters[0],
            ProcessCounters {
                sent_cw: 2,
                sent_ccw: 3,
                received_cw: 2,
                received_ccw: 3
            }
        );
    }

    #[test]
    fn undersized_bound_can_elect_wrongly() {
        // With U = 1 < n the competition can finish before the minimum has
        // had a chance, so some scheduler must break correctness.
        let ids = [2, 3, 1, 4, 5];
        let config = RingConfig::with_ids(ids.to_vec(), 1).unwrap();
        let any_fail = (0..200).any(|seed| {
            let machines = ids
                .iter()
                .map(|&id| const_direction_new(id, 1).unwrap())
                .collect();
            let r = run(
                &config,
                machines,
                SchedulerStrategy::SeededRandom(seed),
                1 << 20,
            )
            .unwrap();
            !judge_const_direction(&r, &ids, 1).passed()
        });
        assert!(any_fail);
    }

    #[test]
    fn return_order_flags_early_return() {
        use crate::sim::TraceEvent;
        let mut t = Trace::new();
        t.push(TraceEvent {
            step: 3,
            kind: TraceKind::Return(Verdict::NonLeader),
            process: 1,
            port: None,
        });
        t.push(TraceEvent {
            step: 4,
            kind: TraceKind::Send,
            process: 0,
            port: Some(Port::One),
        });
        assert_eq!(check_return_order(&t, 0).unwrap_err().step, Some(3));
    }
}
