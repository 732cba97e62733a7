//! Fixtures shared by the benchmarks.

use obring_core::codec::Arrangement;
use obring_core::protocols::{ConstDirection, LogElection};
use obring_core::RingConfig;

/// Ring of `n` processes with identifiers `1..=n` in a scrambled order.
pub fn ring(n: usize) -> (RingConfig, Vec<u64>) {
    let ids: Vec<u64> = (0..n as u64).map(|k| (k * 5 + 3) % n as u64 + 1).collect();
    (
        RingConfig::with_ids(ids.clone(), n as u64).expect("n >= 1"),
        ids,
    )
}

pub fn log_machines(ids: &[u64], d: u64) -> Vec<LogElection> {
    let a = Arrangement::encoded(ids).expect("positive ids");
    a.ids()
        .iter()
        .map(|e| LogElection::new(e.clone(), d).expect("d >= 1"))
        .collect()
}

pub fn const_machines(ids: &[u64], bound: u64) -> Vec<ConstDirection> {
    ids.iter()
        .map(|&id| ConstDirection::new(id, bound).expect("positive inputs"))
        .collect()
}
