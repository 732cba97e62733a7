use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{is_d_scattered, Arrangement, EncodedId};
use crate::protocols::{randomized_make_id, LogElection, RandomizedParams};
use crate::ring::RingConfig;
use crate::sim::{run_with, Outcome, RunOptions, SchedulerStrategy, TerminalClass};

use super::AnalysisError;

/// How many trials showed each kind of trouble. A trial can land in several
/// buckets; collisions and scatter violations are input properties and are
/// counted whether or not the election still succeeded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTaxonomy {
    pub collision: u64,
    pub scatter_violation: u64,
    pub wrong_leader: u64,
    pub non_quiescent: u64,
}

impl FailureTaxonomy {
    fn merge(self, o: Self) -> Self {
        Self {
            collision: self.collision + o.collision,
            scatter_violation: self.scatter_violation + o.scatter_violation,
            wrong_leader: self.wrong_leader + o.wrong_leader,
            non_quiescent: self.non_quiescent + o.non_quiescent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Lower bound on the success probability being tested.
    pub bound: f64,
    /// Binomial standard deviation of an estimate at `bound`.
    pub sigma: f64,
    pub seed: u64,
    pub failures: FailureTaxonomy,
    /// Successful trials where some process sent a clockwise count other
    /// than `expected_cw_per_process`.
    pub formula_mismatches: u64,
    pub expected_cw_per_process: Option<u64>,
    /// Over successful trials: clockwise sends per process, and how many
    /// processes sent that many.
    pub success_cw_histogram: BTreeMap<u64, u64>,
}

impl MonteCarloReport {
    fn new(trials: u64, bound: f64, seed: u64) -> Self {
        let p = bound.clamp(0.0, 1.0);
        Self {
            trials,
            successes: 0,
            estimate: 0.0,
            bound,
            sigma: (p * (1.0 - p) / trials as f64).sqrt(),
            seed,
            failures: FailureTaxonomy::default(),
            formula_mismatches: 0,
            expected_cw_per_process: None,
            success_cw_histogram: BTreeMap::new(),
        }
    }

    fn finish(mut self, outcomes: impl Iterator<Item = TrialOutcome>) -> Self {
        for o in outcomes {
            self.successes += o.success as u64;
            self.failures = self.failures.merge(o.failures);
            self.formula_mismatches += o.formula_mismatch as u64;
            for cw in o.success_cw {
                *self.success_cw_histogram.entry(cw).or_default() += 1;
            }
        }
        self.estimate = self.successes as f64 / self.trials as f64;
        self
    }

    pub fn failure_fraction(&self) -> f64 {
        1.0 - self.estimate
    }

    /// One-sided check: the estimate is not more than 3 sigma below the bound.
    pub fn meets_bound(&self) -> bool {
        self.estimate >= self.bound - 3.0 * self.sigma
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    success: bool,
    failures: FailureTaxonomy,
    formula_mismatch: bool,
    success_cw: Vec<u64>,
}

/// Generator for trial `trial` of an experiment seeded with `seed`: the
/// master seed picks the key, the trial index picks the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn check_trials(params: &RandomizedParams, trials: u64, ns: &[usize]) -> Result<(), AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::BadParams("trials must be positive".into()));
    }
    if ns.is_empty() {
        return Err(AnalysisError::BadParams("no ring sizes given".into()));
    }
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n as u64 > params.bound) {
        return Err(AnalysisError::BadParams(format!(
            "ring size {n} outside 1..={}",
            params.bound
        )));
    }
    Ok(())
}

fn draw_ids(params: &RandomizedParams, n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..n).map(|_| randomized_make_id(params, rng)).collect()
}

fn has_collision(ids: &[u64]) -> bool {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

fn run_parallel(
    trials: u64,
    f: impl Fn(u64) -> Result<TrialOutcome, AnalysisError> + Sync + Send,
) -> Result<Vec<TrialOutcome>, AnalysisError> {
    (0..trials).into_par_iter().map(f).collect()
}

/// Runs the randomized election `trials` times. Each trial picks `n` from
/// `n_choices`, draws identifiers, and runs the elimination protocol under
/// a seeded random scheduler. Success means exactly one leader, everyone
/// else a non-leader, and a quiescent end.
pub fn mc_randomized_success(
    params: &RandomizedParams,
    n_choices: &[usize],
    trials: u64,
    seed: u64,
    step_cap: u64,
) -> Result<MonteCarloReport, AnalysisError> {
    check_trials(params, trials, n_choices)?;
    let d = params.d();
    let expected_cw = params.expected_cw_per_process();
    let options = RunOptions {
        step_cap,
        record_trace: false,
        check_invariants: false,
    };

    let outcomes = run_parallel(trials, |trial| {
        let mut rng = trial_rng(seed, trial);
        let n = n_choices[rng.gen_range(0..n_choices.len())];
        let ids = draw_ids(params, n, &mut rng);
        let scheduler_seed: u64 = rng.gen();

        let arrangement = Arrangement::raw(&ids).expect("drawn identifiers are positive");
        let machines = arrangement
            .ids()
            .iter()
            .map(|e: &EncodedId| LogElection::new(e.clone(), d))
            .collect::<Result<Vec<_>, _>>()?;
        let config = RingConfig::with_ids(ids.clone(), params.bound).expect("n >= 1");
        let result = run_with(
            &config,
            machines,
            SchedulerStrategy::SeededRandom(scheduler_seed),
            &options,
        )?;

        let leaders = result.leaders();
        let single_leader = leaders.len() == 1
            && result
                .verdicts
                .iter()
                .filter(|&&v| v == Outcome::NonLeader)
                .count()
                == n - 1;
        let quiescent = result.terminal == TerminalClass::Quiescent;
        let success = single_leader && quiescent;
        Ok(TrialOutcome {
            success,
            failures: FailureTaxonomy {
                collision: has_collision(&ids) as u64,
                scatter_violation: !is_d_scattered(&arrangement, d as usize) as u64,
                wrong_leader: !single_leader as u64,
                non_quiescent: !quiescent as u64,
            },
            formula_mismatch: success && result.counters.iter().any(|c| c.sent_cw != expected_cw),
            success_cw: if success {
                result.counters.iter().map(|c| c.sent_cw).collect()
            } else {
                Vec::new()
            },
        })
    })?;

    let mut report = MonteCarloReport::new(trials, params.success_bound(), seed);
    report.expected_cw_per_process = Some(expected_cw);
    Ok(report.finish(outcomes.into_iter()))
}

/// Probability that `n` uniform draws from `space` values are all distinct.
pub fn exact_collision_probability(space: u64, n: usize) -> f64 {
    let distinct: f64 = (0..n as u64)
        .map(|i| space.saturating_sub(i) as f64 / space as f64)
        .product();
    1.0 - distinct
}

/// Draws `n` identifiers per trial; success means they are all distinct.
/// The bound is `1 - U^(2 - c1)`.
pub fn mc_collisions(
    params: &RandomizedParams,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport, AnalysisError> {
    check_trials(params, trials, &[n])?;
    let outcomes = run_parallel(trials, |trial| {
        let ids = draw_ids(params, n, &mut trial_rng(seed, trial));
        let collision = has_collision(&ids);
        Ok(TrialOutcome {
            success: !collision,
            failures: FailureTaxonomy {
                collision: collision as u64,
                ..Default::default()
            },
            ..Default::default()
        })
    })?;
    let bound = 1.0 - (params.bound as f64).powf(2.0 - params.c1.as_f64());
    Ok(MonteCarloReport::new(trials, bound, seed).finish(outcomes.into_iter()))
}

/// Draws `n` identifiers per trial and checks `d`-scatteredness, with
/// `d = ceil(c2 log2 U)` unless overridden. The bound is
/// `1 - ceil(c1 log2 U) * U^(1 - c2)`, or 1 when `d >= n`.
pub fn mc_scatteredness(
    params: &RandomizedParams,
    n: usize,
    trials: u64,
    seed: u64,
    d: Option<u64>,
) -> Result<MonteCarloReport, AnalysisError> {
    check_trials(params, trials, &[n])?;
    let d = d.unwrap_or_else(|| params.d());
    if d == 0 {
        return Err(AnalysisError::BadParams("d must be positive".into()));
    }
    let outcomes = run_parallel(trials, |trial| {
        let ids = draw_ids(params, n, &mut trial_rng(seed, trial));
        let arrangement = Arrangement::raw(&ids).expect("drawn identifiers are positive");
        let scattered = is_d_scattered(&arrangement, d as usize);
        Ok(TrialOutcome {
            success: scattered,
            failures: FailureTaxonomy {
                scatter_violation: !scattered as u64,
                collision: has_collision(&ids) as u64,
                ..Default::default()
            },
            ..Default::default()
        })
    })?;
    let bound = if d as usize >= n {
        1.0
    } else {
        let bits = params.id_exponent() as f64;
        1.0 - bits * (params.bound as f64).powf(1.0 - params.c2.as_f64())
    };
    Ok(MonteCarloReport::new(trials, bound, seed).finish(outcomes.into_iter()))
}
