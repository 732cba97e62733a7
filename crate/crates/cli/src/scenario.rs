//! Scenario files: one JSON object describing what to simulate.
//!
//! ```json
//! {
//!   "algorithm": "log-election",
//!   "ids": [1, 2, 3],
//!   "d": "auto",
//!   "scheduler": { "strategy": "seeded-random", "seed": 7 },
//!   "repeat": 20
//! }
//! ```

use std::path::{Path, PathBuf};

use obring_core::protocols::{Exponent, RandomizedParams};
use obring_core::sim::{SchedulerStrategy, DEFAULT_STEP_CAP};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    LogElection,
    ConstDirection,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDistinct {
    pub seed: u64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdSpec {
    List(Vec<u64>),
    Random {
        #[serde(rename = "random-distinct")]
        random_distinct: RandomDistinct,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DSpec {
    Value(u64),
    Auto(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    #[default]
    SeededRandom,
    RoundRobin,
    CwPriority,
    Script,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerSpec {
    #[serde(default)]
    pub strategy: StrategyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default = "jsonl")]
    pub format: String,
}

fn jsonl() -> String {
    "jsonl".to_owned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<IdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<DSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_choices: Option<Vec<usize>>,
    #[serde(default)]
    pub scheduler: SchedulerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub hash: String,
    pub algorithm: Algorithm,
    /// Fixed identifiers; `None` for the randomized algorithm.
    pub ids: Option<Vec<u64>>,
    pub bound: u64,
    /// `d` for the elimination protocol (also the randomized one).
    pub d: u64,
    pub params: Option<RandomizedParams>,
    pub n_choices: Vec<usize>,
    pub strategy: StrategyName,
    pub script: Vec<u32>,
    pub seed: u64,
    pub step_cap: u64,
    pub state_cap: usize,
    pub repeat: u64,
    pub output: Option<PathBuf>,
}

impl Resolved {
    /// Scheduler for a run whose scheduler seed is `seed`.
    pub fn strategy_for(&self, seed: u64) -> SchedulerStrategy {
        match self.strategy {
            StrategyName::SeededRandom => SchedulerStrategy::SeededRandom(seed),
            StrategyName::RoundRobin => SchedulerStrategy::RoundRobin,
            StrategyName::CwPriority => SchedulerStrategy::CwPriority,
            StrategyName::Script => SchedulerStrategy::AdversarialScript(self.script.clone()),
        }
    }
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses scenario text; serde errors carry line and column.
pub fn parse(text: &str) -> Result<Scenario, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// SHA-256 of the canonical JSON form, so formatting does not matter.
pub fn scenario_hash(s: &Scenario) -> String {
    let canonical = serde_json::to_vec(s).expect("scenario serializes");
    hex::encode(Sha256::digest(&canonical))
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

fn draw_distinct(spec: &RandomDistinct, n: usize) -> Result<Vec<u64>, CliError> {
    if spec.max < n as u64 || spec.max > usize::MAX as u64 {
        return Err(invalid(
            "ids",
            format!("cannot draw {n} distinct ids from 1..={}", spec.max),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(sample(&mut rng, spec.max as usize, n)
        .into_iter()
        .map(|v| v as u64 + 1)
        .collect())
}

/// Validates `scenario` and fills in defaults. `seed` overrides the
/// scheduler seed from the file.
pub fn resolve(scenario: Scenario, seed: Option<u64>) -> Result<Resolved, CliError> {
    let s = &scenario;
    let hash = scenario_hash(s);
    let step_cap = s.step_cap.unwrap_or(DEFAULT_STEP_CAP);
    let repeat = s.repeat.unwrap_or(1);
    if repeat == 0 {
        return Err(invalid("repeat", "must be at least 1"));
    }
    if step_cap == 0 {
        return Err(invalid("step_cap", "must be at least 1"));
    }
    let script = s.scheduler.script.clone().unwrap_or_default();
    if s.scheduler.strategy == StrategyName::Script && script.is_empty() {
        return Err(invalid(
            "scheduler.script",
            "the script strategy needs a non-empty script",
        ));
    }
    if s.bound == Some(0) {
        return Err(invalid("U", "must be at least 1"));
    }

    let (ids, bound, d, params, n_choices) = match s.algorithm {
        Algorithm::LogElection | Algorithm::ConstDirection => {
            let ids = match &s.ids {
                Some(IdSpec::List(list)) => {
                    if s.n.is_some_and(|n| n != list.len()) {
                        return Err(invalid(
                            "n",
                            format!("{} ids given but n = {}", list.len(), s.n.unwrap()),
                        ));
                    }
                    list.clone()
                }
                Some(IdSpec::Random { random_distinct }) => {
                    let n =
                        s.n.ok_or_else(|| invalid("n", "required with random-distinct ids"))?;
                    draw_distinct(random_distinct, n)?
                }
                None => return Err(invalid("ids", "required for this algorithm")),
            };
            if ids.is_empty() {
                return Err(invalid("ids", "at least one process is needed"));
            }
            if ids.contains(&0) {
                return Err(invalid("ids", "identifiers must be positive"));
            }
            let n = ids.len();
            let bound = s.bound.unwrap_or(n as u64);
            if (n as u64) > bound {
                return Err(invalid("U", format!("n = {n} exceeds U = {bound}")));
            }
            let d = match s.d {
                None | Some(DSpec::Auto(_)) => bound,
                Some(DSpec::Value(0)) => return Err(invalid("d", "must be at least 1")),
                Some(DSpec::Value(d)) => d,
            };
            (Some(ids), bound, d, None, vec![n])
        }
        Algorithm::Randomized => {
            if s.ids.is_some() {
                return Err(invalid(
                    "ids",
                    "the randomized algorithm draws its own identifiers",
                ));
            }
            let bound = s
                .bound
                .ok_or_else(|| invalid("U", "required for the randomized algorithm"))?;
            let c = s.c.unwrap_or(Exponent::integer(1));
            let params = RandomizedParams::with_exponents(
                bound,
                c,
                s.c1.unwrap_or(c.plus(2)),
                s.c2.unwrap_or(c.plus(2)),
            )
            .map_err(|e| invalid("c", e))?;
            let n_choices = match (&s.n_choices, s.n) {
                (Some(list), _) => list.clone(),
                (None, Some(n)) => vec![n],
                (None, None) => {
                    let mut v = vec![(bound / 2).max(1) as usize, bound as usize];
                    v.dedup();
                    v
                }
            };
            if n_choices.is_empty() {
                return Err(invalid("n_choices", "must not be empty"));
            }
            if let Some(&n) = n_choices.iter().find(|&&n| n == 0 || n as u64 > bound) {
                return Err(invalid("n", format!("ring size {n} outside 1..={bound}")));
            }
            if s.d.is_some() {
                return Err(invalid(
                    "d",
                    "the randomized algorithm derives d from U and c2",
                ));
            }
            (None, bound, params.d(), Some(params), n_choices)
        }
    };

    let output = match &s.output {
        Some(o) if o.format != "jsonl" => {
            return Err(invalid(
                "output.format",
                format!("unsupported format {:?}", o.format),
            ))
        }
        Some(o) => Some(o.path.clone()),
        None => None,
    };

    Ok(Resolved {
        hash,
        algorithm: s.algorithm,
        ids,
        bound,
        d,
        params,
        n_choices,
        strategy: s.scheduler.strategy,
        script,
        seed: seed.or(s.scheduler.seed).unwrap_or(0),
        step_cap,
        state_cap: s.state_cap.unwrap_or(DEFAULT_STATE_CAP),
        repeat,
        output,
        scenario,
    })
}
