use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use obring_core::analysis::{
    judge_const_direction, judge_log_election, mc_randomized_success, trial_rng, Judgement,
};
use obring_core::codec::Arrangement;
use obring_core::protocols::{randomized_make_id, ConstDirection, LogElection, Machine};
use obring_core::sim::{
    explore_all, run_with, ExploreError, RunOptions, RunResult, SchedulerStrategy, TerminalClass,
};
use obring_core::RingConfig;
use rand::Rng;
use rayon::prelude::*;

use crate::record::{to_line, ExploreRecord, MonteCarloRecord, RunRecord, SignatureRecord};
use crate::scenario::{self, Algorithm, Resolved, StrategyName};
use crate::{CliError, Status};

/// Largest ring `explore` accepts; the state space grows very fast.
pub const EXPLORE_MAX_N: usize = 3;

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub trace_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Execute only this run index of a repeated scenario.
    pub only_run: Option<u64>,
    /// Refuse to run unless the scenario hashes to this value.
    pub expect_hash: Option<String>,
}

/// What a command produced, before anything is written.
#[derive(Debug, Clone)]
pub struct Output {
    pub status: Status,
    pub records: String,
    pub summary: String,
    pub witness_dir: Option<PathBuf>,
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn prepare(path: &Path, opts: &Options) -> Result<Resolved, CliError> {
    let resolved = scenario::resolve(scenario::load(path)?, opts.seed)?;
    if let Some(expected) = &opts.expect_hash {
        if !expected.eq_ignore_ascii_case(&resolved.hash) {
            return Err(CliError::Config(format!(
                "scenario hash {} does not match expected {expected}",
                resolved.hash
            )));
        }
    }
    Ok(resolved)
}

fn write_trace(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn simulate<M: Machine>(
    ids: &[u64],
    bound: u64,
    machines: Vec<M>,
    strategy: SchedulerStrategy,
    opts: &RunOptions,
) -> Result<RunResult, CliError> {
    let config =
        RingConfig::with_ids(ids.to_vec(), bound).map_err(|e| CliError::Config(e.to_string()))?;
    run_with(&config, machines, strategy, opts).map_err(|e| CliError::Config(e.to_string()))
}

fn log_machines(a: &Arrangement, d: u64) -> Result<Vec<LogElection>, CliError> {
    a.ids()
        .iter()
        .map(|e| LogElection::new(e.clone(), d).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

fn const_machines(ids: &[u64], bound: u64) -> Result<Vec<ConstDirection>, CliError> {
    ids.iter()
        .map(|&id| ConstDirection::new(id, bound).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

fn codec_err(e: obring_core::CodecError) -> CliError {
    CliError::Config(format!("field `ids`: {e}"))
}

fn one_run(r: &Resolved, run: u64, trace_dir: Option<&Path>) -> Result<RunRecord, CliError> {
    let mut rng = trial_rng(r.seed, run);
    let ids = match (&r.ids, &r.params) {
        (Some(ids), _) => ids.clone(),
        (None, Some(params)) => {
            let n = r.n_choices[rng.gen_range(0..r.n_choices.len())];
            (0..n)
                .map(|_| randomized_make_id(params, &mut rng))
                .collect()
        }
        (None, None) => unreachable!("resolve provides ids or parameters"),
    };
    let scheduler_seed: u64 = rng.gen();
    let strategy = r.strategy_for(scheduler_seed);
    let opts = RunOptions {
        step_cap: r.step_cap,
        record_trace: trace_dir.is_some(),
        check_invariants: false,
    };

    let (result, judgement, d): (RunResult, Judgement, Option<u64>) = match r.algorithm {
        Algorithm::LogElection | Algorithm::Randomized => {
            let a = if r.algorithm == Algorithm::Randomized {
                Arrangement::raw(&ids)
            } else {
                Arrangement::encoded(&ids)
            }
            .map_err(codec_err)?;
            let result = simulate(&ids, r.bound, log_machines(&a, r.d)?, strategy, &opts)?;
            let j = judge_log_election(&result, &a, r.d);
            (result, j, Some(r.d))
        }
        Algorithm::ConstDirection => {
            let result = simulate(
                &ids,
                r.bound,
                const_machines(&ids, r.bound)?,
                strategy,
                &opts,
            )?;
            let j = judge_const_direction(&result, &ids, r.bound);
            (result, j, None)
        }
    };

    if let (Some(dir), Some(trace)) = (trace_dir, &result.trace) {
        write_trace(dir, &format!("run-{run}.trace"), &trace.to_text())?;
    }
    let leaders = result.leaders();
    let (cw_per_proc, ccw_per_proc) = RunRecord::counts(&result);
    Ok(RunRecord {
        kind: "run",
        scenario_hash: r.hash.clone(),
        seed: r.seed,
        run,
        scheduler_seed: (r.strategy == StrategyName::SeededRandom).then_some(scheduler_seed),
        algorithm: r.algorithm,
        n: ids.len(),
        bound: r.bound,
        d,
        ids,
        terminal: result.terminal,
        steps: result.steps,
        leader: (leaders.len() == 1).then(|| leaders[0]),
        verdicts: result.verdicts,
        cw_per_proc,
        ccw_per_proc,
        counters: result.counters,
        passed: judgement.passed(),
        judgement,
    })
}

fn run_summary(r: &Resolved, records: &[RunRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {} algorithm {:?} seed {} runs {}",
        &r.hash[..12],
        r.algorithm,
        r.seed,
        records.len()
    );
    let _ = writeln!(
        s,
        "{:>6} {:>4} {:>7} {:>24} {:>10} {:>8} {:>8}  verdict",
        "run", "n", "leader", "terminal", "steps", "max cw", "max ccw"
    );
    for rec in records.iter().take(50) {
        let leader = rec.leader.map_or("-".to_owned(), |l| l.to_string());
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>7} {:>24} {:>10} {:>8} {:>8}  {}",
            rec.run,
            rec.n,
            leader,
            format!("{:?}", rec.terminal),
            rec.steps,
            rec.cw_per_proc.iter().max().unwrap_or(&0),
            rec.ccw_per_proc.iter().max().unwrap_or(&0),
            if rec.passed {
                "pass".to_owned()
            } else {
                format!("FAIL {:?}", rec.judgement.violated_names())
            }
        );
    }
    if records.len() > 50 {
        let _ = writeln!(s, "... {} more runs", records.len() - 50);
    }
    let passed = records.iter().filter(|r| r.passed).count();
    let _ = writeln!(s, "passed {passed}/{}", records.len());
    s
}

pub fn execute_run(r: &Resolved, opts: &Options) -> Result<Output, CliError> {
    let runs: Vec<u64> = match opts.only_run {
        Some(k) if k >= r.repeat => {
            return Err(CliError::Config(format!(
                "run {k} is outside 0..{}",
                r.repeat
            )))
        }
        Some(k) => vec![k],
        None => (0..r.repeat).collect(),
    };
    let trace_dir = opts.trace_dir.as_deref();
    let records: Vec<RunRecord> = in_pool(opts.jobs, || {
        runs.par_iter()
            .map(|&k| one_run(r, k, trace_dir))
            .collect::<Result<Vec<_>, _>>()
    })??;

    let status = if records
        .iter()
        .any(|rec| rec.terminal == TerminalClass::StepCapExceeded)
    {
        Status::CapsExceeded
    } else if records.iter().all(|rec| rec.passed) {
        Status::Pass
    } else {
        Status::JudgementFailure
    };
    Ok(Output {
        status,
        records: records.iter().map(to_line).collect(),
        summary: run_summary(r, &records),
        witness_dir: None,
    })
}

fn explore_with<M>(
    r: &Resolved,
    ids: &[u64],
    machines: Vec<M>,
) -> Result<obring_core::sim::ExploreReport, CliError>
where
    M: Machine + Clone + Eq + std::hash::Hash,
{
    let config =
        RingConfig::with_ids(ids.to_vec(), r.bound).map_err(|e| CliError::Config(e.to_string()))?;
    explore_all(&config, machines, r.step_cap, r.state_cap).map_err(|e| match e {
        ExploreError::Sim(e) => CliError::Config(e.to_string()),
        caps => CliError::CapsExceeded(caps.to_string()),
    })
}

pub fn execute_explore(r: &Resolved, opts: &Options) -> Result<Output, CliError> {
    let ids = match (&r.ids, r.algorithm) {
        (Some(ids), Algorithm::LogElection | Algorithm::ConstDirection) => ids.clone(),
        _ => {
            return Err(CliError::Config(
                "explore needs log-election or const-direction with fixed ids".into(),
            ))
        }
    };
    if ids.len() > EXPLORE_MAX_N {
        return Err(CliError::Config(format!(
            "field `ids`: explore is limited to n <= {EXPLORE_MAX_N}, got {}",
            ids.len()
        )));
    }
    let arrangement = Arrangement::encoded(&ids).map_err(codec_err)?;
    let report = in_pool(opts.jobs, || match r.algorithm {
        Algorithm::ConstDirection => explore_with(r, &ids, const_machines(&ids, r.bound)?),
        _ => explore_with(r, &ids, log_machines(&arrangement, r.d)?),
    })??;

    let judge = |result: &RunResult| match r.algorithm {
        Algorithm::ConstDirection => judge_const_direction(result, &ids, r.bound),
        _ => judge_log_election(result, &arrangement, r.d),
    };
    let signatures: Vec<SignatureRecord> = report
        .signatures
        .iter()
        .map(|(sig, witness)| {
            let result = RunResult {
                verdicts: sig.verdicts.clone(),
                counters: sig.counters.clone(),
                terminal: sig.terminal,
                steps: witness.len() as u64,
                seed: None,
                trace: None,
            };
            let judgement = judge(&result);
            SignatureRecord {
                verdicts: sig.verdicts.clone(),
                terminal: sig.terminal,
                counters: sig.counters.clone(),
                passed: judgement.passed(),
                judgement,
                witness: witness.clone(),
            }
        })
        .collect();

    let status = if signatures.len() == 1 && signatures[0].passed {
        Status::Pass
    } else {
        Status::JudgementFailure
    };

    let witness_dir = match (&opts.trace_dir, status) {
        (Some(dir), _) => Some(dir.clone()),
        (None, Status::JudgementFailure) => Some(
            tempfile::Builder::new()
                .prefix("obring-witness-")
                .tempdir()?
                .keep(),
        ),
        _ => None,
    };
    if let Some(dir) = &witness_dir {
        for (k, sig) in signatures.iter().enumerate() {
            let strategy = SchedulerStrategy::AdversarialScript(sig.witness.clone());
            let opts = RunOptions {
                step_cap: r.step_cap,
                record_trace: true,
                check_invariants: false,
            };
            let result = match r.algorithm {
                Algorithm::ConstDirection => simulate(
                    &ids,
                    r.bound,
                    const_machines(&ids, r.bound)?,
                    strategy,
                    &opts,
                )?,
                _ => simulate(
                    &ids,
                    r.bound,
                    log_machines(&arrangement, r.d)?,
                    strategy,
                    &opts,
                )?,
            };
            let text = result.trace.expect("traced").to_text();
            write_trace(dir, &format!("witness-{k}.trace"), &text)?;
        }
    }

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "scenario {} algorithm {:?} ids {:?} states {} max depth {}",
        &r.hash[..12],
        r.algorithm,
        ids,
        report.states,
        report.max_depth
    );
    for (k, sig) in signatures.iter().enumerate() {
        let cw: Vec<u64> = sig.counters.iter().map(|c| c.sent_cw).collect();
        let ccw: Vec<u64> = sig.counters.iter().map(|c| c.sent_ccw).collect();
        let _ = writeln!(
            summary,
            "signature {k}: {:?} {:?} cw {cw:?} ccw {ccw:?} {}",
            sig.terminal,
            sig.verdicts,
            if sig.passed { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(summary, "{} signature(s)", signatures.len());
    if let Some(dir) = &witness_dir {
        let _ = writeln!(summary, "witness traces in {}", dir.display());
    }

    let record = ExploreRecord {
        kind: "explore",
        scenario_hash: r.hash.clone(),
        algorithm: r.algorithm,
        n: ids.len(),
        bound: r.bound,
        d: (r.algorithm == Algorithm::LogElection).then_some(r.d),
        ids,
        states: report.states,
        max_depth: report.max_depth,
        signatures,
    };
    Ok(Output {
        status,
        records: to_line(&record),
        summary,
        witness_dir,
    })
}

pub fn execute_mc(r: &Resolved, opts: &Options) -> Result<Output, CliError> {
    let params = match (r.algorithm, r.params) {
        (Algorithm::Randomized, Some(p)) => p,
        _ => {
            return Err(CliError::Config(
                "field `algorithm`: mc needs the randomized algorithm".into(),
            ))
        }
    };
    let report = in_pool(opts.jobs, || {
        mc_randomized_success(&params, &r.n_choices, r.repeat, r.seed, r.step_cap)
    })?
    .map_err(|e| CliError::Config(e.to_string()))?;
    let passed = report.meets_bound() && report.formula_mismatches == 0;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "scenario {} U {} c {} c1 {} c2 {} d {} id bits {} n {:?}",
        &r.hash[..12],
        params.bound,
        params.c,
        params.c1,
        params.c2,
        params.d(),
        params.id_len(),
        r.n_choices
    );
    let _ = writeln!(
        summary,
        "trials {} successes {} estimate {:.6} bound {:.6} sigma {:.6}",
        report.trials, report.successes, report.estimate, report.bound, report.sigma
    );
    let f = report.failures;
    let _ = writeln!(
        summary,
        "collision {} scatter-violation {} wrong-leader {} non-quiescent {}",
        f.collision, f.scatter_violation, f.wrong_leader, f.non_quiescent
    );
    let _ = writeln!(
        summary,
        "cw per process on success: expected {} mismatches {}",
        params.expected_cw_per_process(),
        report.formula_mismatches
    );
    let _ = writeln!(summary, "{}", if passed { "pass" } else { "FAIL" });

    let record = MonteCarloRecord {
        kind: "montecarlo",
        scenario_hash: r.hash.clone(),
        bound: params.bound,
        c: params.c,
        c1: params.c1,
        c2: params.c2,
        d: params.d(),
        id_bits: params.id_len(),
        n_choices: r.n_choices.clone(),
        passed,
        report,
    };
    Ok(Output {
        status: if passed {
            Status::Pass
        } else {
            Status::JudgementFailure
        },
        records: to_line(&record),
        summary,
        witness_dir: None,
    })
}

/// Writes records to the scenario's output file, or to `stdout` when it
/// has none; the summary goes to whichever stream the records do not use.
fn emit(
    r: &Resolved,
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match &r.output {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, &out.records)?;
            stdout.write_all(out.summary.as_bytes())?;
        }
        None => {
            stdout.write_all(out.records.as_bytes())?;
            stderr.write_all(out.summary.as_bytes())?;
        }
    }
    Ok(())
}

type Exec = fn(&Resolved, &Options) -> Result<Output, CliError>;

fn command(
    exec: Exec,
    path: &Path,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Status {
    let result = prepare(path, opts).and_then(|r| {
        let out = exec(&r, opts)?;
        emit(&r, &out, stdout, stderr)?;
        Ok(out.status)
    });
    result.unwrap_or_else(|e| {
        let _ = writeln!(stderr, "error: {e}");
        Status::from(&e)
    })
}

pub fn cmd_run(
    path: &Path,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Status {
    command(execute_run, path, opts, stdout, stderr)
}

pub fn cmd_explore(
    path: &Path,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Status {
    command(execute_explore, path, opts, stdout, stderr)
}

pub fn cmd_mc(
    path: &Path,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Status {
    command(execute_mc, path, opts, stdout, stderr)
}
