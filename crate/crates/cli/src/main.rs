use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use obring_cli::{cmd_explore, cmd_mc, cmd_run, Options};

/// Simulate leader election on content-oblivious rings.
///
/// Exit codes: 0 pass, 1 configuration error, 2 judgement failure,
/// 3 step or state cap exceeded.
#[derive(Parser)]
#[command(name = "obring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and judge every run
    Run(Common),
    /// Enumerate every delivery order of a tiny scenario (n <= 3)
    Explore(Common),
    /// Monte Carlo estimate for the randomized algorithm
    Mc(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON)
    file: PathBuf,
    /// Master seed, overriding the scenario's scheduler seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for trace files
    #[arg(long, value_name = "DIR")]
    trace: Option<PathBuf>,
    /// Worker threads
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
    /// Only execute this run index (for replaying one record)
    #[arg(long, value_name = "INDEX")]
    run: Option<u64>,
    /// Fail unless the scenario hash matches
    #[arg(long, value_name = "HEX")]
    expect_hash: Option<String>,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            seed: self.seed,
            trace_dir: self.trace.clone(),
            jobs: self.jobs,
            only_run: self.run,
            expect_hash: self.expect_hash.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (mut stdout, mut stderr) = (std::io::stdout().lock(), std::io::stderr().lock());
    let status = match &cli.command {
        Command::Run(c) => cmd_run(&c.file, &c.options(), &mut stdout, &mut stderr),
        Command::Explore(c) => cmd_explore(&c.file, &c.options(), &mut stdout, &mut stderr),
        Command::Mc(c) => cmd_mc(&c.file, &c.options(), &mut stdout, &mut stderr),
    };
    ExitCode::from(status.code())
}
