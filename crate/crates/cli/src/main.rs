//! `potts-verify`: verification campaigns for uniqueness of the 3-state
//! antiferromagnetic Potts model on regular trees.
//!
//! Exit codes: 0 all checks hold, 1 some check fails, 2 something is
//! undecided (and nothing fails), 64 usage error.

mod args;
mod campaign;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{MuSuiteCmd, ConditionCmd, FixedpointCmd, GammaCmd, PhistarCmd, SequencesCmd, SpotcheckCmd};
use report::{Checkpoint, RunReport};

const USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "potts-verify", version, about = "Certified checks for Potts-model uniqueness on d-ary trees")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "POTTS_WORKERS")]
    workers: Option<usize>,
    /// Write the JSON report to this file.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Format of the report printed to stdout.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Store per-sub-task results here and reuse them on the next run.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// The two-step contraction condition at the critical interaction.
    Condition(ConditionCmd),
    /// Rounded or exact bound sequences u_n, l_n.
    Sequences(SequencesCmd),
    /// Fixed-point exclusion boxes and iteration of the bound maps.
    Fixedpoint(FixedpointCmd),
    /// Worst-case marginal ratio on small trees.
    Gamma(GammaCmd),
    /// Closed-form derivatives against finite differences.
    Spotcheck(SpotcheckCmd),
    /// The q = 3 margin phi*(d, d0, alpha)^d < alpha over a (d, d0) grid.
    Phistar(PhistarCmd),
    /// Inequalities of the large-d critical-ratio argument.
    MuSuite(MuSuiteCmd),
    /// Every campaign with default settings, summarised as named claims.
    Report(campaign::ReportCmd),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Condition(_) => "condition",
            Cmd::Sequences(_) => "sequences",
            Cmd::Fixedpoint(_) => "fixedpoint",
            Cmd::Gamma(_) => "gamma",
            Cmd::Spotcheck(_) => "spotcheck",
            Cmd::Phistar(_) => "phistar",
            Cmd::MuSuite(_) => "mu-suite",
            Cmd::Report(_) => "report",
        }
    }

    fn echo(&self) -> serde_json::Value {
        match self {
            Cmd::Condition(c) => c.echo(),
            Cmd::Sequences(c) => c.echo(),
            Cmd::Fixedpoint(c) => c.echo(),
            Cmd::Gamma(c) => c.echo(),
            Cmd::Spotcheck(c) => c.echo(),
            Cmd::Phistar(c) => c.echo(),
            Cmd::MuSuite(c) => c.echo(),
            Cmd::Report(c) => c.echo(),
        }
    }
}

fn run(cli: &Cli) -> Result<RunReport, String> {
    let workers = match cli.workers {
        Some(0) => return Err("--workers must be positive".into()),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| e.to_string())?;
    let name = cli.cmd.name();
    let echo = cli.cmd.echo();
    let mut ck = match &cli.checkpoint {
        Some(dir) => Checkpoint::open(dir, name, &echo)?,
        None => Checkpoint::none(),
    };
    let start = Instant::now();
    let mut claims = Vec::new();
    let checks = pool.install(|| -> Result<_, String> {
        Ok(match &cli.cmd {
            Cmd::Condition(c) => c.run(&mut ck),
            Cmd::Sequences(c) => c.run(&mut ck)?,
            Cmd::Fixedpoint(c) => c.run(&mut ck),
            Cmd::Gamma(c) => c.run(&mut ck),
            Cmd::Spotcheck(c) => c.run()?,
            Cmd::Phistar(c) => c.run(&mut ck),
            Cmd::MuSuite(c) => c.run(),
            Cmd::Report(c) => {
                let (checks, cl) = c.run(&mut ck);
                claims = cl;
                checks
            }
        })
    })?;
    let mut report = RunReport::new(name, echo, checks, workers);
    if !claims.is_empty() {
        report.verdict = claims.iter().map(|c| c.verdict).max().unwrap_or(report.verdict);
        report.claims = claims;
    }
    report.resumed = ck.resumed;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match cli.format {
        Format::Json => println!("{text}"),
        Format::Text => print!("{}", report.text()),
    }
    ExitCode::from(report.exit_code() as u8)
}
