use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use calm::report::{self, tables, ExitStatus, RunOptions};
use calm::{CalmError, Money};

/// Capital at risk, capitalization ratio and funding gap reports.
///
/// Exit status: 0 healthy, 1 input error, 2 capitalization ratio at or
/// below the threshold.
#[derive(Parser, Debug)]
#[command(name = "calm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for tables, reports and charts.
    #[arg(long, default_value = "calm-out")]
    out: PathBuf,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the capitalization-ratio threshold for exit status 2, e.g. 1.05.
    #[arg(long)]
    threshold: Option<Money>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions { seed: self.seed, threshold: self.threshold }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capital at risk and capitalization ratio for one snapshot.
    Car {
        #[arg(long)]
        snapshot: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Bucketed funding gap for one snapshot.
    Liquidity {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        holders: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Both reports for every snapshot-YYYY-MM-DD.toml in a directory.
    Timeseries {
        /// Directory of dated snapshot and holder files.
        #[arg(long)]
        snapshot: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Capital and liquidity recommendations for one snapshot.
    Recommend {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        holders: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn diagnose(e: &CalmError) {
    match e {
        CalmError::Parse { path, problems } => {
            for p in problems {
                eprintln!("error: {}: {p}", path.display());
            }
        }
        CalmError::Validation(violations) => {
            for v in violations {
                eprintln!("error: validation: {v}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn wrote(out: &Path) {
    eprintln!("wrote {}", out.display());
}

fn run(cli: Cli) -> calm::Result<ExitStatus> {
    match cli.command {
        Command::Car { snapshot, common } => {
            let run = report::run_car(&snapshot, &common.scenario, &common.out, &common.options())?;
            print!("{}", run.summary());
            wrote(&common.out);
            Ok(run.status())
        }
        Command::Liquidity { snapshot, holders, common } => {
            let run = report::run_liquidity(&snapshot, &holders, &common.scenario, &common.out, &common.options())?;
            print!("{}", tables::gap_summary(&run.gap));
            wrote(&common.out);
            Ok(ExitStatus::Healthy)
        }
        Command::Timeseries { snapshot, common } => {
            let run = report::run_timeseries(&snapshot, &common.scenario, &common.out, &common.options())?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            for s in &run.skipped {
                eprintln!("skipped {}: {}", s.as_of, s.error);
            }
            for r in &run.rows {
                println!("{}  CaR {}  CR {}", r.as_of, tables::whole(r.total_car), r.cr);
            }
            wrote(&common.out);
            Ok(run.status())
        }
        Command::Recommend { snapshot, holders, common } => {
            let run = report::run_recommend(&snapshot, &holders, &common.scenario, &common.out, &common.options())?;
            print!("{}", run.car.summary());
            print!("{}", tables::gap_summary(&run.gap.gap));
            for r in &run.recommendations {
                println!("{}: {} ({})", r.kind, tables::whole(r.amount), r.rationale);
            }
            wrote(&common.out);
            Ok(run.car.status())
        }
    }
}

fn main() -> ExitCode {
    let status = match run(Cli::parse()) {
        Ok(s) => s,
        Err(e) => {
            diagnose(&e);
            ExitStatus::InputError
        }
    };
    ExitCode::from(status.code() as u8)
}
