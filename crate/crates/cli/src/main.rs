//! Command-line front end: `wsansim run` and `wsansim compare`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use wsansim::config::{Manager, Overrides};
use wsansim::exec::{cmd_compare, cmd_run};

#[derive(Parser)]
#[command(
    name = "wsansim",
    about = "Discrete-event simulator of deadline-constrained traffic in a small \
             wireless sensor/actuator network, with optional fuzzy feedback scheduling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ManagerArg {
    None,
    Fuzzy,
}

impl From<ManagerArg> for Manager {
    fn from(m: ManagerArg) -> Self {
        match m {
            ManagerArg::None => Manager::None,
            ManagerArg::Fuzzy => Manager::Fuzzy,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute one scenario and write its metrics outputs.
    Run {
        /// Scenario configuration file (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// QoS manager, overriding the scenario file.
        #[arg(long)]
        manager: Option<ManagerArg>,
        /// Root seed, overriding the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Run duration in seconds, overriding the scenario file.
        #[arg(long)]
        duration: Option<f64>,
        /// Output directory for CSV files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write a per-event log (events.log).
        #[arg(long)]
        trace: bool,
    },
    /// Run the scenario open-loop and closed-loop and tabulate both.
    Compare {
        /// Scenario configuration file (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Root seed, overriding the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; sub-runs land in none/ and fuzzy/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.cmd {
        Cmd::Run { scenario, manager, seed, duration, out, trace } => {
            let overrides = Overrides {
                manager: manager.map(Into::into),
                seed,
                duration_s: duration,
            };
            cmd_run(&scenario, &overrides, &out, trace)
        }
        Cmd::Compare { scenario, seed, out } => {
            let overrides = Overrides { manager: None, seed, duration_s: None };
            cmd_compare(&scenario, &overrides, &out)
        }
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
