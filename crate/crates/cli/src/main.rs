use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use metagibbs_cli::config::Overrides;
use metagibbs_cli::{run, CliError, SUITES};

#[derive(Parser)]
#[command(name = "metagibbs", version, about = "Exact generalization checks for Gibbs meta-learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Output directory for the report and tables.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Enumeration state cap.
        #[arg(long)]
        cap: Option<u128>,
    },
    /// List the available suites and their tolerances.
    ListSuites,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            for (name, about, tol) in SUITES {
                println!("{name:<16} {about} [{tol}]");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, trials, out, cap } => match run(&config, Overrides { seed, trials, cap }, &out) {
            Ok(r) => {
                for c in &r.report.checks {
                    let tag = match (c.passed, c.gating) {
                        (true, _) => "PASS",
                        (false, true) => "FAIL",
                        (false, false) => "INFO",
                    };
                    println!("{tag} {} = {:e} (tol {:e})", c.name, c.value, c.tolerance);
                }
                println!("report: {}", r.report_path.display());
                if r.report.passed {
                    ExitCode::SUCCESS
                } else {
                    let e = CliError::CheckFailed { failed: r.report.failed_gating(), total: r.report.checks.len() };
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
    }
}
