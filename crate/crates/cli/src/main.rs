use clap::{Parser, Subcommand};
use setflow_cli::{
    bundled, describe, load_scenario_source, run_scenario_text, RunOptions, EXIT_CHECK_FAILED,
    EXIT_OK, EXIT_RESOLVE,
};

#[derive(Parser)]
#[command(name = "setflow", about = "Level-set flow laboratory: run scenarios and theorem checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (bundled name or path to a config file).
    Run {
        scenario: String,
        /// Override the grid spacing to 1/N.
        #[arg(long)]
        grid_override: Option<usize>,
        /// Dump every K-th sample of each set's track next to the report.
        #[arg(long)]
        dump_every: Option<usize>,
        /// Report file path (JSONL records, '#' comment lines carry timings).
        #[arg(long)]
        report: Option<std::path::PathBuf>,
        /// Seed for sampling point lattices; nothing else is randomized.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the bundled scenarios.
    List,
    /// Describe a check: statement, hypotheses, tolerance policy.
    Describe { id: String },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, grid_override, dump_every, report, seed } => {
            let opts = RunOptions { grid_override, dump_every, report_path: report, seed };
            match load_scenario_source(&scenario).and_then(|text| run_scenario_text(&text, &opts)) {
                Ok(outcome) => {
                    print!("{}", outcome.report.summary());
                    if outcome.all_passed() {
                        println!("{}: all checks passed", outcome.name);
                        EXIT_OK
                    } else {
                        println!("{}: CHECKS FAILED", outcome.name);
                        EXIT_CHECK_FAILED
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
        Command::List => {
            for name in bundled::names() {
                println!("{name}");
            }
            EXIT_OK
        }
        Command::Describe { id } => match describe::describe(&id) {
            Some(text) => {
                println!("{text}");
                EXIT_OK
            }
            None => {
                eprintln!(
                    "unknown check id: {id}\nknown ids: {}",
                    describe::known_ids().join(", ")
                );
                EXIT_RESOLVE
            }
        },
    };
    std::process::exit(code);
}
