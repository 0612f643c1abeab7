use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use qcomm_cli::catalog::{describe, CATALOG};
use qcomm_cli::{bundled, run_scenario, ConfigError, Scenario};

#[derive(Parser)]
#[command(name = "qcomm", version, about = "Channel and measurement scenarios for quantum communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or bundled scenarios by name.
    Run {
        /// Paths to scenario JSON files or names from `qcomm list`.
        scenarios: Vec<String>,
        /// Run every bundled scenario.
        #[arg(long)]
        all: bool,
        /// Artifact directory; each scenario writes into a subdirectory.
        #[arg(long, default_value = "qcomm-out")]
        out: PathBuf,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the bundled scenarios.
    List,
    /// Show a bundled scenario and the relation it checks.
    Describe { name: String },
    /// Parse and check a scenario without running it.
    Validate { file: PathBuf },
}

fn load(arg: &str) -> Result<Scenario, ConfigError> {
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "json") || path.exists() {
        Scenario::from_file(path)
    } else {
        bundled(arg)
    }
}

fn run(names: Vec<String>, all: bool, out: PathBuf, jobs: Option<usize>) -> Result<bool, ConfigError> {
    let mut list: Vec<String> = if all { CATALOG.iter().map(|b| b.name.to_string()).collect() } else { Vec::new() };
    list.extend(names);
    if list.is_empty() {
        return Err(ConfigError::Invalid("nothing to run; give scenario names or files, or --all".into()));
    }
    let scenarios = list.iter().map(|a| load(a)).collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    let outputs = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| {
                let dir = out.join(&s.name);
                run_scenario(s, Some(&dir)).map(|o| (dir, o))
            })
            .collect::<Vec<_>>()
    });
    let mut passed = true;
    for (s, result) in scenarios.iter().zip(outputs) {
        let (dir, output) = result?;
        let r = &output.report;
        println!(
            "{:<22} {}  {} checks, {} failed  -> {}",
            s.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.checks.len(),
            r.failures().count(),
            dir.display()
        );
        for c in r.failures() {
            println!("    {}: {}", c.name, c.detail);
        }
        passed &= r.passed;
    }
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenarios, all, out, jobs } => run(scenarios, all, out, jobs),
        Command::List => {
            for b in CATALOG {
                let s = bundled(b.name).expect("bundled scenarios parse");
                println!("{:<22} {}", b.name, s.reproduces);
            }
            Ok(true)
        }
        Command::Describe { name } => describe(&name).map(|text| {
            println!("{text}");
            true
        }),
        Command::Validate { file } => Scenario::from_file(&file).and_then(|s| s.check().map(|_| s)).map(|s| {
            println!("{}: ok ({} states, {} analyses)", s.name, s.states.len(), s.analyses.len());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
