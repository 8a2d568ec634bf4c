use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use nsto_dfo::harness::{comparison_table, run_suite, trace_csv, SuiteOutcome};
use nsto_dfo::{execute, suite, HarnessError, MethodKind, RunConfig, RunReport, SUITE_NAMES};

const EXIT_RUN_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_OBJECTIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "nsto-dfo", version, about = "Derivative-free optimization of test functions and atomic energies")]
struct Cli {
    /// Output directory for reports and traces.
    #[arg(long, global = true, env = "NSTO_DFO_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run config and write its JSON report and CSV trace.
    Run { config: PathBuf },
    /// Run a table-reproduction suite and print the comparison table.
    Suite {
        name: String,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Runs executed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    ListMethods,
    ListSuites,
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Config(_) => EXIT_CONFIG,
        HarnessError::Objective(_) => EXIT_OBJECTIVE,
        HarnessError::Run(_) => EXIT_RUN_FAILED,
    }
}

fn sanitize(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Writes `<stem>.json` and `<stem>.csv` under `dir`; returns the CSV path.
fn write_outputs(dir: &Path, stem: &str, report: &mut RunReport) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    fs::write(&csv_path, trace_csv(&report.trace, report.best_x.len()))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    report.trace_csv = Some(csv_path.display().to_string());
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(report)?)
        .with_context(|| format!("writing {}", json_path.display()))?;
    Ok(csv_path)
}

fn cmd_run(out: &Path, path: &Path) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut report = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let stem = if cfg.label.is_empty() {
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
    } else {
        sanitize(&cfg.label)
    };
    if let Err(e) = write_outputs(out, &stem, &mut report) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_RUN_FAILED);
    }
    println!(
        "{} best_f={:.12e} n_evals={} termination={} wall={:.3}s",
        cfg.method, report.best_f, report.n_evals, report.termination, report.wall_seconds
    );
    ExitCode::SUCCESS
}

fn cmd_suite(out: &Path, name: &str, method: Option<&str>, seed: Option<u64>, jobs: usize) -> ExitCode {
    let Some(s) = suite(name) else {
        eprintln!("error: unknown suite `{name}` (known: {})", SUITE_NAMES.join(", "));
        return ExitCode::from(EXIT_CONFIG);
    };
    let method = match method.map(str::parse::<MethodKind>).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: --method: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let s = s.filtered(method, seed);
    let mut outcomes: Vec<SuiteOutcome> = run_suite(&s, jobs);
    let dir = out.join(s.name);
    for o in &mut outcomes {
        if let Ok(r) = &mut o.report {
            if let Err(e) = write_outputs(&dir, &sanitize(&o.row.config.label), r) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_RUN_FAILED);
            }
        }
    }
    println!("{}: {}", s.name, s.description);
    print!("{}", comparison_table(&outcomes));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => cmd_run(&cli.out, &config),
        Command::Suite { name, method, seed, jobs } => cmd_suite(&cli.out, &name, method.as_deref(), seed, jobs),
        Command::ListMethods => {
            for m in MethodKind::ALL {
                println!("{m}");
            }
            ExitCode::SUCCESS
        }
        Command::ListSuites => {
            for n in SUITE_NAMES {
                let s = suite(n).expect("listed suite exists");
                println!("{n:<8} {}", s.description);
            }
            ExitCode::SUCCESS
        }
    }
}
