//! `qpot` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpot::exec::{init_threads, Execution};
use qpot::scenario::{
    export_plots_data, preset, preset_names, run_scenario, to_json_string, verify, Check, RunOptions, ScenarioConfig,
    ScenarioResult,
};
use qpot::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qpot", version, about = "Quantum potential and heat-field numerics")]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config file.
    Simulate {
        config: PathBuf,
        /// Output directory (default: results/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep files written before a failing stage.
        #[arg(long)]
        keep_partial: bool,
    },
    /// Run the identity suite (`all` or a single check name).
    Verify {
        name: Option<String>,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a shipped preset, optionally overriding keys (`evolution.dt=1e-3`).
    Scenario {
        preset: String,
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        keep_partial: bool,
    },
    /// Flatten a result directory into plot-data/ for the plotting tools.
    ExportPlotsData { result_dir: PathBuf },
    /// List the shipped presets.
    Presets,
}

fn exit_for(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{}", c.line());
    }
}

fn run(
    cfg: &ScenarioConfig,
    out: Option<PathBuf>,
    keep_partial: bool,
    exec: Execution,
) -> Result<ScenarioResult, Error> {
    let out = out.unwrap_or_else(|| Path::new("results").join(cfg.name.name()));
    let r = run_scenario(cfg, &out, &RunOptions { keep_partial, exec })?;
    println!("wrote {} files to {}", r.manifest.files.len() + 1, out.display());
    print_checks(&r.audit.checks);
    Ok(r)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = std::env::var("QPOT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    init_threads(threads);
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };

    let outcome: Result<bool, Error> = match cli.command {
        Command::Simulate { config, out, keep_partial } => std::fs::read_to_string(&config)
            .map_err(|e| Error::Config(format!("{}: {e}", config.display())))
            .and_then(|text| ScenarioConfig::from_toml(&text))
            .and_then(|cfg| run(&cfg, out, keep_partial, exec))
            .map(|r| r.audit.passed),
        Command::Scenario { preset: name, overrides, out, keep_partial } => {
            preset(&name, &overrides).and_then(|cfg| run(&cfg, out, keep_partial, exec)).map(|r| r.audit.passed)
        }
        Command::Verify { name, json } => verify(name.as_deref()).and_then(|report| {
            print_checks(&report.checks);
            if let Some(path) = json {
                std::fs::write(&path, to_json_string(&report)?)?;
            }
            Ok(report.passed)
        }),
        Command::ExportPlotsData { result_dir } => export_plots_data(&result_dir).map(|dir| {
            println!("wrote {}", dir.display());
            true
        }),
        Command::Presets => {
            for n in preset_names() {
                println!("{n}");
            }
            Ok(true)
        }
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
