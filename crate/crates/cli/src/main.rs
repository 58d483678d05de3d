use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swipt_cli::complexity::{self, cmd_complexity_table, parse_pair};
use swipt_cli::solve::cmd_solve;
use swipt_cli::sweep::{self, run_sweep, Axis};
use swipt_cli::verify::cmd_verify;
use swipt_cli::{load_spec, parse_methods, parse_values, CliError, CliResult, SweepSpec};

#[derive(Parser)]
#[command(name = "swipt", version, about = "Null-space SWIPT beamforming experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON system configuration or sweep document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over one parameter, written as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated subset of full_sdr, nullspace_sdr, lowcomplexity.
        #[arg(long)]
        method: Option<String>,
        /// Swept parameter: P_max, T, kappa or M.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated, strictly increasing sweep values.
        #[arg(long)]
        values: Option<String>,
    },
    /// Lemma-1 certificate and invariant checks over many trials.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Complexity reductions against the full SDR.
    Complexity {
        /// Output file for the CSV table.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra scenario as K_I,M; repeatable.
        #[arg(long = "pair")]
        pairs: Vec<String>,
    },
    /// Solve one channel draw and dump beams and metrics as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Trial index of the channel draw.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        method: Option<String>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(common: &Common) -> CliResult<SweepSpec> {
    let mut spec = load_spec(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        spec.master_seed = seed;
    }
    spec.base.master_seed = spec.master_seed;
    Ok(spec)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Sweep {
            common,
            trials,
            method,
            axis,
            values,
        } => {
            let mut spec = load(&common)?;
            if let Some(a) = axis {
                spec.axis = Axis::parse(&a).ok_or_else(|| CliError::Config(format!("unknown axis {a:?}")))?;
                spec.values = spec.axis.default_values();
            }
            if let Some(v) = values {
                spec.values = parse_values(&v)?;
            }
            if let Some(m) = method {
                spec.methods = parse_methods(&m)?;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            let rows = run_sweep(&spec)?;
            emit(common.out.as_deref(), &sweep::to_csv(&rows))
        }
        Command::Verify { common, trials } => {
            let spec = load(&common)?;
            let summary = cmd_verify(&spec.base, trials.unwrap_or(spec.trials))?;
            print!("{}", summary.to_text());
            if let Some(p) = &common.out {
                let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
                std::fs::write(p, json + "\n")?;
            }
            if summary.passed() {
                Ok(())
            } else {
                Err(CliError::Invariant(format!("{} violation(s)", summary.violations.len())))
            }
        }
        Command::Complexity { out, pairs } => {
            let extra = pairs.iter().map(|p| parse_pair(p)).collect::<CliResult<Vec<_>>>()?;
            let rows = cmd_complexity_table(&extra)?;
            print!("{}", complexity::to_text(&rows));
            if let Some(p) = out {
                std::fs::write(p, complexity::to_csv(&rows))?;
            }
            Ok(())
        }
        Command::Solve { common, trial, method } => {
            let spec = load(&common)?;
            let methods = match method {
                Some(m) => parse_methods(&m)?,
                None => swipt_core::beamforming::Method::ALL.to_vec(),
            };
            let dump = cmd_solve(&spec.base, trial, &methods)?;
            let json = serde_json::to_string_pretty(&dump).map_err(|e| CliError::Config(e.to_string()))?;
            emit(common.out.as_deref(), &(json + "\n"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swipt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
