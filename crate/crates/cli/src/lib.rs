//! Command-line front end: `solve`, `trace`, `sweep-t`, `sweep-p` and
//! `baseline`. Summaries go to stdout, data to CSV files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 solver error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use uav_secrecy::experiments::{
    export_baseline, load_config_file, run_experiment, ExperimentKind, ExperimentOutcome, SolvePoint,
};
use uav_secrecy::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "uav-secrecy", version, about = "Secrecy-rate optimization for an AN-aided UAV link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve once at the configured horizon.
    Solve(Common),
    /// Convergence traces over the configured horizons.
    Trace(Common),
    /// ASR versus mission time.
    #[command(name = "sweep-t")]
    SweepT(Common),
    /// ASR versus average power.
    #[command(name = "sweep-p")]
    SweepP(Common),
    /// Export the baseline trajectory without optimizing.
    Baseline(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides experiment.output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scheme to run; repeat for several (overrides experiment.schemes).
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Reserved; the solver path is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (opts, kind) = match &cli.command {
        Command::Solve(c) => (c, ExperimentKind::Solve),
        Command::Trace(c) => (c, ExperimentKind::Trace),
        Command::SweepT(c) => (c, ExperimentKind::SweepTime),
        Command::SweepP(c) => (c, ExperimentKind::SweepPower),
        Command::Baseline(c) => (c, ExperimentKind::TrajectoryExport),
    };
    let (cfg, mut spec) = load_config_file(&opts.config, Some(kind))?;
    if let Some(out) = &opts.out {
        spec.output_dir = out.clone();
    }
    if !opts.schemes.is_empty() {
        spec.schemes = opts.schemes.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    }

    if let Command::Baseline(_) = cli.command {
        let path = export_baseline(&cfg, &[cfg.horizon_s], &spec.output_dir)?;
        println!("baseline trajectory T={} s written to {}", cfg.horizon_s, path.display());
        return Ok(EXIT_OK);
    }

    let outcome = run_experiment(&spec, &cfg)?;
    report(&outcome);
    Ok(if outcome.failures() > 0 { EXIT_SOLVER } else { EXIT_OK })
}

fn report(outcome: &ExperimentOutcome) {
    for p in &outcome.points {
        println!("{}", summary_line(p));
    }
    for w in &outcome.warnings {
        println!("warning: {w}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
}

fn summary_line(p: &SolvePoint) -> String {
    let b = &p.cfg.budgets;
    let head = format!(
        "{:<6} T={} s P_ave={:.3e} W lambda={}",
        p.scheme.name(),
        p.cfg.horizon_s,
        b.p_ave_w,
        b.split
    );
    match &p.result {
        Ok(r) => format!(
            "{head}: ASR {:.6} bps/Hz, {} iterations, {}",
            r.final_asr(),
            r.iterations,
            if r.converged { "converged" } else { "not converged" }
        ),
        Err(e) => format!("{head}: failed: {e}"),
    }
}
