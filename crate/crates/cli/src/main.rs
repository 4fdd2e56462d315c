use clap::{Args, Parser, Subcommand};
use kirchhoff_cli::{measure, resonance, roundtrip, simulate, sweep, verify, CliError, Config, Failure};
use std::path::PathBuf;
use std::process::ExitCode;

/// Normal-form experiments for the Kirchhoff string equation.
#[derive(Parser)]
#[command(name = "kirchhoff", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. --set simulate.T=5.0 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and sampling
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory
    Simulate,
    /// Action drift of nonresonant small data against eps
    DriftSweep,
    /// Check the normal-form identities and write golden files
    NfVerify,
    /// Estimate the measure of U_gamma^N over a gamma grid
    Measure,
    /// Nonresonance report for one state
    Resonance,
    /// Round-trip the coordinate chain on random states
    Roundtrip,
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let mut cfg = Config::load(g.config.as_deref(), &g.overrides)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = g.out {
        cfg.out = o;
    }
    if g.threads.is_some() {
        cfg.threads = g.threads;
    }
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::new(Failure::Io, e.to_string()))?;
    }
    match cli.command {
        Command::Simulate => println!("{}", json(&simulate::run(&cfg)?)?),
        Command::DriftSweep => {
            let r = sweep::run(&cfg)?;
            for rec in &r.records {
                println!("eps={} T={} D={:e} norm_ratio={:.6}", rec.eps, rec.t_final, rec.drift, rec.norm_ratio_max);
            }
            match r.fit {
                Some(f) => println!("slope={:.4} se={:?}", f.slope, f.slope_se),
                None => println!("slope unavailable"),
            }
        }
        Command::NfVerify => {
            let r = verify::run(&cfg)?;
            for c in &r.checks {
                println!("{}", c.line());
            }
            verify::into_result(r)?;
        }
        Command::Measure => {
            let r = measure::run(&cfg)?;
            for rec in &r.records {
                println!("gamma={} fraction={} ci=[{:e}, {:e}]", rec.gamma, rec.fraction, rec.ci_low, rec.ci_high);
            }
            println!("{}", json(&r.fit)?);
        }
        Command::Resonance => println!("{}", json(&resonance::run(&cfg)?)?),
        Command::Roundtrip => println!("{}", json(&roundtrip::run(&cfg)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
