use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sie_harness::config::Mode;
use sie_harness::run::Outcome;
use sie_harness::{run, selfcheck, RunConfig};

#[derive(Parser)]
#[command(
    name = "sie",
    version,
    about = "Splitting semi-implicit Euler runs for the 2D stochastic Euler equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write its trajectory and diagnostics.
    Simulate(Common),
    /// Pathwise sup-in-time errors against a fine reference, with order fits.
    Converge(Common),
    /// Exceedance probabilities of the pathwise errors.
    ProbOrder(Common),
    /// Run the invariant checks and print a pass/fail table.
    Selfcheck(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Step count (simulate).
    #[arg(long = "n")]
    steps: Option<usize>,
    /// Step counts, `16,32,64` or `16..512`.
    #[arg(long)]
    levels: Option<String>,
    /// Truncation radius.
    #[arg(long = "N")]
    truncation: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    /// Noise decay exponent.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Any other configuration key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn flags(&self) -> Result<Vec<(&str, String)>, String> {
        let mut flags = Vec::new();
        let mut push = |key, value: Option<String>| {
            if let Some(v) = value {
                flags.push((key, v));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("workers", self.workers.map(|v| v.to_string()));
        push("n", self.steps.map(|v| v.to_string()));
        push("levels", self.levels.clone());
        push("N", self.truncation.map(|v| v.to_string()));
        push("T", self.t_end.map(|v| v.to_string()));
        push("c0", self.c0.map(|v| v.to_string()));
        push("r", self.r.map(|v| v.to_string()));
        push("paths", self.paths.map(|v| v.to_string()));
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            flags.push((k.trim(), v.trim().to_string()));
        }
        Ok(flags)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, common) = match &cli.command {
        Command::Simulate(c) => (Mode::Simulate, c),
        Command::Converge(c) => (Mode::Converge, c),
        Command::ProbOrder(c) => (Mode::ProbOrder, c),
        Command::Selfcheck(c) => (Mode::Selfcheck, c),
    };
    let cfg = match common.flags().and_then(|f| {
        RunConfig::load(common.config.as_deref(), &f, Some(mode)).map_err(|e| e.to_string())
    }) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            report(&cfg, &outcome);
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn report(cfg: &RunConfig, outcome: &Outcome) {
    match outcome {
        Outcome::Selfcheck(results) => print!("{}", selfcheck::render(results)),
        Outcome::Simulated(traj) => {
            let last = traj.states.last().expect("at least the initial state");
            println!(
                "simulated {} steps of τ = {:e}; final |ξ|₂ = {:.16e}; output in {}",
                traj.steps(),
                traj.tau(),
                last.l2_norm(),
                cfg.out.display()
            );
        }
        Outcome::Converged(report) | Outcome::ProbOrder(report, _) => {
            println!("{:>8} {:>24} {:>24} {:>24}", "n", "mean", "median", "max");
            for s in &report.summaries {
                println!(
                    "{:>8} {:>24.16e} {:>24.16e} {:>24.16e}",
                    s.steps, s.mean, s.median, s.max
                );
            }
            for p in &report.paths {
                match p.fit.fitted() {
                    Some(f) => println!(
                        "path {}: slope {:.4}, R² {:.4}",
                        p.path_id, f.slope, f.r_squared
                    ),
                    None => println!("path {}: degenerate fit", p.path_id),
                }
            }
            for a in &report.aborted {
                println!("path {} aborted: {}", a.path_id, a.reason);
            }
            if let Outcome::ProbOrder(_, table) = outcome {
                for t in &table.trends {
                    println!(
                        "β = {}: non-increasing {}, finest ≤ coarsest {}",
                        t.beta, t.non_increasing, t.finest_at_most_coarsest
                    );
                }
            }
            println!("artifacts in {}", cfg.out.display());
        }
    }
}
