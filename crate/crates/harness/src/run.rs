//! Experiment dispatch and artifact layout.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use sie_core::lab::assemble_report;
use sie_core::{
    exceedance_table, run_path, sample_brownian_table, simulate_path, ErrorReport, ExceedanceTable,
    StudyConfig, Trajectory,
};

use crate::config::{ConfigError, Mode, RunConfig};
use crate::formats::{write_noise_table, write_trajectory, FormatError, TrajectoryHeader};
use crate::output;
use crate::selfcheck::{self, CheckResult};

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
pub const CONFIG_ECHO: &str = "config.txt";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        source: sie_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("writing {path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn core(context: &'static str) -> impl FnOnce(sie_core::Error) -> RunError {
    move |source| RunError::Core { context, source }
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_at(path: &Path) -> impl FnOnce(csv::Error) -> RunError + '_ {
    move |source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// What a run produced, for reporting on stdout.
#[derive(Debug)]
pub enum Outcome {
    Simulated(Trajectory),
    Converged(ErrorReport),
    ProbOrder(ErrorReport, ExceedanceTable),
    Selfcheck(Vec<CheckResult>),
}

impl Outcome {
    pub fn success(&self) -> bool {
        match self {
            Self::Selfcheck(results) => results.iter().all(|r| r.passed),
            _ => true,
        }
    }
}

/// Runs every path of `study` on a pool of `workers` threads. Results are reduced in
/// ascending path id, so the report does not depend on `workers`.
pub fn run_study(study: &StudyConfig, workers: usize) -> Result<ErrorReport, RunError> {
    study.validate().map_err(core("study configuration"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| {
        (0..study.paths as u64)
            .into_par_iter()
            .map(|id| {
                let outcome = run_path(study, id);
                match &outcome {
                    Ok(p) => info!("path {id} done, fit {:?}", p.fit),
                    Err(e) => warn!("path {id} aborted: {e}"),
                }
                (id, outcome)
            })
            .collect()
    });
    assemble_report(study, outcomes).map_err(core("pathwise error study"))
}

/// Runs `cfg`, writing artifacts below `cfg.out`. The output directory carries an
/// `INCOMPLETE` marker until every artifact is written.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    if cfg.mode == Mode::Selfcheck {
        return Ok(Outcome::Selfcheck(selfcheck::run_all()));
    }
    let out = cfg.out.as_path();
    fs::create_dir_all(out).map_err(io_at(out))?;
    let marker = out.join(INCOMPLETE_MARKER);
    fs::write(&marker, format!("{} run in progress\n", cfg.mode)).map_err(io_at(&marker))?;
    let echo = out.join(CONFIG_ECHO);
    fs::write(&echo, cfg.to_text()).map_err(io_at(&echo))?;

    let result = match cfg.mode {
        Mode::Simulate => simulate(cfg, out).map(Outcome::Simulated),
        Mode::Converge => converge(cfg, out).map(Outcome::Converged),
        Mode::ProbOrder => prob_order(cfg, out).map(|(r, t)| Outcome::ProbOrder(r, t)),
        Mode::Selfcheck => unreachable!(),
    };
    match &result {
        Ok(_) => fs::remove_file(&marker).map_err(io_at(&marker))?,
        Err(e) => {
            // Best effort: the original error matters more than a failed note.
            let _ = fs::write(&marker, format!("{} run failed: {e}\n", cfg.mode));
        }
    }
    result
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Trajectory, RunError> {
    let study = cfg.study();
    let spectrum = study.spectrum().map_err(core("noise spectrum"))?;
    let table = sample_brownian_table(&spectrum, cfg.steps, cfg.t_end, cfg.seed, cfg.path_id)
        .map_err(core("noise table"))?;
    if cfg.dump_noise {
        let path = out.join("noise.siew");
        let mut w = BufWriter::new(File::create(&path).map_err(io_at(&path))?);
        write_noise_table(&mut w, &table).map_err(io_at(&path))?;
    }
    let xi0 = cfg
        .xi0
        .build(cfg.n_modes)
        .map_err(core("initial condition"))?;
    let trajectory =
        simulate_path(&xi0, &spectrum, &table, 0, &cfg.stepper()).map_err(core("simulation"))?;

    let path = out.join("trajectory.siet");
    let header = TrajectoryHeader {
        t_end: cfg.t_end,
        steps: cfg.steps as u64,
        level: 0,
        seed: cfg.seed,
        path_id: cfg.path_id,
        c0: cfg.c0,
        r: cfg.r,
        tau: trajectory.tau(),
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io_at(&path))?);
    write_trajectory(&mut w, &header, &trajectory).map_err(io_at(&path))?;
    drop(w);
    if let Some(diagnostics) = &trajectory.diagnostics {
        let path = out.join("diagnostics.csv");
        output::write_diagnostics(&path, diagnostics).map_err(csv_at(&path))?;
    }
    Ok(trajectory)
}

fn write_report(out: &Path, report: &ErrorReport) -> Result<(), RunError> {
    let errors = out.join("errors.csv");
    output::write_errors(&errors, report).map_err(csv_at(&errors))?;
    let summary = out.join("summary.csv");
    output::write_summary(&summary, report).map_err(csv_at(&summary))
}

fn converge(cfg: &RunConfig, out: &Path) -> Result<ErrorReport, RunError> {
    let report = run_study(&cfg.study(), cfg.workers)?;
    write_report(out, &report)?;
    Ok(report)
}

fn prob_order(cfg: &RunConfig, out: &Path) -> Result<(ErrorReport, ExceedanceTable), RunError> {
    let report = run_study(&cfg.study(), cfg.workers)?;
    let table = exceedance_table(&report, &cfg.betas).map_err(core("exceedance table"))?;
    write_report(out, &report)?;
    let path = out.join("exceedance.csv");
    output::write_exceedance(&path, &table).map_err(csv_at(&path))?;
    let path = out.join("exceedance_trend.csv");
    output::write_exceedance_trends(&path, &table).map_err(csv_at(&path))?;
    for t in table.trends.iter().filter(|t| !t.finest_at_most_coarsest) {
        warn!(
            "β = {}: exceedance at the finest level exceeds the coarsest",
            t.beta
        );
    }
    Ok((report, table))
}
