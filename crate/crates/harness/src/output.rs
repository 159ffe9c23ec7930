//! CSV artifacts. Floats carry 17 significant digits.

use std::path::Path;

use sie_core::lab::LevelError;
use sie_core::stepper::StepDiagnostics;
use sie_core::{ErrorReport, ExceedanceTable, FitOutcome};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> csv::Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
}

/// One row per (path, level): `path_id, level, tau, sup_l2_error, sup_u_h1_error,
/// sup_pi_h1_error`, where `level` is the step count.
pub fn write_errors(path: &Path, report: &ErrorReport) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "path_id",
        "level",
        "tau",
        "sup_l2_error",
        "sup_u_h1_error",
        "sup_pi_h1_error",
    ])?;
    for p in &report.paths {
        for LevelError {
            steps,
            tau,
            sup_l2,
            sup_u_h1,
            sup_pi_h1,
            ..
        } in &p.levels
        {
            w.write_record([
                p.path_id.to_string(),
                steps.to_string(),
                float(*tau),
                float(*sup_l2),
                float(*sup_u_h1),
                float(*sup_pi_h1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn fit_fields(fit: &FitOutcome) -> [String; 4] {
    match fit {
        FitOutcome::Fitted(f) => [
            "fitted".into(),
            float(f.slope),
            float(f.intercept),
            float(f.r_squared),
        ],
        FitOutcome::Degenerate => [
            "degenerate".into(),
            String::new(),
            String::new(),
            String::new(),
        ],
    }
}

/// Per-level aggregates, then per-path and pooled fits, then aborted paths. The
/// `record` column tells the row kinds apart.
pub fn write_summary(path: &Path, report: &ErrorReport) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "record",
        "key",
        "tau",
        "mean",
        "median",
        "max",
        "status",
        "slope",
        "intercept",
        "r_squared",
    ])?;
    let empty = String::new;
    for s in &report.summaries {
        let status = if report.monotonicity_violations.contains(&s.steps) {
            "median_increased"
        } else {
            "ok"
        };
        w.write_record([
            "level".into(),
            s.steps.to_string(),
            float(s.tau),
            float(s.mean),
            float(s.median),
            float(s.max),
            status.into(),
            empty(),
            empty(),
            empty(),
        ])?;
    }
    for p in &report.paths {
        let [status, slope, intercept, r2] = fit_fields(&p.fit);
        w.write_record([
            "path_fit".into(),
            p.path_id.to_string(),
            empty(),
            empty(),
            empty(),
            empty(),
            status,
            slope,
            intercept,
            r2,
        ])?;
    }
    let [status, slope, intercept, r2] = fit_fields(&report.pooled_fit);
    w.write_record([
        "pooled_fit".into(),
        "all".into(),
        empty(),
        empty(),
        empty(),
        empty(),
        status,
        slope,
        intercept,
        r2,
    ])?;
    for a in &report.aborted {
        w.write_record([
            "aborted".into(),
            a.path_id.to_string(),
            empty(),
            empty(),
            empty(),
            empty(),
            a.reason.clone(),
            empty(),
            empty(),
            empty(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_exceedance(path: &Path, table: &ExceedanceTable) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "beta", "level", "tau", "exceed", "total", "fraction", "ci_low", "ci_high",
    ])?;
    for r in &table.rows {
        w.write_record([
            float(r.beta),
            r.steps.to_string(),
            float(r.tau),
            r.exceed.to_string(),
            r.total.to_string(),
            float(r.fraction),
            float(r.ci_low),
            float(r.ci_high),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_exceedance_trends(path: &Path, table: &ExceedanceTable) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["beta", "non_increasing", "finest_at_most_coarsest"])?;
    for t in &table.trends {
        w.write_record([
            float(t.beta),
            t.non_increasing.to_string(),
            t.finest_at_most_coarsest.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, diagnostics: &[StepDiagnostics]) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "step",
        "time",
        "l2_norm",
        "l4_norm",
        "iterations",
        "residual",
        "dense",
        "guard_ratio",
    ])?;
    for d in diagnostics {
        w.write_record([
            d.step.to_string(),
            float(d.time),
            float(d.l2_norm),
            float(d.l4_norm),
            d.iterations.to_string(),
            float(d.residual),
            d.dense.to_string(),
            float(d.guard_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
