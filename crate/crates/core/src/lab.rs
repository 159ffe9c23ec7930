//! Self-convergence experiments.
//!
//! Every level of a study for one path is driven by the same Brownian table, sampled
//! at the reference resolution `τ_ref = τ_min / 2^ref_extra` and coarsened by exact
//! dyadic sums. Errors are measured against the reference trajectory at the coarse
//! grid points, with the spatial truncation held fixed.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::initial::InitialCondition;
use crate::noise::{build_spectrum, sample_brownian_table, NoiseSpectrum};
use crate::spectral::{SpectralField, VelocityField};
use crate::stepper::{recover_observables, simulate_path, StepperConfig, Trajectory};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Truncation radius `N`.
    pub n: usize,
    pub t_end: f64,
    pub initial: InitialCondition,
    /// Noise amplitude; zero switches the noise off.
    pub c0: f64,
    pub decay: f64,
    /// Step counts `n_0, 2n_0, 4n_0, …`.
    pub levels: Vec<usize>,
    pub ref_extra: u32,
    pub paths: usize,
    pub master_seed: u64,
    /// Solver settings; `tau` is replaced per level.
    pub stepper: StepperConfig,
}

impl StudyConfig {
    pub fn new(n: usize, t_end: f64, levels: Vec<usize>) -> Self {
        Self {
            n,
            t_end,
            initial: InitialCondition::Preset3Mode,
            c0: 0.1,
            decay: 6.0,
            levels,
            ref_extra: 2,
            paths: 3,
            master_seed: 0,
            stepper: StepperConfig::new(1.0),
        }
    }

    /// `N = 16`, `T = 0.5`, `n ∈ {16, …, 512}`.
    pub fn default_study() -> Self {
        Self::new(16, 0.5, vec![16, 32, 64, 128, 256, 512])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("truncation radius", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(invalid("final time", "must be a positive finite number"));
        }
        if !(self.c0.is_finite() && self.c0 >= 0.0) {
            return Err(invalid(
                "noise amplitude c0",
                "must be finite and non-negative",
            ));
        }
        if !(self.decay.is_finite() && self.decay > 0.0) {
            return Err(invalid("decay exponent", "must be positive"));
        }
        if self.paths == 0 {
            return Err(invalid("path count", "must be at least 1"));
        }
        let first = *self
            .levels
            .first()
            .ok_or_else(|| invalid("levels", "at least one level is required"))?;
        if first == 0 {
            return Err(invalid("levels", "step counts must be positive"));
        }
        for pair in self.levels.windows(2) {
            if pair[1] != 2 * pair[0] {
                return Err(invalid(
                    "levels",
                    alloc::format!("{} does not double {}", pair[1], pair[0]),
                ));
            }
        }
        self.reference_steps()
            .ok_or_else(|| invalid("reference refinement", "reference step count overflows"))?;
        self.stepper.with_tau(1.0).validate()
    }

    /// `max level × 2^ref_extra`.
    pub fn reference_steps(&self) -> Option<usize> {
        let max = *self.levels.last()?;
        max.checked_mul(1usize.checked_shl(self.ref_extra)?)
            .filter(|v| v / max == 1 << self.ref_extra)
    }

    pub fn spectrum(&self) -> Result<NoiseSpectrum> {
        if self.c0 == 0.0 {
            NoiseSpectrum::silent(self.n)
        } else {
            build_spectrum(self.n, self.c0, self.decay)
        }
    }

    fn coarsening(&self, steps: usize) -> u32 {
        let reference = self.reference_steps().expect("validated config");
        (reference / steps).trailing_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitOutcome {
    Fitted(OrderFit),
    /// Some error was zero (or fewer than three levels were run); no slope exists.
    Degenerate,
}

impl FitOutcome {
    pub fn fitted(&self) -> Option<OrderFit> {
        match self {
            Self::Fitted(f) => Some(*f),
            Self::Degenerate => None,
        }
    }
}

/// Least-squares fit of `log(error)` against `log(τ)`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<FitOutcome> {
    if points.len() < 3 {
        return Err(invalid(
            "fit points",
            "at least three (τ, error) pairs are required",
        ));
    }
    if points
        .iter()
        .any(|&(tau, _)| !(tau.is_finite() && tau > 0.0))
    {
        return Err(invalid(
            "fit points",
            "step sizes must be positive and finite",
        ));
    }
    if points.iter().any(|&(_, e)| !(e.is_finite() && e > 0.0)) {
        return Ok(FitOutcome::Degenerate);
    }
    let count = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1)).collect();
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    if sxx == 0.0 {
        return Err(invalid("fit points", "step sizes must not all coincide"));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(FitOutcome::Fitted(OrderFit {
        slope,
        intercept,
        r_squared,
    }))
}

/// Sup-in-time errors of one level of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub steps: usize,
    pub tau: f64,
    /// `sup_i |ξ_i - ξ_ref(t_i)|₂`.
    pub sup_l2: f64,
    /// `sup_i ‖u_i - u_ref(t_i)‖₁`.
    pub sup_u_h1: f64,
    /// `sup_i ‖π_i - π_ref(t_i)‖₁`.
    pub sup_pi_h1: f64,
    /// `sup_i (‖u_i - u_ref(t_i)‖₁ + ‖π_i - π_ref(t_i)‖₁)`.
    pub sup_observable: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathErrors {
    pub path_id: u64,
    pub levels: Vec<LevelError>,
    pub fit: FitOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathAbort {
    pub path_id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub steps: usize,
    pub tau: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Completed paths in ascending `path_id`.
    pub paths: Vec<PathErrors>,
    pub aborted: Vec<PathAbort>,
    pub summaries: Vec<LevelSummary>,
    /// Fit over the `(τ, sup_l2)` points of every completed path.
    pub pooled_fit: FitOutcome,
    /// Step counts whose median sup-error exceeds that of the next coarser level.
    pub monotonicity_violations: Vec<usize>,
}

struct ObservableCache {
    u: VelocityField,
    pressure: SpectralField,
}

fn observables(xi: &SpectralField) -> ObservableCache {
    let (u, pressure) = recover_observables(xi);
    ObservableCache { u, pressure }
}

fn check_alignment(coarse: &Trajectory, reference: &Trajectory) -> Result<usize> {
    if coarse.t_end != reference.t_end {
        return Err(Error::MisalignedGrids(alloc::format!(
            "final times {} and {} differ",
            coarse.t_end,
            reference.t_end
        )));
    }
    let (n, n_ref) = (coarse.steps(), reference.steps());
    if n == 0 || n_ref % n != 0 {
        return Err(Error::MisalignedGrids(alloc::format!(
            "{n} coarse steps do not embed in {n_ref} reference steps"
        )));
    }
    Ok(n_ref / n)
}

/// `(‖u_i - u_ref(t_i)‖₁, ‖π_i - π_ref(t_i)‖₁)` for `i = 0, …, n`.
pub fn observable_errors(coarse: &Trajectory, reference: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let ratio = check_alignment(coarse, reference)?;
    coarse
        .states
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let ours = observables(xi);
            let theirs = observables(&reference.states[i * ratio]);
            Ok((
                (&ours.u - &theirs.u).sobolev_norm(1),
                (&ours.pressure - &theirs.pressure).sobolev_norm(1),
            ))
        })
        .collect()
}

/// Runs the reference and every level of `cfg` on path `path_id`.
pub fn run_path(cfg: &StudyConfig, path_id: u64) -> Result<PathErrors> {
    cfg.validate()?;
    let spectrum = cfg.spectrum()?;
    let reference_steps = cfg.reference_steps().expect("validated config");
    let table = sample_brownian_table(
        &spectrum,
        reference_steps,
        cfg.t_end,
        cfg.master_seed,
        path_id,
    )?;
    let xi0 = cfg.initial.build(cfg.n)?;
    let stepper = cfg.stepper.with_tau(table.step_size(0)?);
    let reference = simulate_path(&xi0, &spectrum, &table, 0, &stepper)?;

    // Every coarse grid point is a multiple of the finest coarse step.
    let stride = 1usize << cfg.coarsening(*cfg.levels.last().expect("validated config"));
    let reference_obs: Vec<Option<ObservableCache>> = reference
        .states
        .iter()
        .enumerate()
        .map(|(i, xi)| (i % stride == 0).then(|| observables(xi)))
        .collect();

    let mut levels = Vec::with_capacity(cfg.levels.len());
    for &steps in &cfg.levels {
        let level = cfg.coarsening(steps);
        let tau = table.step_size(level)?;
        let coarse = simulate_path(&xi0, &spectrum, &table, level, &cfg.stepper.with_tau(tau))?;
        let ratio = check_alignment(&coarse, &reference)?;
        let mut err = LevelError {
            steps,
            tau,
            sup_l2: 0.0,
            sup_u_h1: 0.0,
            sup_pi_h1: 0.0,
            sup_observable: 0.0,
        };
        for (i, xi) in coarse.states.iter().enumerate().skip(1) {
            let j = i * ratio;
            err.sup_l2 = err.sup_l2.max((xi - &reference.states[j]).l2_norm());
            let ours = observables(xi);
            let theirs = reference_obs[j].as_ref().expect("cached reference point");
            let du = (&ours.u - &theirs.u).sobolev_norm(1);
            let dp = (&ours.pressure - &theirs.pressure).sobolev_norm(1);
            err.sup_u_h1 = err.sup_u_h1.max(du);
            err.sup_pi_h1 = err.sup_pi_h1.max(dp);
            err.sup_observable = err.sup_observable.max(du + dp);
        }
        levels.push(err);
    }
    let points: Vec<(f64, f64)> = levels.iter().map(|l| (l.tau, l.sup_l2)).collect();
    let fit = if points.len() < 3 {
        FitOutcome::Degenerate
    } else {
        fit_order(&points)?
    };
    Ok(PathErrors {
        path_id,
        levels,
        fit,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

/// Reduces per-path outcomes (any order) into a report. Fails when more than 20% of
/// the paths aborted.
pub fn assemble_report(
    cfg: &StudyConfig,
    mut outcomes: Vec<(u64, Result<PathErrors>)>,
) -> Result<ErrorReport> {
    outcomes.sort_by_key(|(id, _)| *id);
    let total = outcomes.len();
    let mut paths = Vec::new();
    let mut aborted = Vec::new();
    for (path_id, outcome) in outcomes {
        match outcome {
            Ok(p) => paths.push(p),
            Err(e) => aborted.push(PathAbort {
                path_id,
                reason: e.to_string(),
            }),
        }
    }
    if aborted.len() * 5 > total || paths.is_empty() {
        return Err(Error::StudyFailed {
            aborted: aborted.len(),
            total,
        });
    }

    let summaries: Vec<LevelSummary> = cfg
        .levels
        .iter()
        .enumerate()
        .map(|(j, &steps)| {
            let mut errs: Vec<f64> = paths.iter().map(|p| p.levels[j].sup_l2).collect();
            errs.sort_by(f64::total_cmp);
            LevelSummary {
                steps,
                tau: paths[0].levels[j].tau,
                mean: errs.iter().sum::<f64>() / errs.len() as f64,
                median: median(&errs),
                max: *errs.last().expect("at least one path"),
            }
        })
        .collect();
    let monotonicity_violations = summaries
        .windows(2)
        .filter(|w| w[1].median > w[0].median)
        .map(|w| w[1].steps)
        .collect();
    let pooled: Vec<(f64, f64)> = paths
        .iter()
        .flat_map(|p| p.levels.iter().map(|l| (l.tau, l.sup_l2)))
        .collect();
    let pooled_fit = if cfg.levels.len() < 3 {
        FitOutcome::Degenerate
    } else {
        fit_order(&pooled)?
    };
    Ok(ErrorReport {
        paths,
        aborted,
        summaries,
        pooled_fit,
        monotonicity_violations,
    })
}

/// Runs every path sequentially. Parallel execution lives in the harness and feeds
/// [`assemble_report`] the same way.
pub fn pathwise_error_study(cfg: &StudyConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let outcomes = (0..cfg.paths as u64)
        .map(|id| (id, run_path(cfg, id)))
        .collect();
    assemble_report(cfg, outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceRow {
    pub steps: usize,
    pub tau: f64,
    pub beta: f64,
    pub exceed: usize,
    pub total: usize,
    pub fraction: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceTrend {
    pub beta: f64,
    /// Fraction never increases as the step size shrinks.
    pub non_increasing: bool,
    /// Fraction at the finest level is at most that at the coarsest.
    pub finest_at_most_coarsest: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceTable {
    pub rows: Vec<ExceedanceRow>,
    pub trends: Vec<ExceedanceTrend>,
}

fn wilson_interval(exceed: usize, total: usize) -> (f64, f64) {
    let n = total as f64;
    let p = exceed as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    let low = if exceed == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if exceed == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

fn validate_betas(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(invalid("betas", "at least one exponent is required"));
    }
    if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return Err(invalid("betas", "exponents must lie in (0, 1)"));
    }
    Ok(())
}

/// Fraction of paths with `sup_i |e(t_i)|₂ ≥ τ^β` for every level and exponent.
pub fn exceedance_table(report: &ErrorReport, betas: &[f64]) -> Result<ExceedanceTable> {
    validate_betas(betas)?;
    let total = report.paths.len();
    if total == 0 {
        return Err(invalid("error report", "no completed paths"));
    }
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for &beta in betas {
        let start = rows.len();
        for (j, summary) in report.summaries.iter().enumerate() {
            let threshold = libm::pow(summary.tau, beta);
            let exceed = report
                .paths
                .iter()
                .filter(|p| p.levels[j].sup_l2 >= threshold)
                .count();
            let (ci_low, ci_high) = wilson_interval(exceed, total);
            rows.push(ExceedanceRow {
                steps: summary.steps,
                tau: summary.tau,
                beta,
                exceed,
                total,
                fraction: exceed as f64 / total as f64,
                ci_low,
                ci_high,
            });
        }
        let ours = &rows[start..];
        trends.push(ExceedanceTrend {
            beta,
            non_increasing: ours.windows(2).all(|w| w[1].fraction <= w[0].fraction),
            finest_at_most_coarsest: ours.last().map(|r| r.fraction)
                <= ours.first().map(|r| r.fraction),
        });
    }
    Ok(ExceedanceTable { rows, trends })
}

/// Pathwise study followed by the exceedance table.
pub fn probability_order_study(
    cfg: &StudyConfig,
    betas: &[f64],
) -> Result<(ErrorReport, ExceedanceTable)> {
    validate_betas(betas)?;
    let report = pathwise_error_study(cfg)?;
    let table = exceedance_table(&report, betas)?;
    Ok((report, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_law_has_unit_slope() {
        let fit = fit_order(&[(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)])
            .unwrap()
            .fitted()
            .unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_power_law_recovers_exponent_and_constant() {
        let pts: Vec<(f64, f64)> = (0..4)
            .map(|j| {
                let tau = 0.1 / (1u32 << j) as f64;
                (tau, 3.0 * tau.sqrt())
            })
            .collect();
        let fit = fit_order(&pts).unwrap().fitted().unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_too_few_points_and_flags_zeros() {
        assert!(fit_order(&[(0.1, 0.1)]).is_err());
        assert_eq!(
            fit_order(&[(0.1, 0.0), (0.05, 0.1), (0.025, 0.1)]).unwrap(),
            FitOutcome::Degenerate
        );
    }

    #[test]
    fn level_validation() {
        let mut cfg = StudyConfig::new(2, 0.5, vec![4, 8, 16]);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.reference_steps(), Some(64));
        cfg.levels = vec![4, 12];
        assert!(cfg.validate().is_err());
        cfg.levels = vec![];
        assert!(cfg.validate().is_err());
        cfg.levels = vec![4, 8];
        cfg.decay = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        for (x, n) in [(0, 50), (3, 50), (50, 50), (1, 1)] {
            let (lo, hi) = wilson_interval(x, n);
            let p = x as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn empty_or_out_of_range_betas_are_rejected() {
        let cfg = StudyConfig::new(1, 0.5, vec![2, 4, 8]);
        assert!(probability_order_study(&cfg, &[]).is_err());
        assert!(probability_order_study(&cfg, &[1.5]).is_err());
    }
}
