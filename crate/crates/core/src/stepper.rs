//! One splitting semi-implicit Euler step, `ξ_{i+1} = Φ_τ(ξ_i) + ΔW^curl_{i+1}`, where
//! `ξ̄ = Φ_τ(ξ)` solves the linear transport problem `(I + τB(ξ))ξ̄ = ξ` on `Λ_N`.
//!
//! `B(ξ)` is skew-symmetric on `Λ_N`, so every exact solution satisfies
//! `|ξ̄|₂² + |ξ - ξ̄|₂² = |ξ|₂²`. The default solver is the Richardson iteration
//! `ξ̄ ← ξ - τB(ξ)ξ̄` started from `ξ`; when it stalls the system is assembled and
//! factorized densely, provided the Galerkin dimension is small enough.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::noise::{wcurl_increment, BrownianTable, NoiseSpectrum};
use crate::spectral::{
    biot_savart, dealias_grid_size, pressure_from_velocity, SpectralField, TransportOperator,
    VelocityField,
};

/// Step-size guard: `τ · 2π√2·N·|u|_∞` at or above this value is reported.
pub const GUARD_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Richardson fixed-point iteration with dense fallback.
    FixedPoint,
    /// Dense assembly and LU factorization only.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    pub solver: SolverKind,
    /// Relative residual target `|(I + τB)ξ̄ - ξ|₂ ≤ fp_tol·|ξ|₂`.
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Largest Galerkin dimension for which the dense solver may be used.
    pub dense_dim_cap: usize,
    pub diagnostics: bool,
}

impl StepperConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            solver: SolverKind::FixedPoint,
            fp_tol: 1e-12,
            fp_max_iter: 200,
            dense_dim_cap: 4096,
            diagnostics: false,
        }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self {
            tau,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid("step size", "must be a positive finite number"));
        }
        if !(self.fp_tol.is_finite() && self.fp_tol > 0.0) {
            return Err(invalid("fixed-point tolerance", "must be positive"));
        }
        if self.fp_max_iter == 0 {
            return Err(invalid("fixed-point iteration cap", "must be at least 1"));
        }
        Ok(())
    }
}

/// How one implicit solve went.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Applications of `B` spent in the fixed-point loop.
    pub iterations: usize,
    /// Absolute residual `|(I + τB)ξ̄ - ξ|₂` of the returned solution.
    pub residual: f64,
    pub dense: bool,
    /// `τ · 2π√2·N·|u|_∞`.
    pub guard_ratio: f64,
}

/// `Φ_τ^N(ξ)`.
pub fn implicit_transport_solve(xi: &SpectralField, cfg: &StepperConfig) -> Result<SpectralField> {
    solve_with_report(xi, cfg).map(|(x, _)| x)
}

pub fn solve_with_report(
    xi: &SpectralField,
    cfg: &StepperConfig,
) -> Result<(SpectralField, SolveReport)> {
    cfg.validate()?;
    let op = TransportOperator::new(xi);
    let guard_ratio = cfg.tau * op.norm_bound();
    if guard_ratio >= GUARD_THRESHOLD {
        log::warn!(
            "step size {:e} is large for the transport operator (guard ratio {guard_ratio:.3})",
            cfg.tau
        );
    }
    let dimension = xi.dimension();
    let tol = cfg.fp_tol * xi.l2_norm();

    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    if cfg.solver == SolverKind::FixedPoint {
        match fixed_point(&op, xi, xi.clone(), cfg.tau, tol, cfg.fp_max_iter)? {
            FixedPoint::Converged {
                solution,
                iterations,
                residual,
            } => {
                let report = SolveReport {
                    iterations,
                    residual,
                    dense: false,
                    guard_ratio,
                };
                return Ok((solution, report));
            }
            FixedPoint::Stalled {
                iterations: it,
                residual,
            } => {
                iterations = it;
                last_residual = residual;
            }
        }
    }
    if dimension > cfg.dense_dim_cap {
        return Err(Error::SolverFailure {
            residual: last_residual,
            iterations,
            dimension,
        });
    }
    let (solution, residual) = dense_solve(&op, xi, cfg.tau, tol)?;
    if residual.is_nan() || residual > tol {
        return Err(Error::SolverFailure {
            residual,
            iterations,
            dimension,
        });
    }
    let report = SolveReport {
        iterations,
        residual,
        dense: true,
        guard_ratio,
    };
    Ok((solution, report))
}

enum FixedPoint {
    Converged {
        solution: SpectralField,
        iterations: usize,
        residual: f64,
    },
    Stalled {
        iterations: usize,
        residual: f64,
    },
}

fn fixed_point(
    op: &TransportOperator,
    xi: &SpectralField,
    guess: SpectralField,
    tau: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    let mut current = guess;
    let mut first = None;
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let mut next = xi.clone();
        next.axpy(-tau, &op.apply(&current)?);
        // next - current = ξ - (I + τB)current, the residual of `current`.
        residual = (&next - &current).l2_norm();
        if residual <= tol {
            return Ok(FixedPoint::Converged {
                solution: current,
                iterations: iteration,
                residual,
            });
        }
        let first = *first.get_or_insert(residual);
        if !residual.is_finite() || residual > 1e3 * first {
            return Ok(FixedPoint::Stalled {
                iterations: iteration,
                residual,
            });
        }
        current = next;
    }
    Ok(FixedPoint::Stalled {
        iterations: max_iter,
        residual,
    })
}

/// Richardson iteration only, started from `guess` instead of `ξ`.
pub fn fixed_point_solve_from(
    xi: &SpectralField,
    guess: &SpectralField,
    cfg: &StepperConfig,
) -> Result<SpectralField> {
    cfg.validate()?;
    xi.ensure_same_truncation(guess)?;
    let op = TransportOperator::new(xi);
    let tol = cfg.fp_tol * xi.l2_norm();
    match fixed_point(&op, xi, guess.clone(), cfg.tau, tol, cfg.fp_max_iter)? {
        FixedPoint::Converged { solution, .. } => Ok(solution),
        FixedPoint::Stalled {
            iterations,
            residual,
        } => Err(Error::SolverFailure {
            residual,
            iterations,
            dimension: xi.dimension(),
        }),
    }
}

/// Dense assembly and LU solve regardless of the configured solver.
pub fn dense_transport_solve(xi: &SpectralField, tau: f64) -> Result<SpectralField> {
    let cfg = StepperConfig {
        solver: SolverKind::Dense,
        dense_dim_cap: usize::MAX,
        ..StepperConfig::new(tau)
    };
    implicit_transport_solve(xi, &cfg)
}

fn residual_norm(
    op: &TransportOperator,
    xi: &SpectralField,
    candidate: &SpectralField,
    tau: f64,
) -> Result<f64> {
    let mut r = candidate - xi;
    r.axpy(tau, &op.apply(candidate)?);
    Ok(r.l2_norm())
}

/// The matrix of `I + τB(ξ)` on the real basis of `Λ_N`, columns in slot order.
pub fn implicit_matrix(xi: &SpectralField, tau: f64) -> Result<DMatrix<f64>> {
    assemble(
        &TransportOperator::new(xi),
        xi.truncation(),
        xi.dimension(),
        tau,
    )
}

fn assemble(op: &TransportOperator, n: usize, d: usize, tau: f64) -> Result<DMatrix<f64>> {
    let mut matrix = DMatrix::<f64>::identity(d, d);
    let mut unit = SpectralField::zeros(n)?;
    for j in 0..d {
        unit.coefficients_mut()[j] = 1.0;
        let column = op.apply(&unit)?;
        for (i, v) in column.coefficients().iter().enumerate() {
            matrix[(i, j)] += tau * v;
        }
        unit.coefficients_mut()[j] = 0.0;
    }
    Ok(matrix)
}

/// LU solve with up to two rounds of iterative refinement; returns the solution and
/// its residual.
fn dense_solve(
    op: &TransportOperator,
    xi: &SpectralField,
    tau: f64,
    tol: f64,
) -> Result<(SpectralField, f64)> {
    let d = xi.dimension();
    let singular = Error::SolverFailure {
        residual: f64::INFINITY,
        iterations: 0,
        dimension: d,
    };
    let lu = assemble(op, xi.truncation(), d, tau)?.lu();
    let rhs = DVector::from_column_slice(xi.coefficients());
    let first = lu.solve(&rhs).ok_or(singular.clone())?;
    let mut solution =
        SpectralField::from_coefficients(xi.truncation(), first.as_slice().to_vec())?;
    let mut residual = residual_norm(op, xi, &solution, tau)?;
    for _ in 0..2 {
        if residual <= tol {
            break;
        }
        let mut defect = xi - &solution;
        defect.axpy(-tau, &op.apply(&solution)?);
        let correction = lu
            .solve(&DVector::from_column_slice(defect.coefficients()))
            .ok_or(singular.clone())?;
        for (s, c) in solution
            .coefficients_mut()
            .iter_mut()
            .zip(correction.iter())
        {
            *s += c;
        }
        residual = residual_norm(op, xi, &solution, tau)?;
    }
    Ok((solution, residual))
}

/// `ξ_{i+1} = Φ_τ(ξ_i) + ΔW^curl`.
pub fn sie_step(
    xi: &SpectralField,
    dw: &SpectralField,
    cfg: &StepperConfig,
) -> Result<SpectralField> {
    xi.ensure_same_truncation(dw)?;
    let mut next = implicit_transport_solve(xi, cfg)?;
    next += dw;
    Ok(next)
}

/// Per-state record kept when diagnostics are enabled. Entry 0 describes `ξ_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub l2_norm: f64,
    /// Quadrature value on the padded grid.
    pub l4_norm: f64,
    pub iterations: usize,
    pub residual: f64,
    pub dense: bool,
    pub guard_ratio: f64,
}

/// States `ξ_0, …, ξ_n` on the uniform grid `t_i = iT/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t_end: f64,
    pub level: u32,
    pub states: Vec<SpectralField>,
    pub diagnostics: Option<Vec<StepDiagnostics>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.steps() as f64
    }
}

fn diagnostics_entry(
    step: usize,
    time: f64,
    state: &SpectralField,
    report: Option<SolveReport>,
) -> Result<StepDiagnostics> {
    let l4_norm = state.lp_grid_norm(4.0, dealias_grid_size(state.truncation()))?;
    Ok(StepDiagnostics {
        step,
        time,
        l2_norm: state.l2_norm(),
        l4_norm,
        iterations: report.map_or(0, |r| r.iterations),
        residual: report.map_or(0.0, |r| r.residual),
        dense: report.is_some_and(|r| r.dense),
        guard_ratio: report.map_or(0.0, |r| r.guard_ratio),
    })
}

/// Runs the scheme on `[0, T]` with the step size of `level`, taking each noise
/// increment from the matching window of `table` only.
pub fn simulate_path(
    xi0: &SpectralField,
    spectrum: &NoiseSpectrum,
    table: &BrownianTable,
    level: u32,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    xi0.ensure_same_truncation(&SpectralField::zeros(table.truncation())?)?;
    let steps = table.windows(level)?;
    let tau = table.step_size(level)?;
    if (cfg.tau - tau).abs() > 1e-12 * tau {
        return Err(invalid(
            "step size",
            alloc::format!(
                "configured τ = {} but level {level} implies τ = {tau}",
                cfg.tau
            ),
        ));
    }
    let t_end = table.t_end();
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = cfg.diagnostics.then(|| Vec::with_capacity(steps + 1));
    if let Some(d) = diagnostics.as_mut() {
        d.push(diagnostics_entry(0, 0.0, xi0, None)?);
    }
    states.push(xi0.clone());
    for i in 0..steps {
        let dw = wcurl_increment(spectrum, table, level, i)?;
        let current = &states[i];
        let (mut next, report) = solve_with_report(current, cfg).map_err(|e| match e {
            Error::SolverFailure {
                residual,
                iterations,
                ..
            } => Error::SimulationAborted {
                step: i + 1,
                residual,
                iterations,
            },
            other => other,
        })?;
        next += &dw;
        if let Some(d) = diagnostics.as_mut() {
            let time = t_end * (i + 1) as f64 / steps as f64;
            d.push(diagnostics_entry(i + 1, time, &next, Some(report))?);
        }
        states.push(next);
    }
    Ok(Trajectory {
        t_end,
        level,
        states,
        diagnostics,
    })
}

/// `(u, π) = (K * ξ, ∇⁻¹(P - Id)(u·∇)u)`.
pub fn recover_observables(xi: &SpectralField) -> (VelocityField, SpectralField) {
    let u = biot_savart(xi);
    let pressure = pressure_from_velocity(&u);
    (u, pressure)
}
