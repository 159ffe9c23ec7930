//! Fast invariant checks for the `selfcheck` subcommand.

use std::f64::consts::PI;

use sie_core::spectral::dealias_grid_size;
use sie_core::stepper::{dense_transport_solve, fixed_point_solve_from};
use sie_core::{
    biot_savart, build_spectrum, field_from_modes, fit_order, implicit_transport_solve,
    pathwise_error_study, run_path, sample_brownian_table, simulate_path, transport_term,
    wcurl_increment, BrownianTable, InitialCondition, ModeIndex, NoiseSpectrum, SpectralField,
    StepperConfig, StudyConfig,
};

use crate::config::{Mode, RunConfig};
use crate::formats::{read_noise_table, read_snapshot, write_noise_table, write_snapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("energy identity of the implicit step", energy_identity),
    ("L4 contraction of the implicit step", l4_contraction),
    ("skew-symmetry of the transport term", skew_symmetry),
    ("fixed-point and dense solvers agree", solver_equivalence),
    ("fixed point independent of the initial guess", uniqueness),
    ("Biot-Savart inverts the curl", curl_inverse),
    ("noise increments telescope bitwise", telescoping),
    ("noise increment variance", noise_variance),
    ("steady single mode", steady_single_mode),
    ("zero-noise L2 norm non-increasing", zero_noise_monotone),
    ("order fit recovers a power law", fit_sanity),
    ("reference compared with itself", reference_consistency),
    ("velocity error multiplier bound", multiplier_bound),
    ("study determinism", study_determinism),
    (
        "snapshot and noise containers round trip",
        container_round_trip,
    ),
    ("effective config round trips", config_round_trip),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let (passed, detail) = match std::panic::catch_unwind(check) {
                Ok(Ok(detail)) => (true, detail),
                Ok(Err(detail)) => (false, detail),
                Err(_) => (false, "panicked".into()),
            };
            CheckResult {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn random(n: usize, decay: f64, seed: u64) -> SpectralField {
    InitialCondition::RandomSmooth { decay, seed }
        .build(n)
        .expect("positive truncation")
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e(msg: impl ToString) -> String {
    msg.to_string()
}

fn energy_identity() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let xi = random(8, 1.0, seed);
        for tau in [1e-3, 1e-2] {
            let bar = implicit_transport_solve(&xi, &StepperConfig::new(tau)).map_err(e)?;
            let d = &xi - &bar;
            let rel = (bar.dot(&bar) + d.dot(&d) - xi.dot(&xi)).abs() / xi.dot(&xi);
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 1e-10, format!("max relative defect {worst:.3e}"))
}

fn l4_contraction() -> Result<String, String> {
    let m = dealias_grid_size(8);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let xi = random(8, 2.0, seed);
        let bar = implicit_transport_solve(&xi, &StepperConfig::new(1e-2)).map_err(e)?;
        let ratio = bar.lp_grid_norm(4.0, m).map_err(e)? / xi.lp_grid_norm(4.0, m).map_err(e)?;
        worst = worst.max(ratio);
    }
    ensure(worst <= 1.0 + 1e-8, format!("max |Φξ|₄/|ξ|₄ = {worst:.12}"))
}

fn skew_symmetry() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let xi = random(8, 0.0, seed);
        let zeta = random(8, 0.0, seed + 1000);
        let b = transport_term(&xi, &zeta).map_err(e)?;
        let h1 = zeta.sobolev_norm(1);
        worst = worst.max(b.dot(&zeta).abs() / (xi.l2_norm() * h1 * h1));
    }
    ensure(
        worst <= 1e-10,
        format!("max normalized ⟨Bζ, ζ⟩ {worst:.3e}"),
    )
}

fn solver_equivalence() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (n, seed) in [(2, 0), (2, 1), (4, 2), (4, 3)] {
        let xi = random(n, 0.0, seed);
        let fp = implicit_transport_solve(&xi, &StepperConfig::new(0.05)).map_err(e)?;
        let dense = dense_transport_solve(&xi, 0.05).map_err(e)?;
        worst = worst.max((&fp - &dense).l2_norm() / xi.l2_norm());
    }
    ensure(
        worst <= 1e-10,
        format!("max relative difference {worst:.3e}"),
    )
}

fn uniqueness() -> Result<String, String> {
    let xi = random(6, 1.0, 5);
    let cfg = StepperConfig::new(1e-2);
    let a = implicit_transport_solve(&xi, &cfg).map_err(e)?;
    let mut guess = xi.clone();
    guess.axpy(0.5, &random(6, 0.0, 6));
    let b = fixed_point_solve_from(&xi, &guess, &cfg).map_err(e)?;
    let diff = (&a - &b).l2_norm() / xi.l2_norm();
    ensure(
        diff <= 2.0 * cfg.fp_tol,
        format!("relative difference {diff:.3e}"),
    )
}

fn curl_inverse() -> Result<String, String> {
    let xi = random(8, 0.5, 9);
    let u = biot_savart(&xi);
    let err = u.curl().max_abs_diff(&xi) / xi.l2_norm();
    ensure(
        err <= 1e-13 && u.max_divergence() == 0.0,
        format!("curl error {err:.3e}, divergence {}", u.max_divergence()),
    )
}

fn telescoping() -> Result<String, String> {
    let spectrum = build_spectrum(4, 0.1, 6.0).map_err(e)?;
    let table = sample_brownian_table(&spectrum, 64, 0.5, 1, 0).map_err(e)?;
    for level in 0..6 {
        for i in 0..table.windows(level + 1).map_err(e)? {
            let parent = wcurl_increment(&spectrum, &table, level + 1, i).map_err(e)?;
            let left = wcurl_increment(&spectrum, &table, level, 2 * i).map_err(e)?;
            let right = wcurl_increment(&spectrum, &table, level, 2 * i + 1).map_err(e)?;
            let sum = &left + &right;
            let exact = parent
                .coefficients()
                .iter()
                .zip(sum.coefficients())
                .all(|(p, s)| p.to_bits() == s.to_bits());
            if !exact {
                return Err(format!("level {level} window {i} differs"));
            }
        }
    }
    Ok("all windows exact".into())
}

fn noise_variance() -> Result<String, String> {
    let spectrum = build_spectrum(2, 0.1, 6.0).map_err(e)?;
    let n_fine = 1 << 12;
    let table = sample_brownian_table(&spectrum, n_fine, 1.0, 2, 0).map_err(e)?;
    let dt = table.dt_fine();
    let se = dt * (2.0 / (n_fine as f64 - 1.0)).sqrt();
    let mut worst = 0.0f64;
    for k in sie_core::spectral::Modes::new(2).iter() {
        let xs = table.mode_increments(k).expect("mode in table");
        let mean = xs.iter().sum::<f64>() / n_fine as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_fine as f64 - 1.0);
        worst = worst.max((var - dt).abs() / se);
    }
    ensure(
        worst <= 4.0,
        format!("max deviation {worst:.2} standard errors"),
    )
}

fn silent_trajectory(xi0: &SpectralField, steps: usize) -> Result<sie_core::Trajectory, String> {
    let n = xi0.truncation();
    let spectrum = NoiseSpectrum::silent(n).map_err(e)?;
    let table = BrownianTable::zeros(n, steps, 0.5).map_err(e)?;
    simulate_path(
        xi0,
        &spectrum,
        &table,
        0,
        &StepperConfig::new(0.5 / steps as f64),
    )
    .map_err(e)
}

fn steady_single_mode() -> Result<String, String> {
    let xi0 = field_from_modes(&[(ModeIndex::new(1, 0), 1.0)], 4).map_err(e)?;
    let traj = silent_trajectory(&xi0, 512)?;
    let dev = traj
        .states
        .iter()
        .map(|s| s.max_abs_diff(&xi0))
        .fold(0.0, f64::max);
    ensure(dev <= 1e-12, format!("max deviation {dev:.3e}"))
}

fn zero_noise_monotone() -> Result<String, String> {
    let xi0 = InitialCondition::Preset3Mode.build(6).map_err(e)?;
    let traj = silent_trajectory(&xi0, 64)?;
    let ok = traj
        .states
        .windows(2)
        .all(|w| w[1].l2_norm() <= w[0].l2_norm());
    ensure(
        ok,
        format!("final |ξ|₂ = {:.15}", traj.states[64].l2_norm()),
    )
}

fn fit_sanity() -> Result<String, String> {
    let points: Vec<(f64, f64)> = (0..5)
        .map(|j| {
            let tau = 0.5 / (16 << j) as f64;
            (tau, 3.0 * tau.sqrt())
        })
        .collect();
    let fit = fit_order(&points)
        .map_err(e)?
        .fitted()
        .ok_or("degenerate fit")?;
    ensure(
        (fit.slope - 0.5).abs() <= 1e-12 && (fit.intercept - 3f64.ln()).abs() <= 1e-12,
        format!("slope {:.15}", fit.slope),
    )
}

fn small_study() -> StudyConfig {
    let mut cfg = StudyConfig::new(4, 0.25, vec![8, 16, 32]);
    cfg.paths = 2;
    cfg
}

fn reference_consistency() -> Result<String, String> {
    let mut cfg = small_study();
    cfg.levels = vec![32];
    cfg.ref_extra = 0;
    let err = run_path(&cfg, 0).map_err(e)?.levels[0];
    ensure(
        err.sup_l2 == 0.0 && err.sup_observable == 0.0,
        format!("sup error {:.3e}", err.sup_l2),
    )
}

fn multiplier_bound() -> Result<String, String> {
    let report = pathwise_error_study(&small_study()).map_err(e)?;
    let bound = 1.0 + 1.0 / (2.0 * PI);
    let ok = report
        .paths
        .iter()
        .flat_map(|p| &p.levels)
        .all(|l| l.sup_u_h1 <= bound * l.sup_l2);
    ensure(ok, format!("{} paths checked", report.paths.len()))
}

fn study_determinism() -> Result<String, String> {
    let cfg = small_study();
    let a = crate::run::run_study(&cfg, 1).map_err(e)?;
    let b = crate::run::run_study(&cfg, 2).map_err(e)?;
    ensure(a == b, "1 and 2 workers".into())
}

fn container_round_trip() -> Result<String, String> {
    let field = random(5, 1.0, 4);
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &field).map_err(e)?;
    let back = read_snapshot(&mut buf.as_slice()).map_err(e)?;
    let spectrum = build_spectrum(2, 0.1, 6.0).map_err(e)?;
    let table = sample_brownian_table(&spectrum, 8, 1.0, 0, 0).map_err(e)?;
    let mut buf = Vec::new();
    write_noise_table(&mut buf, &table).map_err(e)?;
    let noise = read_noise_table(&mut buf.as_slice(), 1.0).map_err(e)?;
    let k = ModeIndex::new(1, -2);
    ensure(
        back == field && noise.mode_increments(k) == table.mode_increments(k),
        "SIE2 and SIEW".into(),
    )
}

fn config_round_trip() -> Result<String, String> {
    let text = "N = 16\nT = 0.5\nlevels = 16..512\nxi0 = random-smooth(4, 3)\n";
    let cfg = crate::config::Entries::parse(text, "selfcheck")
        .map_err(e)?
        .resolve(Some(Mode::Converge))
        .map_err(e)?;
    let again = RunConfig::parse_text(&cfg.to_text()).map_err(e)?;
    ensure(again == cfg, "converge defaults".into())
}

/// Fixed-width pass/fail table.
pub fn render(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:<width$}  {}\n", r.name, r.detail));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} checks, {failed} failed\n", results.len()));
    out
}
