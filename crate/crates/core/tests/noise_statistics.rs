use sie_core::spectral::Modes;
use sie_core::{
    build_spectrum, sample_brownian_table, w_increment_velocity, wcurl_increment, BrownianTable,
    Error, ModeIndex, NoiseSpectrum,
};
use std::f64::consts::PI;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn per_mode_increments_have_brownian_variance() {
    let spectrum = build_spectrum(2, 0.1, 6.0).unwrap();
    let n_fine = 1 << 14;
    let table = sample_brownian_table(&spectrum, n_fine, 2.0, 7, 1).unwrap();
    let dt = table.dt_fine();
    let se_var = dt * (2.0 / (n_fine as f64 - 1.0)).sqrt();
    let se_mean = (dt / n_fine as f64).sqrt();
    for k in Modes::new(2).iter() {
        let (mean, var) = mean_var(table.mode_increments(k).unwrap());
        assert!(mean.abs() <= 4.0 * se_mean, "{k:?} mean {mean}");
        assert!((var - dt).abs() <= 4.0 * se_var, "{k:?} var {var} vs {dt}");
    }
}

#[test]
fn distinct_modes_are_uncorrelated() {
    let spectrum = build_spectrum(2, 0.1, 6.0).unwrap();
    let n_fine = 1 << 14;
    let table = sample_brownian_table(&spectrum, n_fine, 1.0, 3, 0).unwrap();
    let modes: Vec<ModeIndex> = Modes::new(2).iter().collect();
    let bound = 5.0 / (n_fine as f64).sqrt();
    for (i, &a) in modes.iter().enumerate() {
        for &b in &modes[i + 1..] {
            let (x, y) = (
                table.mode_increments(a).unwrap(),
                table.mode_increments(b).unwrap(),
            );
            let (mx, vx) = mean_var(x);
            let (my, vy) = mean_var(y);
            let cov = x
                .iter()
                .zip(y)
                .map(|(p, q)| (p - mx) * (q - my))
                .sum::<f64>()
                / (n_fine as f64 - 1.0);
            let rho = cov / (vx * vy).sqrt();
            assert!(rho.abs() < bound, "{a:?} {b:?} rho {rho}");
        }
    }
}

#[test]
fn coarsened_increments_telescope_bitwise() {
    let spectrum = build_spectrum(4, 0.3, 6.0).unwrap();
    let table = sample_brownian_table(&spectrum, 256, 0.5, 11, 2).unwrap();
    for level in 0..8 {
        for i in 0..table.windows(level + 1).unwrap() {
            let parent = wcurl_increment(&spectrum, &table, level + 1, i).unwrap();
            let left = wcurl_increment(&spectrum, &table, level, 2 * i).unwrap();
            let right = wcurl_increment(&spectrum, &table, level, 2 * i + 1).unwrap();
            for ((p, l), r) in parent
                .coefficients()
                .iter()
                .zip(left.coefficients())
                .zip(right.coefficients())
            {
                assert_eq!(p.to_bits(), (l + r).to_bits());
            }
            for k in [ModeIndex::new(1, 0), ModeIndex::new(-3, 4)] {
                let sum = table.increment(k, level, 2 * i).unwrap()
                    + table.increment(k, level, 2 * i + 1).unwrap();
                assert_eq!(
                    table.increment(k, level + 1, i).unwrap().to_bits(),
                    sum.to_bits()
                );
            }
        }
    }
}

#[test]
fn expected_curl_increment_energy_is_trace_times_step() {
    let spectrum = build_spectrum(4, 1.0, 6.0).unwrap();
    let (t_end, n_fine) = (1.0, 8);
    let tau = t_end / n_fine as f64;
    let samples: Vec<f64> = (0..400)
        .map(|path| {
            let table = sample_brownian_table(&spectrum, n_fine, t_end, 5, path).unwrap();
            let dw = wcurl_increment(&spectrum, &table, 0, 3).unwrap();
            dw.dot(&dw)
        })
        .collect();
    let (mean, var) = mean_var(&samples);
    let se = (var / samples.len() as f64).sqrt();
    let expected = tau * spectrum.trace();
    assert!(
        (mean - expected).abs() <= 3.0 * se,
        "{mean} vs {expected} ± {se}"
    );
}

#[test]
fn unit_shell_trace_counts_all_eight_modes() {
    // Λ_1 holds four axis modes (σ = 2π) and four diagonals (σ = 2π·2^{-5/2}).
    let spectrum = build_spectrum(1, 1.0, 6.0).unwrap();
    let expected = (2.0 * PI).powi(2) * (4.0 + 4.0 / 32.0);
    assert!((spectrum.trace() - expected).abs() <= 1e-12 * expected);
}

#[test]
fn spectrum_follows_the_power_law() {
    let spectrum = build_spectrum(6, 0.1, 6.0).unwrap();
    for k in Modes::new(6).iter() {
        let scaled = spectrum.sigma(k) * k.norm().powf(5.0);
        assert!((scaled - 2.0 * PI * 0.1).abs() <= 1e-12);
    }
    assert!(matches!(
        build_spectrum(4, 0.0, 6.0),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(build_spectrum(4, 0.1, 5.0).unwrap().assumption_violated());
    assert!(!build_spectrum(4, 0.1, 6.0).unwrap().assumption_violated());
}

#[test]
fn tables_are_pure_functions_of_their_keys() {
    let spectrum = build_spectrum(3, 0.1, 6.0).unwrap();
    let a = sample_brownian_table(&spectrum, 64, 1.0, 9, 4).unwrap();
    let b = sample_brownian_table(&spectrum, 64, 1.0, 9, 4).unwrap();
    let c = sample_brownian_table(&spectrum, 64, 1.0, 9, 5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    // A mode's path does not depend on the truncation it was drawn for.
    let wide = sample_brownian_table(&build_spectrum(5, 0.1, 6.0).unwrap(), 64, 1.0, 9, 4).unwrap();
    let k = ModeIndex::new(2, -3);
    assert_eq!(a.mode_increments(k), wide.mode_increments(k));
    assert!(sample_brownian_table(&spectrum, 0, 1.0, 0, 0).is_err());
    assert!(sample_brownian_table(&spectrum, 8, 0.0, 0, 0).is_err());
}

#[test]
fn velocity_increment_inverts_to_the_curl_increment() {
    let spectrum = build_spectrum(3, 0.5, 6.0).unwrap();
    let table = sample_brownian_table(&spectrum, 16, 1.0, 1, 1).unwrap();
    for step in 0..4 {
        let curl = wcurl_increment(&spectrum, &table, 2, step).unwrap();
        let w = w_increment_velocity(&spectrum, &table, 2, step).unwrap();
        assert!(w.curl().max_abs_diff(&curl) <= 1e-13 * curl.l2_norm());
        assert_eq!(w.max_divergence(), 0.0);
        let expected: f64 = curl
            .iter()
            .map(|(k, c)| (c / (2.0 * PI * k.norm())).powi(2))
            .sum();
        assert!((w.l2_norm().powi(2) - expected).abs() <= 1e-13 * expected);
    }
}

#[test]
fn zero_table_and_out_of_range_windows() {
    let spectrum = NoiseSpectrum::silent(2).unwrap();
    let table = BrownianTable::zeros(2, 8, 1.0).unwrap();
    assert!(wcurl_increment(&spectrum, &table, 1, 2).unwrap().is_zero());
    assert_eq!(
        w_increment_velocity(&spectrum, &table, 0, 0)
            .unwrap()
            .l2_norm(),
        0.0
    );
    assert!(matches!(
        wcurl_increment(&spectrum, &table, 4, 0),
        Err(Error::WindowOutOfRange { .. })
    ));
    assert!(matches!(
        wcurl_increment(&spectrum, &table, 1, 4),
        Err(Error::WindowOutOfRange { .. })
    ));
    let other = build_spectrum(3, 0.1, 6.0).unwrap();
    assert!(matches!(
        wcurl_increment(&other, &table, 0, 0),
        Err(Error::TruncationMismatch { .. })
    ));
}
