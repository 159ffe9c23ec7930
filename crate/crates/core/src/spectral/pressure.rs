use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::Fft2;
use super::field::SpectralField;
use super::grid::{dealias_grid_size, synthesize_pair};
use super::velocity::VelocityField;
use super::TWO_PI;

/// Pressure `π = ∇⁻¹(P - Id)(u·∇)u`, truncated to `Λ_N`.
///
/// With `F = (u·∇)u` formed alias-free on the padded grid, `∇π = -(Id - P)F` gives
/// `π̂(q) = i q·F̂(q) / (2π|q|²)`, i.e. `Δπ = -∇·F`.
pub fn pressure_from_velocity(u: &VelocityField) -> SpectralField {
    let psi = u.stream_function();
    let n = psi.truncation();
    let fft = Fft2::new(dealias_grid_size(n));
    let four_pi_sq = TWO_PI * TWO_PI;

    let (u1, u2) = u.to_grids(&fft);
    let real = |v: f64| Complex64::new(v, 0.0);
    // ∂ⱼu₁ and ∂ⱼu₂ as multipliers on ψ̂.
    let (d1u1, d2u1) = synthesize_pair(
        psi,
        &fft,
        |k| real(four_pi_sq * (k.k1 * k.k2) as f64),
        |k| real(four_pi_sq * (k.k2 * k.k2) as f64),
    );
    let (d1u2, d2u2) = synthesize_pair(
        psi,
        &fft,
        |k| real(-four_pi_sq * (k.k1 * k.k1) as f64),
        |k| real(-four_pi_sq * (k.k1 * k.k2) as f64),
    );

    let mut data: Vec<Complex64> = (0..u1.len())
        .map(|j| {
            let f1 = u1[j] * d1u1[j] + u2[j] * d2u1[j];
            let f2 = u1[j] * d1u2[j] + u2[j] * d2u2[j];
            Complex64::new(f1, f2)
        })
        .collect();
    fft.analyze(&mut data);

    let mut pressure = SpectralField::zeros(n).expect("positive truncation");
    let modes = pressure.modes();
    for slot in modes.len() / 2..modes.len() {
        let q = modes.mode(slot);
        let g = data[fft.index(q.k1, q.k2)];
        let g_mirror = data[fft.index(-q.k1, -q.k2)].conj();
        let f1 = (g + g_mirror) * 0.5;
        let f2 = (g - g_mirror) * Complex64::new(0.0, -0.5);
        let div = f1 * q.k1 as f64 + f2 * q.k2 as f64;
        let hat = Complex64::new(0.0, 1.0) * div / (TWO_PI * q.norm_sq());
        pressure.set_from_positive_hat(q, hat);
    }
    pressure
}
