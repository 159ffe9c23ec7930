use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::Fft2;
use super::field::SpectralField;
use super::mode::ModeIndex;
use crate::error::{invalid, Result};

/// Real samples of a periodic function on the uniform `m × m` grid
/// `x = (a/m, b/m)`, stored row by row in `b` so that `a` indexes columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBuffer {
    m: usize,
    values: Vec<f64>,
}

impl GridBuffer {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || values.len() != m * m {
            return Err(invalid(
                "grid buffer",
                alloc::format!("{} values do not form a {m} x {m} grid", values.len()),
            ));
        }
        Ok(Self { m, values })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Sample at `x = (a/m, b/m)`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[b * self.m + a]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Quadrature `(m⁻² Σ |v|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid("exponent p", "must be a finite number ≥ 1"));
        }
        let mean = self
            .values
            .iter()
            .map(|v| libm::pow(libm::fabs(*v), p))
            .sum::<f64>()
            / self.values.len() as f64;
        Ok(libm::pow(mean, 1.0 / p))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0, |acc, v| acc.max(libm::fabs(*v)))
    }
}

/// Smallest power of two `≥ 3N + 1`: the padded grid on which quadratic products
/// of `Λ_N` fields have alias-free `Λ_N` coefficients.
pub fn dealias_grid_size(n: usize) -> usize {
    (3 * n + 1).next_power_of_two()
}

fn check_resolution(m: usize, n: usize) -> Result<()> {
    if m < 2 * n + 2 {
        return Err(invalid(
            "grid size",
            alloc::format!(
                "{m} points per dimension cannot resolve Λ_{n} (need at least {})",
                2 * n + 2
            ),
        ));
    }
    Ok(())
}

/// Samples `field` on the `m × m` grid.
pub fn evaluate_on_grid(field: &SpectralField, m: usize) -> Result<GridBuffer> {
    check_resolution(m, field.truncation())?;
    Ok(synthesize_real(field, &Fft2::new(m), |_| {
        Complex64::new(1.0, 0.0)
    }))
}

/// Projects grid samples onto `Λ_N`. The grid mean (zero mode) is discarded, so a
/// constant grid maps to the zero field.
pub fn grid_to_spectral(buffer: &GridBuffer, n: usize) -> Result<SpectralField> {
    check_resolution(buffer.size(), n)?;
    let fft = Fft2::new(buffer.size());
    let mut data: Vec<Complex64> = buffer
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft.analyze(&mut data);
    extract_real(&data, &fft, n)
}

/// Real grid values of the field whose complex coefficients are `ξ̂(k)·multiplier(k)`.
pub(crate) fn synthesize_real(
    field: &SpectralField,
    fft: &Fft2,
    multiplier: impl Fn(ModeIndex) -> Complex64,
) -> GridBuffer {
    let m = fft.size();
    let mut data = vec![Complex64::new(0.0, 0.0); m * m];
    field.scatter_hat(|a, b| fft.index(a, b), &mut data, multiplier);
    fft.synthesize(&mut data);
    GridBuffer {
        m,
        values: data.into_iter().map(|c| c.re).collect(),
    }
}

/// Two real fields from one complex transform: returns the grids of the fields
/// with coefficients `ξ̂·first(k)` and `ξ̂·second(k)`.
pub(crate) fn synthesize_pair(
    field: &SpectralField,
    fft: &Fft2,
    first: impl Fn(ModeIndex) -> Complex64,
    second: impl Fn(ModeIndex) -> Complex64,
) -> (Vec<f64>, Vec<f64>) {
    let m = fft.size();
    let mut data = vec![Complex64::new(0.0, 0.0); m * m];
    let i = Complex64::new(0.0, 1.0);
    // f + i g is not Hermitian, so both halves of the spectrum are written explicitly.
    field.for_each_positive_hat(|k, h| {
        let (a, b) = (h * first(k), h * second(k));
        data[fft.index(k.k1, k.k2)] += a + i * b;
        data[fft.index(-k.k1, -k.k2)] += a.conj() + i * b.conj();
    });
    fft.synthesize(&mut data);
    data.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Reads the `Λ_N` coefficients of a real function out of its analyzed spectrum.
pub(crate) fn extract_real(data: &[Complex64], fft: &Fft2, n: usize) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(n)?;
    let modes = out.modes();
    for slot in modes.len() / 2..modes.len() {
        let k = modes.mode(slot);
        out.set_from_positive_hat(k, data[fft.index(k.k1, k.k2)]);
    }
    Ok(out)
}

impl SpectralField {
    /// Quadrature `L^p` norm on the `m × m` grid.
    pub fn lp_grid_norm(&self, p: f64, m: usize) -> Result<f64> {
        evaluate_on_grid(self, m)?.lp_norm(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field_from_modes;
    use std::f64::consts::{PI, SQRT_2};

    fn e10(n: usize) -> SpectralField {
        field_from_modes(&[(ModeIndex::new(1, 0), 1.0)], n).unwrap()
    }

    #[test]
    fn single_cosine_on_eight_point_grid() {
        let g = evaluate_on_grid(&e10(2), 8).unwrap();
        for b in 0..8 {
            for a in 0..8 {
                let expected = SQRT_2 * (2.0 * PI * a as f64 / 8.0).cos();
                assert!((g.get(a, b) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sine_modes_sit_on_the_negative_half() {
        let f = field_from_modes(&[(ModeIndex::new(-1, -2), 1.0)], 3).unwrap();
        let g = evaluate_on_grid(&f, 8).unwrap();
        for b in 0..8 {
            for a in 0..8 {
                let x = (a as f64 / 8.0, b as f64 / 8.0);
                let expected = SQRT_2 * (2.0 * PI * (-x.0 - 2.0 * x.1)).sin();
                assert!((g.get(a, b) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_grid_projects_to_zero() {
        let g = GridBuffer::new(8, vec![1.0; 64]).unwrap();
        let f = grid_to_spectral(&g, 3).unwrap();
        assert!(f.l2_norm() < 1e-15);
    }

    #[test]
    fn undersized_grid_is_rejected() {
        assert!(evaluate_on_grid(&e10(4), 9).is_err());
        let g = GridBuffer::new(8, vec![0.0; 64]).unwrap();
        assert!(grid_to_spectral(&g, 4).is_err());
    }

    #[test]
    fn l4_norm_of_single_mode() {
        // ∫ (√2 cos θ)^4 = 4 · 3/8 = 3/2 over a period
        let l4 = e10(4).lp_grid_norm(4.0, 32).unwrap();
        assert!((l4 - 1.5f64.powf(0.25)).abs() < 1e-14);
        assert!(e10(4).lp_grid_norm(0.5, 32).is_err());
    }

    #[test]
    fn dealias_sizes() {
        assert_eq!(dealias_grid_size(1), 4);
        assert_eq!(dealias_grid_size(2), 8);
        assert_eq!(dealias_grid_size(4), 16);
        assert_eq!(dealias_grid_size(5), 16);
        assert_eq!(dealias_grid_size(16), 64);
    }
}
