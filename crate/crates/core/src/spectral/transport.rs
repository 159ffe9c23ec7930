use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::Fft2;
use super::field::SpectralField;
use super::grid::{dealias_grid_size, extract_real, synthesize_pair};
use super::velocity::biot_savart;
use super::TWO_PI;
use crate::error::Result;

/// The linear map `ζ ↦ B(ξ)ζ = Π_{Λ_N}[(K*ξ)·∇ζ]` for a frozen advecting field `ξ`.
///
/// The advecting velocity is sampled once on the padded grid; each application costs
/// one packed inverse transform for `∇ζ` and one forward transform of the product.
#[derive(Debug, Clone)]
pub struct TransportOperator {
    n: usize,
    fft: Fft2,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl TransportOperator {
    pub fn new(xi_adv: &SpectralField) -> Self {
        let n = xi_adv.truncation();
        let fft = Fft2::new(dealias_grid_size(n));
        let (u1, u2) = biot_savart(xi_adv).to_grids(&fft);
        Self { n, fft, u1, u2 }
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    /// Largest speed `|u|` over the padded grid.
    pub fn max_speed(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .map(|(a, b)| libm::sqrt(a * a + b * b))
            .fold(0.0, f64::max)
    }

    /// Upper bound `2π√2·N·|u|_∞` on the operator norm of `B`.
    pub fn norm_bound(&self) -> f64 {
        TWO_PI * core::f64::consts::SQRT_2 * self.n as f64 * self.max_speed()
    }

    pub fn apply(&self, zeta: &SpectralField) -> Result<SpectralField> {
        if zeta.truncation() != self.n {
            return Err(crate::Error::TruncationMismatch {
                left: self.n,
                right: zeta.truncation(),
            });
        }
        let (d1, d2) = synthesize_pair(
            zeta,
            &self.fft,
            |k| Complex64::new(0.0, TWO_PI * k.k1 as f64),
            |k| Complex64::new(0.0, TWO_PI * k.k2 as f64),
        );
        let mut data: Vec<Complex64> = self
            .u1
            .iter()
            .zip(&self.u2)
            .zip(d1.iter().zip(&d2))
            .map(|((a, b), (g1, g2))| Complex64::new(a * g1 + b * g2, 0.0))
            .collect();
        self.fft.analyze(&mut data);
        extract_real(&data, &self.fft, self.n)
    }
}

/// `Π_{Λ_N}[(K*ξ_adv)·∇ζ]`, alias-free.
pub fn transport_term(xi_adv: &SpectralField, zeta: &SpectralField) -> Result<SpectralField> {
    xi_adv.ensure_same_truncation(zeta)?;
    TransportOperator::new(xi_adv).apply(zeta)
}
