use core::ops::Sub;

use num_complex::Complex64;

use super::fft::Fft2;
use super::field::{sobolev_weight, SpectralField};
use super::grid::synthesize_pair;
use super::mode::ModeIndex;
use super::TWO_PI;
use crate::error::Result;

/// Divergence-free, mean-zero velocity field on `Λ_N`.
///
/// Stored through its stream function `ψ` (`u = ∇^⊥ψ = (-∂₂ψ, ∂₁ψ)`), so that on the
/// complex-exponential basis `û(k) = -2πi k^⊥ ψ̂(k)` with `k^⊥ = (k₂, -k₁)`. Every
/// coefficient is a multiple of `k^⊥`, which makes `k·û(k) = 0` structural, and the
/// real stream function gives Hermitian symmetry `û(-k) = conj(û(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    stream: SpectralField,
}

/// Biot–Savart law `u = K * ξ`: `û(k) = i ξ̂(k) k^⊥ / (2π|k|²)`, equivalently
/// `K * e_k = k^⊥ e_{-k} / (2π|k|²)` on the real basis.
pub fn biot_savart(xi: &SpectralField) -> VelocityField {
    let mut stream = xi.clone();
    let modes = xi.modes();
    for (slot, c) in stream.coefficients_mut().iter_mut().enumerate() {
        let k = modes.mode(slot);
        *c = -*c / (TWO_PI * TWO_PI * k.norm_sq());
    }
    VelocityField { stream }
}

impl VelocityField {
    pub fn zeros(n: usize) -> Result<Self> {
        Ok(Self {
            stream: SpectralField::zeros(n)?,
        })
    }

    pub fn from_stream_function(stream: SpectralField) -> Self {
        Self { stream }
    }

    pub fn stream_function(&self) -> &SpectralField {
        &self.stream
    }

    pub fn truncation(&self) -> usize {
        self.stream.truncation()
    }

    /// `û(k)` on the basis `exp(2πi k·x)`.
    pub fn coefficient(&self, k: ModeIndex) -> [Complex64; 2] {
        let (p1, p2) = k.perp();
        let amp = Complex64::new(0.0, -TWO_PI) * self.stream.hat(k);
        [amp * p1 as f64, amp * p2 as f64]
    }

    /// `max_k |k·û(k)|`.
    pub fn max_divergence(&self) -> f64 {
        self.stream
            .iter()
            .map(|(k, _)| {
                let (p1, p2) = k.perp();
                let amp = Complex64::new(0.0, -TWO_PI) * self.stream.hat(k);
                (amp * (k.k1 * p1 + k.k2 * p2) as f64).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Scalar curl `∇^⊥·u = ∂₁u₂ - ∂₂u₁ = Δψ`.
    pub fn curl(&self) -> SpectralField {
        let mut xi = self.stream.clone();
        let modes = xi.modes();
        for (slot, c) in xi.coefficients_mut().iter_mut().enumerate() {
            let k = modes.mode(slot);
            *c *= -TWO_PI * TWO_PI * k.norm_sq();
        }
        xi
    }

    /// `|u|₂`; uses `∇e_k = 2πk e_{-k}`.
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    /// `‖u‖_m² = Σ_k (1 + (2π|k|)²)^m |û(k)|²`, the same convention as scalar fields.
    pub fn sobolev_norm(&self, m: u32) -> f64 {
        let sum: f64 = self
            .stream
            .iter()
            .map(|(k, psi)| sobolev_weight(k, m) * TWO_PI * TWO_PI * k.norm_sq() * psi * psi)
            .sum();
        libm::sqrt(sum)
    }

    /// Grid samples `(u₁, u₂)`.
    pub fn to_grids(&self, fft: &Fft2) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
        synthesize_pair(
            &self.stream,
            fft,
            |k| Complex64::new(0.0, -TWO_PI * k.k2 as f64),
            |k| Complex64::new(0.0, TWO_PI * k.k1 as f64),
        )
    }
}

impl Sub for &VelocityField {
    type Output = VelocityField;
    fn sub(self, rhs: &VelocityField) -> VelocityField {
        VelocityField {
            stream: &self.stream - &rhs.stream,
        }
    }
}
