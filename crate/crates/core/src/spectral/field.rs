use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::mode::{ModeIndex, Modes};
use super::TWO_PI;
use crate::error::{invalid, Error, Result};

const SQRT_HALF: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Mean-zero periodic scalar field stored as coefficients on the real orthonormal
/// basis `{e_k : k ∈ Λ_N}`.
///
/// Coefficients are kept densely in [`Modes`] slot order; modes not set read as 0.
/// Against the complex exponentials the coefficients map as
/// `ξ̂(k) = (ξ_k + i ξ_{-k}) / √2` for `k` in the upper half plane, with
/// `ξ̂(-k) = conj(ξ̂(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<f64>,
}

/// Builds a field on `Λ_N` from explicit `(mode, coefficient)` entries. Repeated
/// modes accumulate.
pub fn field_from_modes(entries: &[(ModeIndex, f64)], n: usize) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(n)?;
    for &(k, value) in entries {
        if k.is_zero() {
            return Err(Error::ZeroMode);
        }
        let slot = field.modes().slot(k).ok_or(Error::ModeOutOfRange {
            k1: k.k1,
            k2: k.k2,
            n,
        })?;
        field.coeffs[slot] += value;
    }
    Ok(field)
}

/// Orthogonal projection `Π_{Λ_N'}` onto the smaller box `Λ_N'`.
pub fn galerkin_project(xi: &SpectralField, n_target: usize) -> Result<SpectralField> {
    if n_target == 0 {
        return Err(invalid("truncation radius", "must be positive"));
    }
    if n_target > xi.n {
        return Err(invalid(
            "truncation radius",
            alloc::format!("cannot project Λ_{} onto the larger Λ_{}", xi.n, n_target),
        ));
    }
    let mut out = SpectralField::zeros(n_target)?;
    let target = out.modes();
    for (k, v) in xi.iter() {
        if let Some(slot) = target.slot(k) {
            out.coeffs[slot] = v;
        }
    }
    Ok(out)
}

impl SpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("truncation radius", "must be positive"));
        }
        Ok(Self {
            n,
            coeffs: vec![0.0; Modes::new(n).len()],
        })
    }

    /// Wraps a coefficient vector already laid out in slot order.
    pub fn from_coefficients(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("truncation radius", "must be positive"));
        }
        let expected = Modes::new(n).len();
        if coeffs.len() != expected {
            return Err(invalid(
                "coefficient vector",
                alloc::format!("expected {expected} entries, got {}", coeffs.len()),
            ));
        }
        Ok(Self { n, coeffs })
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> Modes {
        Modes::new(self.n)
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `e_k`; 0 for modes outside `Λ_N`.
    pub fn get(&self, k: ModeIndex) -> f64 {
        self.modes().slot(k).map_or(0.0, |s| self.coeffs[s])
    }

    pub fn set(&mut self, k: ModeIndex, value: f64) -> Result<()> {
        if k.is_zero() {
            return Err(Error::ZeroMode);
        }
        let slot = self.modes().slot(k).ok_or(Error::ModeOutOfRange {
            k1: k.k1,
            k2: k.k2,
            n: self.n,
        })?;
        self.coeffs[slot] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        let modes = self.modes();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(s, &v)| (modes.mode(s), v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn ensure_same_truncation(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::TruncationMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    /// L² inner product, exact by orthonormality.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// `‖ξ‖_m = (Σ_k (1 + (2π|k|)²)^m ξ_k²)^{1/2}`.
    pub fn sobolev_norm(&self, m: u32) -> f64 {
        let sum: f64 = self.iter().map(|(k, v)| sobolev_weight(k, m) * v * v).sum();
        libm::sqrt(sum)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    /// Complex-exponential coefficient `ξ̂(k)`.
    pub fn hat(&self, k: ModeIndex) -> Complex64 {
        if k.is_positive() {
            Complex64::new(self.get(k), self.get(k.negated())) * SQRT_HALF
        } else {
            Complex64::new(self.get(k.negated()), -self.get(k)) * SQRT_HALF
        }
    }

    /// Calls `f(k, ξ̂(k))` once for every `k` in the upper half of `Λ_N`.
    pub(crate) fn for_each_positive_hat(&self, mut f: impl FnMut(ModeIndex, Complex64)) {
        let modes = self.modes();
        // Slots above the zero mode hold exactly the upper half plane; their mirrors
        // sit at `len - 1 - slot`.
        let len = modes.len();
        for slot in len / 2..len {
            let k = modes.mode(slot);
            let c = self.coeffs[slot];
            let s = self.coeffs[len - 1 - slot];
            f(k, Complex64::new(c, s) * SQRT_HALF);
        }
    }

    /// Inverse of the complex layout: sets the coefficients of `e_k` and `e_{-k}` from
    /// `ξ̂(k)` for `k` in the upper half plane.
    pub(crate) fn set_from_positive_hat(&mut self, k: ModeIndex, hat: Complex64) {
        let modes = self.modes();
        let slot = modes.slot(k).expect("mode inside truncation");
        let len = modes.len();
        self.coeffs[slot] = core::f64::consts::SQRT_2 * hat.re;
        self.coeffs[len - 1 - slot] = core::f64::consts::SQRT_2 * hat.im;
    }

    /// Writes `ξ̂` into a zeroed `m × m` spectral buffer, scaled entrywise by
    /// `multiplier(k)` (which must satisfy `multiplier(-k) = conj(multiplier(k))`).
    pub(crate) fn scatter_hat(
        &self,
        fft_index: impl Fn(i32, i32) -> usize,
        buffer: &mut [Complex64],
        multiplier: impl Fn(ModeIndex) -> Complex64,
    ) {
        self.for_each_positive_hat(|k, h| {
            let v = h * multiplier(k);
            buffer[fft_index(k.k1, k.k2)] += v;
            buffer[fft_index(-k.k1, -k.k2)] += v.conj();
        });
    }
}

pub(crate) fn sobolev_weight(k: ModeIndex, m: u32) -> f64 {
    let base = 1.0 + TWO_PI * TWO_PI * k.norm_sq();
    libm::pow(base, m as f64)
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.n, rhs.n, "truncation mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.n, rhs.n, "truncation mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        SpectralField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(k1: i32, k2: i32) -> ModeIndex {
        ModeIndex::new(k1, k2)
    }

    #[test]
    fn single_mode_has_unit_norm() {
        let f = field_from_modes(&[(m(1, 0), 1.0)], 4).unwrap();
        assert_eq!(f.l2_norm(), 1.0);
        assert_eq!(field_from_modes(&[], 4).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn parseval_on_two_modes() {
        let f = field_from_modes(&[(m(1, 0), 1.0), (m(0, 1), 2.0)], 4).unwrap();
        assert_eq!(f.dot(&f), 5.0);
    }

    #[test]
    fn rejects_zero_mode_and_out_of_box_modes() {
        assert_eq!(field_from_modes(&[(m(0, 0), 1.0)], 4), Err(Error::ZeroMode));
        assert_eq!(
            field_from_modes(&[(m(5, 0), 1.0)], 4),
            Err(Error::ModeOutOfRange { k1: 5, k2: 0, n: 4 })
        );
        assert!(SpectralField::zeros(0).is_err());
    }

    #[test]
    fn projection_examples() {
        let f = field_from_modes(&[(m(1, 0), 1.0), (m(3, 3), 2.0)], 4).unwrap();
        assert_eq!(galerkin_project(&f, 4).unwrap(), f);
        let only_high = field_from_modes(&[(m(3, 3), 2.0)], 4).unwrap();
        assert!(galerkin_project(&only_high, 2).unwrap().is_zero());
        let p = galerkin_project(&f, 2).unwrap();
        assert_eq!(p.get(m(1, 0)), 1.0);
        assert_eq!(p.dimension(), 24);
        assert!(p.l2_norm() < f.l2_norm());
        assert!(galerkin_project(&f, 0).is_err());
        assert!(galerkin_project(&f, 5).is_err());
    }

    #[test]
    fn sobolev_single_mode() {
        let f = field_from_modes(&[(m(1, 0), 1.0)], 3).unwrap();
        assert_eq!(f.sobolev_norm(0), f.l2_norm());
        let expected = (1.0 + 4.0 * core::f64::consts::PI.powi(2)).sqrt();
        assert!((f.sobolev_norm(1) - expected).abs() < 1e-14);
    }

    #[test]
    fn hat_layout_round_trips() {
        let f = field_from_modes(&[(m(1, 2), 0.3), (m(-1, -2), -0.7), (m(0, -1), 1.1)], 3).unwrap();
        let mut g = SpectralField::zeros(3).unwrap();
        f.for_each_positive_hat(|k, h| {
            assert_eq!(h, f.hat(k));
            assert_eq!(f.hat(k.negated()), h.conj());
            g.set_from_positive_hat(k, h);
        });
        assert!(g.max_abs_diff(&f) < 1e-15);
    }
}
