//! Q-Wiener curl noise: the per-mode amplitude spectrum and Brownian increment
//! tables sampled once at the finest resolution and coarsened by exact dyadic sums.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::spectral::{biot_savart, ModeIndex, Modes, SpectralField, VelocityField, TWO_PI};

/// Decay exponents at or below this value violate `Σ c_k² ‖g_k‖_h² < ∞` with
/// `h = 9/2` once the truncation is removed.
pub const DECAY_THRESHOLD: f64 = 5.5;

/// Isotropic amplitudes `c_k = c0 |k|^{-r}` and the resulting curl-noise weights
/// `σ_k = 2π|k| c_k`, so that `ΔW^curl = Σ σ_k Δβ_k e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    n: usize,
    c0: f64,
    decay: f64,
    sigma: Vec<f64>,
}

pub fn build_spectrum(n: usize, c0: f64, r: f64) -> Result<NoiseSpectrum> {
    if n == 0 {
        return Err(invalid("truncation radius", "must be positive"));
    }
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(invalid(
            "noise amplitude c0",
            "must be a positive finite number",
        ));
    }
    if !r.is_finite() {
        return Err(invalid("decay exponent", "must be finite"));
    }
    if r <= DECAY_THRESHOLD {
        log::warn!(
            "decay exponent {r} ≤ {DECAY_THRESHOLD}: the noise regularity assumption fails \
             without truncation"
        );
    }
    let sigma = Modes::new(n)
        .iter()
        .map(|k| {
            let norm = k.norm();
            TWO_PI * norm * c0 * libm::pow(norm, -r)
        })
        .collect();
    Ok(NoiseSpectrum {
        n,
        c0,
        decay: r,
        sigma,
    })
}

impl NoiseSpectrum {
    /// All weights zero: deterministic runs through the stochastic code path.
    pub fn silent(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("truncation radius", "must be positive"));
        }
        Ok(Self {
            n,
            c0: 0.0,
            decay: 0.0,
            sigma: vec![0.0; Modes::new(n).len()],
        })
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn is_silent(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// True when the decay exponent is too small for the untruncated noise to have
    /// the regularity the convergence theory asks for.
    pub fn assumption_violated(&self) -> bool {
        !self.is_silent() && self.decay <= DECAY_THRESHOLD
    }

    pub fn sigma(&self, k: ModeIndex) -> f64 {
        Modes::new(self.n).slot(k).map_or(0.0, |s| self.sigma[s])
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    /// `Σ_k σ_k²`, the rate of `E|W^curl(t)|₂²`.
    pub fn trace(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum()
    }
}

/// Standard Brownian increments `Δβ_k` for every mode of `Λ_N` over `n_fine` equal
/// intervals of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianTable {
    n: usize,
    n_fine: usize,
    t_end: f64,
    master_seed: u64,
    path_id: u64,
    /// Slot-major: mode `s` occupies `[s * n_fine, (s + 1) * n_fine)`.
    increments: Vec<f64>,
}

fn mode_rng(master_seed: u64, path_id: u64, k: ModeIndex) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&path_id.to_le_bytes());
    seed[16..24].copy_from_slice(b"SIEnoise");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(((k.k1 as u32 as u64) << 32) | k.k2 as u32 as u64);
    rng
}

/// Draws a table for `Λ_N`. Each mode has its own ChaCha stream keyed by
/// `(master_seed, path_id, k)`, so a mode's path does not depend on `N`.
pub fn sample_brownian_table(
    spectrum: &NoiseSpectrum,
    n_fine: usize,
    t_end: f64,
    master_seed: u64,
    path_id: u64,
) -> Result<BrownianTable> {
    if n_fine == 0 {
        return Err(invalid("fine step count", "must be at least 1"));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("final time", "must be a positive finite number"));
    }
    let modes = Modes::new(spectrum.truncation());
    let scale = libm::sqrt(t_end / n_fine as f64);
    let mut increments = Vec::with_capacity(modes.len() * n_fine);
    for k in modes.iter() {
        let mut rng = mode_rng(master_seed, path_id, k);
        increments.extend((0..n_fine).map(|_| scale * rng.sample::<f64, _>(StandardNormal)));
    }
    Ok(BrownianTable {
        n: spectrum.truncation(),
        n_fine,
        t_end,
        master_seed,
        path_id,
        increments,
    })
}

/// Pairwise sum over a power-of-two window: the sum over a window is the sum of its
/// two halves, which makes coarsening telescope bitwise.
fn dyadic_sum(values: &[f64], scale: f64) -> f64 {
    match values.len() {
        1 => scale * values[0],
        len => {
            let half = len / 2;
            dyadic_sum(&values[..half], scale) + dyadic_sum(&values[half..], scale)
        }
    }
}

impl BrownianTable {
    /// Wraps externally produced increments (slot-major, `n_fine` per mode).
    pub fn from_increments(
        n: usize,
        n_fine: usize,
        t_end: f64,
        increments: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || n_fine == 0 {
            return Err(invalid(
                "table shape",
                "truncation and fine step count must be positive",
            ));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(invalid("final time", "must be a positive finite number"));
        }
        if increments.len() != Modes::new(n).len() * n_fine {
            return Err(invalid(
                "table shape",
                "increment count does not match Λ_N × n_fine",
            ));
        }
        Ok(Self {
            n,
            n_fine,
            t_end,
            master_seed: 0,
            path_id: 0,
            increments,
        })
    }

    pub fn zeros(n: usize, n_fine: usize, t_end: f64) -> Result<Self> {
        Self::from_increments(
            n,
            n_fine,
            t_end,
            vec![0.0; Modes::new(n.max(1)).len() * n_fine],
        )
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt_fine(&self) -> f64 {
        self.t_end / self.n_fine as f64
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path_id(&self) -> u64 {
        self.path_id
    }

    /// Finest increments of mode `k` in time order.
    pub fn mode_increments(&self, k: ModeIndex) -> Option<&[f64]> {
        Modes::new(self.n)
            .slot(k)
            .map(|s| &self.increments[s * self.n_fine..(s + 1) * self.n_fine])
    }

    /// Number of level-`level` windows, i.e. the step count `n_fine / 2^level`.
    pub fn windows(&self, level: u32) -> Result<usize> {
        let width = 1usize
            .checked_shl(level)
            .filter(|&w| w <= self.n_fine)
            .ok_or(Error::WindowOutOfRange {
                level,
                step: 0,
                reason: "window is wider than the table",
            })?;
        if !self.n_fine.is_multiple_of(width) {
            return Err(Error::WindowOutOfRange {
                level,
                step: 0,
                reason: "window width does not divide the table",
            });
        }
        Ok(self.n_fine / width)
    }

    /// Step size `τ = T / windows(level)`.
    pub fn step_size(&self, level: u32) -> Result<f64> {
        Ok(self.t_end / self.windows(level)? as f64)
    }

    fn window(&self, level: u32, step: usize) -> Result<core::ops::Range<usize>> {
        let windows = self.windows(level)?;
        if step >= windows {
            return Err(Error::WindowOutOfRange {
                level,
                step,
                reason: "step lies past the final time",
            });
        }
        let width = 1usize << level;
        Ok(step * width..(step + 1) * width)
    }

    /// `β_k(t_{i+1}) - β_k(t_i)` at level `level`.
    pub fn increment(&self, k: ModeIndex, level: u32, step: usize) -> Result<f64> {
        let range = self.window(level, step)?;
        let path = self.mode_increments(k).ok_or(Error::ModeOutOfRange {
            k1: k.k1,
            k2: k.k2,
            n: self.n,
        })?;
        Ok(dyadic_sum(&path[range], 1.0))
    }
}

/// `ΔW^curl = Σ_k σ_k Δβ_k e_k` over step `step` of level `level`. The weights are
/// applied to the finest increments before the dyadic sum, so two adjacent windows
/// add up to their parent bit for bit.
pub fn wcurl_increment(
    spectrum: &NoiseSpectrum,
    table: &BrownianTable,
    level: u32,
    step: usize,
) -> Result<SpectralField> {
    if spectrum.truncation() != table.truncation() {
        return Err(Error::TruncationMismatch {
            left: spectrum.truncation(),
            right: table.truncation(),
        });
    }
    let range = table.window(level, step)?;
    let n_fine = table.n_fine;
    let coeffs = spectrum
        .sigma
        .iter()
        .enumerate()
        .map(|(slot, &sigma)| {
            let path = &table.increments[slot * n_fine..(slot + 1) * n_fine];
            dyadic_sum(&path[range.clone()], sigma)
        })
        .collect();
    SpectralField::from_coefficients(table.truncation(), coeffs)
}

/// Velocity increment `ΔW = K * ΔW^curl`.
pub fn w_increment_velocity(
    spectrum: &NoiseSpectrum,
    table: &BrownianTable,
    level: u32,
    step: usize,
) -> Result<VelocityField> {
    Ok(biot_savart(&wcurl_increment(spectrum, table, level, step)?))
}
