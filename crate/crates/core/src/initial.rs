//! Initial vorticity fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::spectral::{field_from_modes, ModeIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `e_(1,0) + e_(0,1) + 0.5·e_(1,1)`.
    Preset3Mode,
    /// Coefficients `|k|^{-decay}·Z_k` with i.i.d. standard normal `Z_k`.
    RandomSmooth { decay: f64, seed: u64 },
    /// `e_k`, a steady state of the deterministic flow.
    SingleMode { k1: i32, k2: i32 },
}

impl InitialCondition {
    pub fn build(&self, n: usize) -> Result<SpectralField> {
        match *self {
            Self::Preset3Mode => field_from_modes(
                &[
                    (ModeIndex::new(1, 0), 1.0),
                    (ModeIndex::new(0, 1), 1.0),
                    (ModeIndex::new(1, 1), 0.5),
                ],
                n,
            ),
            Self::RandomSmooth { decay, seed } => {
                if !decay.is_finite() || decay < 0.0 {
                    return Err(invalid(
                        "smoothness exponent",
                        "must be finite and non-negative",
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_smooth_field(n, decay, &mut rng)
            }
            Self::SingleMode { k1, k2 } => field_from_modes(&[(ModeIndex::new(k1, k2), 1.0)], n),
        }
    }
}

/// Random field on `Λ_N` with coefficients `|k|^{-decay}·N(0, 1)`.
pub fn random_smooth_field<R: Rng + ?Sized>(
    n: usize,
    decay: f64,
    rng: &mut R,
) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(n)?;
    let modes = field.modes();
    for (slot, c) in field.coefficients_mut().iter_mut().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        *c = z * libm::pow(modes.mode(slot).norm(), -decay);
    }
    Ok(field)
}
