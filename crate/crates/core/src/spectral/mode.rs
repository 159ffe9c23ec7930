use core::fmt;

/// A nonzero wave vector `k = (k1, k2) ∈ Z²`.
///
/// The derived ordering is lexicographic in `(k1, k2)`, which is also the
/// storage order of [`SpectralField`](super::SpectralField) coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub k1: i32,
    pub k2: i32,
}

impl ModeIndex {
    pub const fn new(k1: i32, k2: i32) -> Self {
        Self { k1, k2 }
    }

    pub const fn is_zero(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    /// Upper half plane: `k1 > 0`, or `k1 = 0` and `k2 > 0`. Modes here carry the
    /// cosine basis functions, their negatives carry the sines.
    pub const fn is_positive(&self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    pub const fn negated(&self) -> Self {
        Self::new(-self.k1, -self.k2)
    }

    /// `k^⊥ = (k2, -k1)`.
    pub const fn perp(&self) -> (i32, i32) {
        (self.k2, -self.k1)
    }

    pub fn norm_sq(&self) -> f64 {
        let (a, b) = (self.k1 as f64, self.k2 as f64);
        a * a + b * b
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn sup_norm(&self) -> usize {
        self.k1.unsigned_abs().max(self.k2.unsigned_abs()) as usize
    }

    /// Membership in `Λ_N`.
    pub fn in_truncation(&self, n: usize) -> bool {
        !self.is_zero() && self.sup_norm() <= n
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

/// Slot layout of `Λ_N`: modes in lexicographic order with the zero mode skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modes {
    n: usize,
}

impl Modes {
    pub const fn new(n: usize) -> Self {
        Self { n }
    }

    pub const fn radius(&self) -> usize {
        self.n
    }

    pub const fn side(&self) -> usize {
        2 * self.n + 1
    }

    /// Number of modes in `Λ_N`, i.e. the real Galerkin dimension.
    pub const fn len(&self) -> usize {
        self.side() * self.side() - 1
    }

    pub const fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Slot of `k`; `None` when `k` is zero or outside the box.
    pub fn slot(&self, k: ModeIndex) -> Option<usize> {
        if !k.in_truncation(self.n) {
            return None;
        }
        let n = self.n as i64;
        let raw = ((k.k1 as i64 + n) * (2 * n + 1) + (k.k2 as i64 + n)) as usize;
        let zero = self.n * self.side() + self.n;
        Some(if raw > zero { raw - 1 } else { raw })
    }

    pub fn mode(&self, slot: usize) -> ModeIndex {
        let zero = self.n * self.side() + self.n;
        let raw = if slot >= zero { slot + 1 } else { slot };
        let n = self.n as i32;
        ModeIndex::new(
            (raw / self.side()) as i32 - n,
            (raw % self.side()) as i32 - n,
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (0..self.len()).map(move |s| self.mode(s))
    }
}
