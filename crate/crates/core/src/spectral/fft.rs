use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::TWO_PI;

/// One-dimensional DFT of fixed length: iterative radix-2 for powers of two,
/// direct summation otherwise. Unnormalized in both directions.
#[derive(Debug, Clone)]
struct LineFft {
    len: usize,
    /// `exp(-2πi j / len)`; half a period for radix-2, a full period for the direct path.
    roots: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl LineFft {
    fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let radix2 = len.is_power_of_two();
        let count = if radix2 { len / 2 } else { len };
        let roots = (0..count)
            .map(|j| {
                let angle = -TWO_PI * j as f64 / len as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let bitrev = if radix2 && len > 1 {
            let bits = len.trailing_zeros();
            (0..len)
                .map(|i| i.reverse_bits() >> (usize::BITS - bits))
                .collect()
        } else {
            Vec::new()
        };
        Self { len, roots, bitrev }
    }

    fn process(&self, data: &mut [Complex64], inverse: bool, scratch: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len);
        if self.len == 1 {
            return;
        }
        if self.len.is_power_of_two() {
            self.radix2(data, inverse);
        } else {
            self.direct(data, inverse, scratch);
        }
    }

    fn root(&self, idx: usize, inverse: bool) -> Complex64 {
        let w = self.roots[idx];
        if inverse {
            w.conj()
        } else {
            w
        }
    }

    fn radix2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.root(j * stride, inverse);
                    let t = w * data[start + j + half];
                    let u = data[start + j];
                    data[start + j] = u + t;
                    data[start + j + half] = u - t;
                }
            }
            size *= 2;
        }
    }

    fn direct(&self, data: &mut [Complex64], inverse: bool, scratch: &mut [Complex64]) {
        let n = self.len;
        for (k, out) in scratch[..n].iter_mut().enumerate() {
            *out = data
                .iter()
                .enumerate()
                .map(|(j, x)| x * self.root((j * k) % n, inverse))
                .sum();
        }
        data.copy_from_slice(&scratch[..n]);
    }
}

/// Square two-dimensional DFT on an `m × m` row-major array.
///
/// Entry `b * m + a` holds the sample at `x = (a/m, b/m)` in physical space, and
/// the coefficient of `exp(2πi (q1 a + q2 b)/m)` with `q1 ≡ a`, `q2 ≡ b (mod m)`
/// in spectral space.
#[derive(Debug, Clone)]
pub struct Fft2 {
    m: usize,
    line: LineFft,
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            line: LineFft::new(m),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Spectral coefficients to grid values: `x[a, b] = Σ_q X[q] exp(+2πi q·(a, b)/m)`.
    pub fn synthesize(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Grid values to spectral coefficients: `X[q] = m⁻² Σ x[a, b] exp(-2πi q·(a, b)/m)`.
    pub fn analyze(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / (self.m * self.m) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.m;
        assert_eq!(
            data.len(),
            m * m,
            "buffer does not match the transform size"
        );
        let mut scratch = vec![Complex64::new(0.0, 0.0); m];
        let mut column = vec![Complex64::new(0.0, 0.0); m];
        for row in data.chunks_exact_mut(m) {
            self.line.process(row, inverse, &mut scratch);
        }
        for a in 0..m {
            for b in 0..m {
                column[b] = data[b * m + a];
            }
            self.line.process(&mut column, inverse, &mut scratch);
            for b in 0..m {
                data[b * m + a] = column[b];
            }
        }
    }

    /// Flat index of wave vector `(q1, q2)` in spectral layout.
    pub fn index(&self, q1: i32, q2: i32) -> usize {
        let m = self.m as i32;
        (q2.rem_euclid(m) * m + q1.rem_euclid(m)) as usize
    }
}
