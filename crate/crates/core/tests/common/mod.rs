//! Brute-force reference computations that never touch the FFT path: basis functions
//! are evaluated from their trigonometric definitions and integrals are plain grid
//! sums at a resolution where they are exact for the polynomials involved.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sie_core::initial::random_smooth_field;
use sie_core::{ModeIndex, SpectralField};
use std::f64::consts::{PI, SQRT_2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(n: usize, decay: f64, seed: u64) -> SpectralField {
    random_smooth_field(n, decay, &mut rng(seed)).unwrap()
}

/// `e_k(x)`.
pub fn basis(k: ModeIndex, x: (f64, f64)) -> f64 {
    let phase = 2.0 * PI * (k.k1 as f64 * x.0 + k.k2 as f64 * x.1);
    if k.is_positive() {
        SQRT_2 * phase.cos()
    } else {
        SQRT_2 * phase.sin()
    }
}

/// Quadrature grid with `3N + 2` points per side: exact for products of three
/// `Λ_N` functions.
pub fn quadrature_points(n: usize) -> Vec<(f64, f64)> {
    let m = 3 * n + 2;
    (0..m)
        .flat_map(|a| (0..m).map(move |b| (a as f64 / m as f64, b as f64 / m as f64)))
        .collect()
}

/// `u = K*ξ = Σ ξ_k k^⊥ e_{-k} / (2π|k|²)` and its Jacobian `∂_l u_j`.
pub fn velocity_and_jacobian(xi: &SpectralField, x: (f64, f64)) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut u = [0.0; 2];
    let mut du = [[0.0; 2]; 2];
    for (k, c) in xi.iter() {
        if c == 0.0 {
            continue;
        }
        let (p1, p2) = k.perp();
        let perp = [p1 as f64, p2 as f64];
        let kk = [k.k1 as f64, k.k2 as f64];
        let ksq = k.norm_sq();
        let e_minus = basis(k.negated(), x);
        let e_plus = basis(k, x);
        for j in 0..2 {
            u[j] += c * perp[j] * e_minus / (2.0 * PI * ksq);
            for l in 0..2 {
                // ∂_l e_{-k} = -2π k_l e_k
                du[j][l] += c * perp[j] * (-kk[l]) * e_plus / ksq;
            }
        }
    }
    (u, du)
}

/// `∇e_k = 2πk e_{-k}`.
pub fn basis_gradient(k: ModeIndex, x: (f64, f64)) -> [f64; 2] {
    let e = basis(k.negated(), x);
    [2.0 * PI * k.k1 as f64 * e, 2.0 * PI * k.k2 as f64 * e]
}

/// Matrix of `B(ξ)` on the real basis: `B[j][l] = ⟨(K*ξ)·∇e_l, e_j⟩`.
pub fn transport_matrix(xi: &SpectralField) -> Vec<Vec<f64>> {
    let modes: Vec<ModeIndex> = xi.modes().iter().collect();
    let d = modes.len();
    let pts = quadrature_points(xi.truncation());
    let w = 1.0 / pts.len() as f64;
    let mut b = vec![vec![0.0; d]; d];
    for &x in &pts {
        let (u, _) = velocity_and_jacobian(xi, x);
        let e: Vec<f64> = modes.iter().map(|&k| basis(k, x)).collect();
        let adv: Vec<f64> = modes
            .iter()
            .map(|&k| {
                let g = basis_gradient(k, x);
                u[0] * g[0] + u[1] * g[1]
            })
            .collect();
        for j in 0..d {
            for l in 0..d {
                b[j][l] += w * adv[l] * e[j];
            }
        }
    }
    b
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let d = rhs.len();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..d {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..d {
                    a[row][c] -= f * a[col][c];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let s: f64 = (row + 1..d).map(|c| a[row][c] * x[c]).sum();
        x[row] = (rhs[row] - s) / a[row][row];
    }
    x
}

/// Solution of `(I + τB(ξ))ξ̄ = ξ` from the quadrature-assembled matrix.
pub fn implicit_solve_oracle(xi: &SpectralField, tau: f64) -> Vec<f64> {
    let mut a = transport_matrix(xi);
    for (j, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v *= tau;
        }
        row[j] += 1.0;
    }
    gauss_solve(a, xi.coefficients().to_vec())
}

/// `π_k = -⟨(u·∇)u, ∇e_k⟩ / (4π²|k|²)` by quadrature, from `∇π = (P - Id)(u·∇)u`.
pub fn pressure_oracle(xi: &SpectralField) -> Vec<f64> {
    let modes: Vec<ModeIndex> = xi.modes().iter().collect();
    let pts = quadrature_points(xi.truncation());
    let w = 1.0 / pts.len() as f64;
    let mut out = vec![0.0; modes.len()];
    for &x in &pts {
        let (u, du) = velocity_and_jacobian(xi, x);
        let f = [
            u[0] * du[0][0] + u[1] * du[0][1],
            u[0] * du[1][0] + u[1] * du[1][1],
        ];
        for (slot, &k) in modes.iter().enumerate() {
            let g = basis_gradient(k, x);
            out[slot] -= w * (f[0] * g[0] + f[1] * g[1]) / (4.0 * PI * PI * k.norm_sq());
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
