//! Periodized tensor-product Meyer wavelets, built on grid frequencies.
//!
//! On the torus of period `P = 2^{L0}` the coefficient of `f` against
//! `Φ^ε_{j,k}` is
//!
//! `f_{j,k} = 2^{−jn/2} Σ_m f̂_m conj(Φ̂^ε(2πm/K)) e^{2πi m·k/K}`, `K = 2^{j+L0}`,
//!
//! which is an inverse FFT of size `K^n` after folding the frequencies mod `K`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dyadic::Epsilon;
use crate::grid::GridSpec;
use crate::spectral::{fft_nd, signed_mode};

/// Smooth transition `ν` with `ν = 0` on `(−∞, 0]`, `ν = 1` on `[1, ∞)` and
/// `ν(x) + ν(1 − x) = 1`.
pub fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let s = |t: f64| (-1.0 / (t * t)).exp();
    let a = s(x);
    a / (a + s(1.0 - x))
}

/// `φ̂(ξ)`, supported in `[−4π/3, 4π/3]`.
pub fn phi_hat(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 2.0 * PI / 3.0 {
        1.0
    } else if a < 4.0 * PI / 3.0 {
        (PI / 2.0 * transition(3.0 * a / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

/// `ψ̂(ξ)`, supported in `[−8π/3, 8π/3] \ (−2π/3, 2π/3)`.
pub fn psi_hat(xi: f64) -> Complex64 {
    let a = xi.abs();
    let mag = if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
        0.0
    } else if a <= 4.0 * PI / 3.0 {
        (PI / 2.0 * transition(3.0 * a / (2.0 * PI) - 1.0)).sin()
    } else {
        (PI / 2.0 * transition(3.0 * a / (4.0 * PI) - 1.0)).cos()
    };
    if mag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(mag, -xi / 2.0)
}

/// Nonzero one-axis factors at scale `j`: `(bin q, m mod K, Φ̂^e(2πm/K))`.
struct AxisTable {
    entries: [Vec<(usize, usize, Complex64)>; 2],
}

fn axis_table(grid: &GridSpec, j: i32) -> (AxisTable, usize) {
    let npts = grid.points_per_axis();
    let k = 1usize << (j + grid.period_log2);
    let mut entries: [Vec<_>; 2] = [Vec::new(), Vec::new()];
    for q in 0..npts {
        let m = signed_mode(q, npts);
        let xi = 2.0 * PI * m as f64 / k as f64;
        let r = m.rem_euclid(k as i64) as usize;
        let p = phi_hat(xi);
        if p != 0.0 {
            entries[0].push((q, r, Complex64::new(p, 0.0)));
        }
        let w = psi_hat(xi);
        if w.norm_sqr() != 0.0 {
            entries[1].push((q, r, w));
        }
    }
    (AxisTable { entries }, k)
}

/// Calls `visit(q_flat, r_flat, factor)` over the tensor product of the
/// per-axis nonzero entries selected by `eps`.
fn for_each_tensor(
    n: usize,
    npts: usize,
    k: usize,
    table: &AxisTable,
    eps: Epsilon,
    mut visit: impl FnMut(usize, usize, Complex64),
) {
    let lists: Vec<&Vec<(usize, usize, Complex64)>> = (0..n)
        .map(|s| &table.entries[((eps >> s) & 1) as usize])
        .collect();
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; n];
    loop {
        let (mut qf, mut rf, mut fac) = (0usize, 0usize, Complex64::new(1.0, 0.0));
        for s in 0..n {
            let (q, r, v) = lists[s][pos[s]];
            qf = qf * npts + q;
            rf = rf * k + r;
            fac *= v;
        }
        visit(qf, rf, fac);
        let mut s = n;
        loop {
            if s == 0 {
                return;
            }
            s -= 1;
            pos[s] += 1;
            if pos[s] < lists[s].len() {
                break;
            }
            pos[s] = 0;
        }
    }
}

/// Coefficients `f^ε_{j,k}` for all `k ∈ [0, K)^n`, row-major, from the
/// normalized spectrum `hat`.
pub fn analyze_scale(grid: &GridSpec, hat: &[Complex64], j: i32, eps: Epsilon) -> Vec<f64> {
    let n = grid.n;
    let (table, k) = axis_table(grid, j);
    let mut acc = vec![Complex64::new(0.0, 0.0); k.pow(n as u32)];
    for_each_tensor(n, grid.points_per_axis(), k, &table, eps, |q, r, fac| {
        acc[r] += hat[q] * fac.conj();
    });
    fft_nd(&mut acc, n, k, true);
    let norm = (-(j as f64) * n as f64 / 2.0).exp2();
    acc.into_iter().map(|c| c.re * norm).collect()
}

/// Adds `Σ_k c_k Φ^ε_{j,k}` to the normalized spectrum `hat`.
pub fn synthesize_scale(
    grid: &GridSpec,
    hat: &mut [Complex64],
    j: i32,
    eps: Epsilon,
    coeffs: &[f64],
) {
    let n = grid.n;
    let (table, k) = axis_table(grid, j);
    let mut c: Vec<Complex64> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut c, n, k, false);
    let norm = (-(j as f64) * n as f64 / 2.0 - grid.period_log2 as f64 * n as f64).exp2();
    for_each_tensor(n, grid.points_per_axis(), k, &table, eps, |q, r, fac| {
        hat[q] += fac * c[r] * norm;
    });
}
