//! Fourier multipliers on the torus grid.
//!
//! Conventions: `f̂_m = N^{-n} Σ_p f(x_p) e^{-i ξ_m·x_p}` and
//! `f(x_p) = Σ_m f̂_m e^{i ξ_m·x_p}` with `ξ_m = 2π m / P`, `m ∈ [-N/2, N/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::{GridFunction, GridSpec};

/// In-place unnormalized n-dimensional FFT over a row-major cube of side `side`.
pub fn fft_nd(data: &mut [Complex64], n: usize, side: usize, inverse: bool) {
    debug_assert_eq!(data.len(), side.pow(n as u32));
    if side == 1 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = side.pow((n - 1 - axis) as u32);
        let outer = data.len() / (side * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * side * stride + i;
                for (q, v) in line.iter_mut().enumerate() {
                    *v = data[base + q * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (q, v) in line.iter().enumerate() {
                    data[base + q * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of DFT bin `q` for an `N`-point axis.
pub fn signed_mode(q: usize, npts: usize) -> i64 {
    if q < npts / 2 {
        q as i64
    } else {
        q as i64 - npts as i64
    }
}

/// Normalized spectrum `f̂`.
pub fn spectrum(f: &GridFunction) -> Vec<Complex64> {
    let spec = f.spec();
    let mut data: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, spec.n, spec.points_per_axis(), false);
    let scale = 1.0 / spec.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Real part of `Σ_m f̂_m e^{iξ·x}`.
pub fn from_spectrum(spec: GridSpec, mut hat: Vec<Complex64>) -> GridFunction {
    fft_nd(&mut hat, spec.n, spec.points_per_axis(), true);
    GridFunction::new(spec, hat.into_iter().map(|c| c.re).collect())
        .expect("inverse transform of a finite spectrum is finite")
}

/// Applies `m(ξ, nyquist)` where `nyquist` flags bins sitting on the Nyquist
/// frequency of any axis.
pub fn apply_multiplier(
    f: &GridFunction,
    multiplier: impl Fn(&[f64], bool) -> Complex64,
) -> GridFunction {
    let spec = *f.spec();
    let npts = spec.points_per_axis();
    let mut hat = spectrum(f);
    let freq = 2.0 * PI / spec.period();
    let mut xi = vec![0.0; spec.n];
    for (p, v) in hat.iter_mut().enumerate() {
        let idx = spec.multi_index(p);
        let mut nyq = false;
        for (s, &q) in idx.iter().enumerate() {
            xi[s] = freq * signed_mode(q, npts) as f64;
            nyq |= npts > 1 && q == npts / 2;
        }
        *v *= multiplier(&xi, nyq);
    }
    from_spectrum(spec, hat)
}

/// `(-Δ)^{α/2}` as the multiplier `|ξ|^α`; the `ξ = 0` mode is sent to zero, so
/// negative `α` acts on the mean-zero part.
pub fn fractional_laplacian(f: &GridFunction, alpha: f64) -> GridFunction {
    apply_multiplier(f, |xi, _| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(r2.powf(alpha / 2.0), 0.0)
        }
    })
}

/// Riesz transform `R_i`, multiplier `-i ξ_i / |ξ|`. `R_0` is the identity.
///
/// The multiplier is set to zero at `ξ = 0` and on Nyquist bins, where a
/// purely imaginary multiplier has no real-valued counterpart. In 1-D this is
/// the Hilbert transform with `H sin = -cos`.
pub fn riesz_apply(f: &GridFunction, axis: usize) -> GridFunction {
    assert!(axis <= f.spec().n, "Riesz index {axis} exceeds dimension");
    if axis == 0 {
        return f.clone();
    }
    apply_multiplier(f, |xi, nyq| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 == 0.0 || nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi[axis - 1] / r2.sqrt())
        }
    })
}
