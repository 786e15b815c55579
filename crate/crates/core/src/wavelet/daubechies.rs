//! Daubechies filters, the periodic multilevel filter bank, and cascade
//! evaluation of the continuous scaling function and wavelet.
//!
//! Filters follow `φ(x) = √2 Σ_l h_l φ(2x − l)` with `Σ h_l = √2`, and the
//! wavelet filter is `g_l = (−1)^l h_{2m−1−l}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{QspaceError, Result};

/// Smallest and largest tabulated number of vanishing moments.
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 10;

#[allow(clippy::excessive_precision)]
const FILTERS: [&[f64]; 9] = [
    &[
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ],
    &[
        0.332670552950082616,
        0.80689150931109257649,
        0.4598775021184915701,
        -0.1350110200102545887,
        -0.085441273882026661693,
        0.035226291885709536603,
    ],
    &[
        0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105,
    ],
    &[
        0.16010239797419291448,
        0.60382926979718967054,
        0.72430852843777292773,
        0.13842814590132073151,
        -0.24229488706638203186,
        -0.032244869584638374648,
        0.077571493840045713523,
        -0.0062414902127982742742,
        -0.012580751999081999469,
        0.003335725285473771278,
    ],
    &[
        0.11154074335010946362,
        0.49462389039845308568,
        0.75113390802109535068,
        0.31525035170919762909,
        -0.22626469396543982008,
        -0.12976686756726193556,
        0.097501605587323049102,
        0.027522865530305728626,
        -0.031582039317486029565,
        0.00055384220116149613925,
        0.0047772575109455106396,
        -0.0010773010853084795649,
    ],
    &[
        0.07785205408500917902,
        0.39653931948191730654,
        0.72913209084623511992,
        0.46978228740519312247,
        -0.14390600392856497541,
        -0.22403618499387498264,
        0.071309219266830264751,
        0.080612609151083071913,
        -0.03802993693501441358,
        -0.016574541630666880654,
        0.012550998556099840613,
        0.00042957797292136652113,
        -0.0018016407040474909153,
        0.00035371379997452024845,
    ],
    &[
        0.054415842243104009955,
        0.31287159091429997066,
        0.67563073629728980681,
        0.58535468365420671277,
        -0.015829105256349305667,
        -0.28401554296154692652,
        0.00047248457391328277036,
        0.12874742662047845886,
        -0.01736930100180754617,
        -0.044088253930794751507,
        0.013981027917398281649,
        0.0087460940474057767164,
        -0.0048703529934515743104,
        -0.0003917403733769470463,
        0.00067544940645056936637,
        -0.00011747678412476953373,
    ],
    &[
        0.038077947363878346589,
        0.24383467461259035373,
        0.6048231236901111119,
        0.65728807805130053808,
        0.13319738582500757619,
        -0.29327378327917490881,
        -0.096840783222976460514,
        0.14854074933810638014,
        0.030725681479333379212,
        -0.067632829061329973676,
        0.00025094711483145195759,
        0.022361662123679097205,
        -0.0047232047577513972779,
        -0.0042815036824634298345,
        0.0018476468830562264766,
        0.00023038576352319596721,
        -0.00025196318894271013697,
        0.000039347320316271599481,
    ],
    &[
        0.026670057900555553587,
        0.18817680007769148902,
        0.52720118893172558648,
        0.68845903945360356574,
        0.28117234366057746075,
        -0.24984642432731537942,
        -0.1959462743773770435,
        0.12736934033579326008,
        0.09305736460357235116,
        -0.071394147166397087145,
        -0.029457536821875812858,
        0.03321267405934100174,
        0.0036065535669561696554,
        -0.010733175483330575044,
        0.0013953517470529011658,
        0.0019924052951850561172,
        -0.00068585669495971162656,
        -0.00011646685512928545095,
        0.000093588670320069591334,
        -0.000013264202894521244812,
    ],
];

#[derive(Clone, Debug, PartialEq)]
pub struct DaubechiesFilter {
    order: usize,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl DaubechiesFilter {
    /// Filter with `order` vanishing moments (length `2·order`).
    pub fn new(order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(QspaceError::Parameter(format!(
                "Daubechies order {order} not tabulated (available {MIN_ORDER}..={MAX_ORDER})"
            )));
        }
        let h = FILTERS[order - MIN_ORDER].to_vec();
        let len = h.len();
        let g = (0..len)
            .map(|l| if l % 2 == 0 { h[len - 1 - l] } else { -h[len - 1 - l] })
            .collect();
        Ok(Self { order, h, g })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn low(&self) -> &[f64] {
        &self.h
    }

    pub fn high(&self) -> &[f64] {
        &self.g
    }

    /// Length of the support `[0, 2m − 1]` of `φ` and `ψ`.
    pub fn support_len(&self) -> usize {
        self.h.len() - 1
    }

    /// Discrete moments `Σ_l l^p g_l` for `p = 0..count`.
    pub fn wavelet_moments(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|p| {
                self.g
                    .iter()
                    .enumerate()
                    .map(|(l, g)| (l as f64).powi(p as i32) * g)
                    .sum()
            })
            .collect()
    }

    /// One periodic analysis step on a line of even length `M`:
    /// `a_k = Σ h_l x_{2k+l}`, `d_k = Σ g_l x_{2k+l}`, written as `[a | d]`.
    pub fn analyze_line(&self, x: &[f64], out: &mut [f64]) {
        let len = x.len();
        let half = len / 2;
        for k in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for (l, (h, g)) in self.h.iter().zip(&self.g).enumerate() {
                let v = x[(2 * k + l) % len];
                a += h * v;
                d += g * v;
            }
            out[k] = a;
            out[half + k] = d;
        }
    }

    /// Adjoint of [`analyze_line`](Self::analyze_line).
    pub fn synthesize_line(&self, y: &[f64], out: &mut [f64]) {
        let len = y.len();
        let half = len / 2;
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..half {
            let (a, d) = (y[k], y[half + k]);
            for (l, (h, g)) in self.h.iter().zip(&self.g).enumerate() {
                out[(2 * k + l) % len] += h * a + g * d;
            }
        }
    }

    /// `φ(i / 2^r)` for `i = 0..=(2m−1)·2^r` by the cascade algorithm.
    pub fn scaling_function(&self, r: u32) -> Result<Vec<f64>> {
        let len = self.support_len();
        let inner = len - 1;
        let s2 = std::f64::consts::SQRT_2;
        let mut a = DMatrix::<f64>::zeros(inner, inner);
        for k in 1..len {
            for i in 1..len {
                let l = 2 * k as i64 - i as i64;
                if l >= 0 && (l as usize) < self.h.len() {
                    a[(k - 1, i - 1)] = s2 * self.h[l as usize];
                }
            }
            a[(k - 1, k - 1)] -= 1.0;
        }
        for i in 0..inner {
            a[(inner - 1, i)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(inner);
        rhs[inner - 1] = 1.0;
        let x = a.lu().solve(&rhs).ok_or_else(|| {
            QspaceError::Numeric("singular cascade system for integer samples".into())
        })?;
        let mut v = vec![0.0; len + 1];
        for i in 1..len {
            v[i] = x[i - 1];
        }
        for level in 0..r {
            let step = 1usize << level;
            let mut next = vec![0.0; 2 * (v.len() - 1) + 1];
            for (i, w) in next.iter_mut().enumerate() {
                if i % 2 == 0 {
                    *w = v[i / 2];
                    continue;
                }
                let mut acc = 0.0;
                for (l, h) in self.h.iter().enumerate() {
                    let idx = i as i64 - (l * step) as i64;
                    if idx >= 0 && (idx as usize) < v.len() {
                        acc += h * v[idx as usize];
                    }
                }
                *w = s2 * acc;
            }
            v = next;
        }
        Ok(v)
    }

    /// `ψ(i / 2^r)` for `i = 0..=(2m−1)·2^r`, from `φ` at the same resolution.
    pub fn wavelet_function(&self, r: u32) -> Result<Vec<f64>> {
        let phi = self.scaling_function(r)?;
        let s2 = std::f64::consts::SQRT_2;
        let per = 1i64 << r;
        Ok((0..phi.len())
            .map(|i| {
                let mut acc = 0.0;
                for (l, g) in self.g.iter().enumerate() {
                    let idx = 2 * i as i64 - l as i64 * per;
                    if idx >= 0 && (idx as usize) < phi.len() {
                        acc += g * phi[idx as usize];
                    }
                }
                s2 * acc
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_are_orthonormal_with_moments() {
        for m in MIN_ORDER..=MAX_ORDER {
            let f = DaubechiesFilter::new(m).unwrap();
            let h = f.low();
            for shift in 0..m {
                let s: f64 = (0..h.len() - 2 * shift).map(|i| h[i] * h[i + 2 * shift]).sum();
                let want = if shift == 0 { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-14, "m={m} shift={shift}");
            }
            for (p, mom) in f.wavelet_moments(m).iter().enumerate() {
                let scale: f64 = f
                    .high()
                    .iter()
                    .enumerate()
                    .map(|(l, g)| (l as f64).powi(p as i32) * g.abs())
                    .sum();
                assert!(mom.abs() < 1e-12 * scale.max(1.0), "m={m} p={p} {mom}");
            }
        }
    }

    #[test]
    fn cascade_integrates_to_one_and_refines() {
        let f = DaubechiesFilter::new(4).unwrap();
        let phi = f.scaling_function(8).unwrap();
        let h = 1.0 / 256.0;
        let integral: f64 = phi.iter().sum::<f64>() * h;
        assert!((integral - 1.0).abs() < 1e-10);
        let energy: f64 = phi.iter().map(|v| v * v).sum::<f64>() * h;
        assert!((energy - 1.0).abs() < 1e-3);
        let coarse = f.scaling_function(6).unwrap();
        for (i, v) in coarse.iter().enumerate() {
            assert!((phi[4 * i] - v).abs() < 1e-12);
        }
        let psi = f.wavelet_function(8).unwrap();
        let mean: f64 = psi.iter().sum::<f64>() * h;
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn periodic_step_is_orthogonal() {
        let f = DaubechiesFilter::new(5).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 1.3).sin()).collect();
        let mut y = vec![0.0; 8];
        let mut z = vec![0.0; 8];
        f.analyze_line(&x, &mut y);
        f.synthesize_line(&y, &mut z);
        let e1: f64 = x.iter().map(|v| v * v).sum();
        let e2: f64 = y.iter().map(|v| v * v).sum();
        assert!((e1 - e2).abs() < 1e-12);
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
