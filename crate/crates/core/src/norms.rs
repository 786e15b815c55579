//! Q-space and square-function norms of coefficient fields and grid functions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::error::{QspaceError, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::wavelet::CoefficientField;

pub use crate::spectral::fractional_laplacian;

/// `α` together with the dimension it is used in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaParam {
    pub alpha: f64,
    pub n: usize,
}

impl AlphaParam {
    /// Accepts `0 ≤ α ≤ n/2`.
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0 && alpha <= n as f64 / 2.0) {
            return Err(QspaceError::Parameter(format!(
                "alpha = {alpha} outside the Q-space range [0, n/2] = [0, {}]",
                n as f64 / 2.0
            )));
        }
        Ok(Self { alpha, n })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub cube: DyadicCube,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub profile: Vec<ProfileEntry>,
    /// Largest profile value at each scale, coarse to fine.
    pub scale_maxima: Vec<(i32, f64)>,
    pub meta: BTreeMap<String, String>,
}

impl NormReport {
    /// CSV rows `j,k,value` with `k` components joined by `;`.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("j,k,value\n");
        for e in &self.profile {
            let k: Vec<String> = e.cube.k().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{},{},{:.17e}\n", e.cube.j, k.join(";"), e.value));
        }
        out
    }
}

fn weighted_energy(c: &CoefficientField, q: &DyadicCube, alpha: f64) -> f64 {
    c.wavelets()
        .filter(|(i, _)| q.contains(&i.cube))
        .map(|(i, v)| (2.0 * i.j() as f64 * alpha).exp2() * v * v)
        .sum()
}

/// `C_{α,Q} f = |Q|^{α/n − 1/2} (Σ_{Q_{j,k} ⊂ Q} 2^{2jα} |f^ε_{j,k}|²)^{1/2}`
/// over the stored wavelet entries.
pub fn c_alpha_q(c: &CoefficientField, q: &DyadicCube, alpha: f64) -> f64 {
    let n = q.dim() as f64;
    q.volume().powf(alpha / n - 0.5) * weighted_energy(c, q, alpha).sqrt()
}

/// All dyadic cubes of the torus `[0, 2^{period_log2})^n` at scales
/// `j_lo..=j_hi`.
pub fn torus_cubes(n: usize, period_log2: i32, j_lo: i32, j_hi: i32) -> Result<Vec<DyadicCube>> {
    if j_lo + period_log2 < 0 {
        return Err(QspaceError::Window {
            scale: j_lo,
            reason: "coarser than the torus".into(),
        });
    }
    let mut out = Vec::new();
    for j in j_lo..=j_hi {
        let side = crate::dyadic::positions_per_axis(j, period_log2);
        for k in crate::dyadic::lattice(n, side) {
            out.push(DyadicCube::new(j, &k)?);
        }
    }
    Ok(out)
}

/// Subtree sums of `2^{2jα} Σ_ε |f^ε_{j,k}|²` for every cube that is an
/// ancestor-or-self of a stored wavelet entry, down to scale `j_floor`.
fn subtree_energies(c: &CoefficientField, alpha: f64, j_floor: i32) -> BTreeMap<DyadicCube, f64> {
    let mut by_scale: BTreeMap<i32, BTreeMap<DyadicCube, f64>> = BTreeMap::new();
    for (i, v) in c.wavelets() {
        let e = (2.0 * i.j() as f64 * alpha).exp2() * v * v;
        *by_scale.entry(i.j()).or_default().entry(i.cube).or_default() += e;
    }
    let Some((&finest, _)) = by_scale.iter().next_back() else {
        return BTreeMap::new();
    };
    let mut out = BTreeMap::new();
    let mut carry: BTreeMap<DyadicCube, f64> = BTreeMap::new();
    let mut j = finest;
    while j >= j_floor {
        let mut level = std::mem::take(&mut carry);
        if let Some(own) = by_scale.get(&j) {
            for (q, e) in own {
                *level.entry(*q).or_default() += e;
            }
        }
        for (q, e) in &level {
            if j > j_floor {
                *carry.entry(q.parent()).or_default() += e;
            }
            out.insert(*q, *e);
        }
        j -= 1;
    }
    out
}

/// `sup_Q C_{α,Q} f` over `cubes`, with the per-cube profile and the per-scale
/// maxima used as a decay diagnostic.
pub fn q_norm(c: &CoefficientField, alpha: f64, cubes: &[DyadicCube]) -> Result<NormReport> {
    if cubes.is_empty() {
        return Err(QspaceError::Empty("q_norm window holds no cubes".into()));
    }
    let n = c.dim();
    let j_floor = cubes.iter().map(|q| q.j).min().expect("nonempty");
    let energies = subtree_energies(c, alpha, j_floor);
    let mut profile = Vec::with_capacity(cubes.len());
    let mut scale_max: BTreeMap<i32, f64> = BTreeMap::new();
    let mut value: f64 = 0.0;
    for q in cubes {
        if q.dim() != n {
            return Err(QspaceError::Shape("cube dimension differs from the field".into()));
        }
        let e = energies.get(q).copied().unwrap_or(0.0);
        let v = q.volume().powf(alpha / n as f64 - 0.5) * e.sqrt();
        value = value.max(v);
        let m = scale_max.entry(q.j).or_insert(0.0);
        *m = m.max(v);
        profile.push(ProfileEntry { cube: *q, value: v });
    }
    let mut meta = BTreeMap::new();
    meta.insert("op".into(), "q_norm".into());
    meta.insert("alpha".into(), alpha.to_string());
    meta.insert("cubes".into(), cubes.len().to_string());
    meta.insert(
        "scales".into(),
        format!("{}..={}", j_floor, cubes.iter().map(|q| q.j).max().expect("nonempty")),
    );
    Ok(NormReport {
        value,
        profile,
        scale_maxima: scale_max.into_iter().collect(),
        meta,
    })
}

/// `sup_Q C_{α,Q} f` over every dyadic cube of the torus, from one cube per
/// period down to the finest stored scale. Cubes holding no coefficient
/// contribute zero and are left out of the profile.
pub fn q_norm_field(c: &CoefficientField, alpha: f64) -> Result<NormReport> {
    let w = c.window();
    let energies = subtree_energies(c, alpha, -w.period_log2);
    let n = w.n as f64;
    let mut profile = Vec::with_capacity(energies.len());
    let mut scale_max: BTreeMap<i32, f64> = BTreeMap::new();
    let mut value: f64 = 0.0;
    for (q, e) in &energies {
        let v = q.volume().powf(alpha / n - 0.5) * e.sqrt();
        value = value.max(v);
        let m = scale_max.entry(q.j).or_insert(0.0);
        *m = m.max(v);
        profile.push(ProfileEntry { cube: *q, value: v });
    }
    let mut meta = BTreeMap::new();
    meta.insert("op".into(), "q_norm".into());
    meta.insert("alpha".into(), alpha.to_string());
    meta.insert("cubes".into(), "all torus cubes".into());
    Ok(NormReport {
        value,
        profile,
        scale_maxima: scale_max.into_iter().collect(),
        meta,
    })
}

/// `B_{α,Q} f = |Q|^{α/n} (|Q|^{−1} ∫_Q |(−Δ)^{α/2} f − f_{α,Q}|²)^{1/2}` with
/// the mean and the integral taken over grid points in `Q`.
pub fn b_alpha_q(f: &GridFunction, q: &DyadicCube, alpha: f64) -> Result<f64> {
    let pts = f.spec().points_in_cube(q)?;
    let g = fractional_laplacian(f, alpha);
    Ok(b_alpha_q_from(&g, &pts, q, alpha))
}

fn b_alpha_q_from(g: &GridFunction, pts: &[usize], q: &DyadicCube, alpha: f64) -> f64 {
    let s = g.samples();
    let mean = pts.iter().map(|&p| s[p]).sum::<f64>() / pts.len() as f64;
    let var = pts.iter().map(|&p| (s[p] - mean).powi(2)).sum::<f64>() / pts.len() as f64;
    q.volume().powf(alpha / q.dim() as f64) * var.sqrt()
}

/// `sup_Q B_{α,Q} f` over `cubes`; the multiplier is applied once.
pub fn b_alpha_sup(f: &GridFunction, cubes: &[DyadicCube], alpha: f64) -> Result<f64> {
    let g = fractional_laplacian(f, alpha);
    let mut best: f64 = 0.0;
    for q in cubes {
        let pts = f.spec().points_in_cube(q)?;
        best = best.max(b_alpha_q_from(&g, &pts, q, alpha));
    }
    Ok(best)
}

/// Largest number of grid points in a cube accepted by
/// [`double_integral_seminorm`].
pub const DOUBLE_INTEGRAL_MAX_POINTS: usize = 1 << 13;

/// `|Q|^{2α/n − 1} ∫_Q ∫_Q |f(x) − f(y)|² / |x − y|^{n + 2α} dx dy` by the
/// midpoint rule on grid cells, omitting the diagonal cells. Returned without
/// the square root.
pub fn double_integral_seminorm(f: &GridFunction, q: &DyadicCube, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(QspaceError::Parameter(format!(
            "alpha = {alpha} outside (0, 1) for the double-integral form"
        )));
    }
    let spec = f.spec();
    let pts = spec.points_in_cube(q)?;
    if pts.len() > DOUBLE_INTEGRAL_MAX_POINTS {
        return Err(QspaceError::Parameter(format!(
            "{} grid points in the cube exceed the quadrature limit {}",
            pts.len(),
            DOUBLE_INTEGRAL_MAX_POINTS
        )));
    }
    let n = spec.n;
    let h = spec.spacing();
    let side = (pts.len() as f64).powf(1.0 / n as f64).round() as usize;
    let local: Vec<Vec<f64>> = crate::dyadic::lattice(n, side as i64)
        .into_iter()
        .map(|v| v.iter().map(|&i| i as f64 * h).collect())
        .collect();
    let s = f.samples();
    let expo = (n as f64 + 2.0 * alpha) / 2.0;
    let mut total = 0.0;
    for a in 0..pts.len() {
        for b in 0..pts.len() {
            if a == b {
                continue;
            }
            let d2: f64 = local[a].iter().zip(&local[b]).map(|(x, y)| (x - y).powi(2)).sum();
            total += (s[pts[a]] - s[pts[b]]).powi(2) / d2.powf(expo);
        }
    }
    let vol = spec.cell_volume();
    Ok(q.volume().powf(2.0 * alpha / n as f64 - 1.0) * total * vol * vol)
}

/// A square function `S(x)²` that is constant on the dyadic cells of scale
/// `scale` of the torus, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareFunction {
    pub n: usize,
    pub scale: i32,
    pub period_log2: i32,
    pub squared: Vec<f64>,
}

impl SquareFunction {
    /// `S² = Σ w(j) |g^ε_{j,k}|² χ_{Q_{j,k}}` over the wavelet entries of `c`,
    /// resolved at the finest stored scale.
    pub fn build(c: &CoefficientField, weight: impl Fn(i32) -> f64) -> Self {
        let w = c.window();
        let scale = c.finest_scale().unwrap_or(w.j_min).max(w.j_min);
        Self::build_at(c, scale, weight)
    }

    /// As [`build`](Self::build) but resolved at `scale`, which must be at least
    /// the finest stored scale.
    pub fn build_at(c: &CoefficientField, scale: i32, weight: impl Fn(i32) -> f64) -> Self {
        let w = c.window();
        let n = w.n;
        let lo = w.j_min;
        let mut levels: Vec<Vec<f64>> = (lo..=scale)
            .map(|j| vec![0.0; (w.positions(j) as usize).pow(n as u32)])
            .collect();
        for (i, v) in c.wavelets() {
            let j = i.j();
            assert!(j <= scale, "square function resolved below a stored scale");
            let side = w.positions(j) as usize;
            let p = i.k().iter().fold(0usize, |a, &k| a * side + k as usize);
            levels[(j - lo) as usize][p] += weight(j) * v * v;
        }
        for j in lo..scale {
            let side = w.positions(j) as usize;
            let (coarse, fine) = levels.split_at_mut((j - lo + 1) as usize);
            let parent = &coarse[(j - lo) as usize];
            let child = &mut fine[0];
            let cside = 2 * side;
            for (cp, cv) in child.iter_mut().enumerate() {
                let mut rem = cp;
                let mut pp = 0usize;
                let mut mul = 1usize;
                for _ in 0..n {
                    let coord = rem % cside;
                    rem /= cside;
                    pp += (coord / 2) * mul;
                    mul *= side;
                }
                *cv += parent[pp];
            }
        }
        Self {
            n,
            scale,
            period_log2: w.period_log2,
            squared: levels.pop().unwrap_or_default(),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        (-(self.scale as f64) * self.n as f64).exp2()
    }

    /// `‖S‖_{L^p}` by exact integration of the piecewise-constant function.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.squared.iter().map(|v| v.powf(p / 2.0)).sum();
        (s * self.cell_volume()).powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.squared.iter().map(|v| v.sqrt()).sum::<f64>() * self.cell_volume()
    }

    /// `S` sampled at the lower corners of its cells.
    pub fn to_grid(&self) -> Result<GridFunction> {
        let l = self.scale + self.period_log2;
        if l < 0 {
            return Err(QspaceError::Window {
                scale: self.scale,
                reason: "coarser than the torus".into(),
            });
        }
        let spec = GridSpec::new(self.n, l as u32, self.period_log2)?;
        GridFunction::new(spec, self.squared.iter().map(|v| v.sqrt()).collect())
    }
}

/// `‖(Σ 2^{2j(r+n/2)} |g^ε_{j,k}|² χ(2^j x − k))^{1/2}‖_{L^p}` for `1 < p < ∞`.
pub fn sobolev_norm(c: &CoefficientField, r: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QspaceError::Parameter(format!(
            "p = {p} outside (1, inf); use h1_norm for the Hardy endpoint"
        )));
    }
    if c.wavelets().next().is_none() {
        return Ok(0.0);
    }
    let n = c.dim() as f64;
    Ok(SquareFunction::build(c, |j| (2.0 * j as f64 * (r + n / 2.0)).exp2()).lp_norm(p))
}

/// `‖(Σ 2^{nj} |g^ε_{j,k}|² χ(2^j x − k))^{1/2}‖_{L¹}`.
pub fn h1_norm(c: &CoefficientField) -> f64 {
    if c.wavelets().next().is_none() {
        return 0.0;
    }
    let n = c.dim() as f64;
    SquareFunction::build(c, |j| (j as f64 * n).exp2()).l1_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::FieldWindow;

    fn field1(j_min: i32, j_max: i32) -> CoefficientField {
        CoefficientField::new(FieldWindow::new(1, j_min, j_max, 0).unwrap())
    }

    #[test]
    fn single_coefficient_c_alpha() {
        let mut c = field1(0, 4);
        c.set(1, 3, &[5], 1.0).unwrap();
        let q = DyadicCube::new(3, &[5]).unwrap();
        for alpha in [0.0, 0.2, 0.45] {
            assert!((c_alpha_q(&c, &q, alpha) - 2f64.powf(1.5)).abs() < 1e-12);
        }
        let zero = field1(0, 4);
        assert_eq!(c_alpha_q(&zero, &q, 0.3), 0.0);
    }

    #[test]
    fn q_norm_matches_brute_force() {
        let mut c = field1(0, 3);
        c.set(1, 1, &[1], 0.7).unwrap();
        c.set(1, 3, &[5], -1.1).unwrap();
        c.set(1, 2, &[0], 0.3).unwrap();
        let cubes = torus_cubes(1, 0, 0, 3).unwrap();
        let rep = q_norm(&c, 0.3, &cubes).unwrap();
        let brute = cubes.iter().map(|q| c_alpha_q(&c, q, 0.3)).fold(0.0, f64::max);
        assert!((rep.value - brute).abs() < 1e-12);
        for e in &rep.profile {
            assert!((e.value - c_alpha_q(&c, &e.cube, 0.3)).abs() < 1e-12);
        }
        assert_eq!(rep.scale_maxima.len(), 4);
    }

    #[test]
    fn q_norm_unit_at_origin() {
        let mut c = field1(0, 2);
        c.set(1, 0, &[0], 1.0).unwrap();
        let rep = q_norm_field(&c, 0.25).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-12);
        assert!(q_norm(&c, 0.25, &[]).is_err());
    }

    #[test]
    fn square_function_single_term() {
        let mut c = field1(0, 5);
        c.set(1, 0, &[0], 1.0).unwrap();
        assert!((h1_norm(&c) - 1.0).abs() < 1e-12);
        let mut d = field1(0, 5);
        d.set(1, 3, &[2], 1.0).unwrap();
        assert!((h1_norm(&d) - 2f64.powf(-1.5)).abs() < 1e-12);
        assert!((sobolev_norm(&d, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(sobolev_norm(&d, 0.0, 1.0).is_err());
        d.set(1, 3, &[6], -1.0).unwrap();
        assert!((h1_norm(&d) - 2.0 * 2f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn step_function_b_alpha() {
        let spec = GridSpec::new(1, 8, 0).unwrap();
        let f = GridFunction::from_fn(spec, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        let q = DyadicCube::new(0, &[0]).unwrap();
        assert!((b_alpha_q(&f, &q, 0.0).unwrap() - 0.5).abs() < 1e-12);
        let c = GridFunction::from_fn(spec, |_| 3.0);
        assert!(b_alpha_q(&c, &q, 0.4).unwrap().abs() < 1e-12);
        assert!(b_alpha_q(&f, &DyadicCube::new(9, &[0]).unwrap(), 0.1).is_err());
    }

    #[test]
    fn double_integral_of_identity() {
        let m = 256;
        let spec = GridSpec::new(1, 8, 0).unwrap();
        let f = GridFunction::from_fn(spec, |x| x[0]);
        let q = DyadicCube::new(0, &[0]).unwrap();
        let v = double_integral_seminorm(&f, &q, 0.5).unwrap();
        assert!((v - (1.0 - 1.0 / m as f64)).abs() < 1e-12);
        assert!((v - 1.0).abs() < 2.0 / m as f64);
        assert!(double_integral_seminorm(&f, &q, 1.0).is_err());
        let g = f.scaled(3.0);
        let w = double_integral_seminorm(&g, &q, 0.5).unwrap();
        assert!((w - 9.0 * v).abs() < 1e-10);
    }

    #[test]
    fn alpha_range() {
        assert!(AlphaParam::new(0.6, 1).is_err());
        assert!(AlphaParam::new(1.0, 2).is_ok());
        assert!(AlphaParam::new(-0.1, 2).is_err());
    }
}
