//! Periodized orthonormal wavelet bases on the torus grid.
//!
//! A [`Basis`] realizes either the tensor-product Meyer basis (built on grid
//! frequencies) or a tensor-product Daubechies basis (periodic filter bank
//! acting on grid samples). Both are orthonormal for the grid inner product
//! `h^n Σ f g`, so [`Basis::analyze`] and [`Basis::synthesize`] are mutually
//! inverse on the span of the requested scale window.

pub mod daubechies;
mod field;
pub mod meyer;

pub use daubechies::DaubechiesFilter;
pub use field::{CoefficientField, FieldWindow};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{lattice, nonzero_epsilons, DyadicCube, Epsilon, WaveletIndex};
use crate::error::{QspaceError, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::{from_spectrum, spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Meyer,
    Daubechies,
}

/// Basis description. `regularity` is the number of vanishing moments for
/// Daubechies and is recorded but unused for Meyer, whose generators are
/// `C^∞`. `support_log2` is `M` with Daubechies generators supported in
/// `[0, 2^M]^n ⊂ [−2^M, 2^M]^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: Family,
    pub n: usize,
    pub regularity: u32,
    pub support_log2: u32,
    #[serde(rename = "L")]
    pub log2_points: u32,
    #[serde(rename = "L0")]
    pub period_log2: i32,
}

impl BasisSpec {
    pub fn meyer(n: usize, log2_points: u32, period_log2: i32) -> Self {
        Self {
            family: Family::Meyer,
            n,
            regularity: 0,
            support_log2: 0,
            log2_points,
            period_log2,
        }
    }

    /// Daubechies basis with `m` vanishing moments and the smallest `M` such
    /// that the support `[0, 2m − 1]` fits in `[0, 2^M]`.
    pub fn daubechies(n: usize, m: u32, log2_points: u32, period_log2: i32) -> Self {
        let len = (2 * m).saturating_sub(1).max(1);
        Self {
            family: Family::Daubechies,
            n,
            regularity: m,
            support_log2: len.next_power_of_two().trailing_zeros(),
            log2_points,
            period_log2,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.log2_points, self.period_log2)
    }
}

/// Inclusive scale range: scale functions at `j_min`, wavelets at `j_min..=j_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleWindow {
    pub j_min: i32,
    pub j_max: i32,
}

impl ScaleWindow {
    pub fn new(j_min: i32, j_max: i32) -> Self {
        Self { j_min, j_max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub orth: f64,
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orth: 1e-8,
            recon: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Meyer,
    Daubechies(DaubechiesFilter),
}

/// A realized basis. Immutable; all transforms take `&self`.
#[derive(Clone, Debug)]
pub struct Basis {
    spec: BasisSpec,
    grid: GridSpec,
    kind: Kind,
}

impl Basis {
    pub fn build(spec: BasisSpec) -> Result<Self> {
        let grid = spec.grid()?;
        let kind = match spec.family {
            Family::Meyer => Kind::Meyer,
            Family::Daubechies => {
                if spec.regularity < 4 {
                    return Err(QspaceError::Parameter(format!(
                        "Daubechies order {} below the supported minimum 4",
                        spec.regularity
                    )));
                }
                let filter = DaubechiesFilter::new(spec.regularity as usize)?;
                let need = filter.support_len() as u64;
                if need > 1u64 << spec.support_log2.min(62) {
                    return Err(QspaceError::Parameter(format!(
                        "support [0, {need}] does not fit in [-2^{m}, 2^{m}]",
                        m = spec.support_log2
                    )));
                }
                Kind::Daubechies(filter)
            }
        };
        let basis = Self { spec, grid, kind };
        if basis.finest_scale() < basis.coarsest_scale() {
            return Err(QspaceError::Window {
                scale: basis.coarsest_scale(),
                reason: format!(
                    "grid of 2^{} points cannot resolve any scale on a period 2^{}",
                    spec.log2_points, spec.period_log2
                ),
            });
        }
        Ok(basis)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn filter(&self) -> Option<&DaubechiesFilter> {
        match &self.kind {
            Kind::Daubechies(f) => Some(f),
            Kind::Meyer => None,
        }
    }

    /// Finest wavelet scale representable on the grid.
    pub fn finest_scale(&self) -> i32 {
        let cells = self.grid.cell_scale();
        match self.kind {
            Kind::Meyer => cells - 2,
            Kind::Daubechies(_) => cells - 1,
        }
    }

    /// Coarsest scale: one cube per period.
    pub fn coarsest_scale(&self) -> i32 {
        -self.spec.period_log2
    }

    pub fn fingerprint(&self) -> String {
        let s = &self.spec;
        match s.family {
            Family::Meyer => format!("meyer;n={};L={};L0={}", s.n, s.log2_points, s.period_log2),
            Family::Daubechies => format!(
                "daubechies;m={};M={};n={};L={};L0={}",
                s.regularity, s.support_log2, s.n, s.log2_points, s.period_log2
            ),
        }
    }

    /// Validates `window` against the grid and returns the matching field window.
    pub fn field_window(&self, window: ScaleWindow) -> Result<FieldWindow> {
        if window.j_min < self.coarsest_scale() {
            return Err(QspaceError::Window {
                scale: window.j_min,
                reason: format!("coarser than one period (coarsest {})", self.coarsest_scale()),
            });
        }
        if window.j_max > self.finest_scale() {
            return Err(QspaceError::Window {
                scale: window.j_max,
                reason: format!("finer than the grid resolves (finest {})", self.finest_scale()),
            });
        }
        FieldWindow::new(self.spec.n, window.j_min, window.j_max, self.spec.period_log2)
    }

    /// Largest window the grid supports.
    pub fn full_window(&self) -> ScaleWindow {
        ScaleWindow::new(self.coarsest_scale(), self.finest_scale())
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if *f.spec() != self.grid {
            return Err(QspaceError::Shape(format!(
                "grid {:?} does not match basis grid {:?}",
                f.spec(),
                self.grid
            )));
        }
        Ok(())
    }

    fn epsilons_at(&self, window: &FieldWindow, j: i32) -> Vec<Epsilon> {
        let mut out = Vec::new();
        if j == window.j_min {
            out.push(0);
        }
        out.extend(nonzero_epsilons(self.spec.n));
        out
    }

    /// Coefficients `⟨f, Φ^ε_{j,k}⟩` over `window`, optionally restricted to
    /// indices whose cube lies inside `region`.
    pub fn analyze(
        &self,
        f: &GridFunction,
        window: ScaleWindow,
        region: Option<&DyadicCube>,
    ) -> Result<CoefficientField> {
        self.check_grid(f)?;
        let fw = self.field_window(window)?;
        let mut field = CoefficientField::new(fw).with_basis(self.fingerprint());
        let layers = match &self.kind {
            Kind::Meyer => {
                let hat = spectrum(f);
                let mut layers = Vec::new();
                for j in fw.j_min..=fw.j_max {
                    for eps in self.epsilons_at(&fw, j) {
                        layers.push((j, eps, meyer::analyze_scale(&self.grid, &hat, j, eps)));
                    }
                }
                layers
            }
            Kind::Daubechies(filter) => self.dwt(filter, f, &fw),
        };
        for (j, eps, values) in layers {
            let side = fw.positions(j) as usize;
            for (p, v) in values.into_iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let k = unflatten(p, side, self.spec.n);
                let idx = WaveletIndex::new(eps, j, &k)?;
                if region.is_some_and(|r| !r.contains(&idx.cube)) {
                    continue;
                }
                field.insert(idx, v)?;
            }
        }
        Ok(field)
    }

    /// `Σ c^ε_{j,k} Φ^ε_{j,k}` sampled on the grid.
    pub fn synthesize(&self, c: &CoefficientField) -> Result<GridFunction> {
        let fw = *c.window();
        self.field_window(ScaleWindow::new(fw.j_min, fw.j_max))?;
        if fw.period_log2 != self.spec.period_log2 || fw.n != self.spec.n {
            return Err(QspaceError::Shape("field torus does not match the basis".into()));
        }
        let mut layers: Vec<(i32, Epsilon, Vec<f64>)> = Vec::new();
        for j in fw.j_min..=fw.j_max {
            let side = fw.positions(j) as usize;
            for eps in self.epsilons_at(&fw, j) {
                layers.push((j, eps, vec![0.0; side.pow(self.spec.n as u32)]));
            }
        }
        for (idx, v) in c.iter() {
            let j = idx.j();
            let side = fw.positions(j) as usize;
            let p = idx.k().iter().fold(0usize, |a, &k| a * side + k as usize);
            let layer = layers
                .iter_mut()
                .find(|(lj, le, _)| *lj == j && *le == idx.eps)
                .expect("field window admits only layers present in the basis");
            layer.2[p] = *v;
        }
        match &self.kind {
            Kind::Meyer => {
                let mut hat = vec![Complex64::new(0.0, 0.0); self.grid.len()];
                for (j, eps, values) in &layers {
                    if values.iter().any(|v| *v != 0.0) {
                        meyer::synthesize_scale(&self.grid, &mut hat, *j, *eps, values);
                    }
                }
                Ok(from_spectrum(self.grid, hat))
            }
            Kind::Daubechies(filter) => Ok(self.idwt(filter, &fw, layers)),
        }
    }

    /// Sampled generator `Φ^ε_{j,k}`.
    pub fn generator(&self, idx: &WaveletIndex, window: ScaleWindow) -> Result<GridFunction> {
        let mut c = CoefficientField::new(self.field_window(window)?);
        c.insert(*idx, 1.0)?;
        self.synthesize(&c)
    }

    /// Max entry of `G − I` over the Gram columns of `indices`, computed as
    /// `analyze(synthesize(e_i))` against every index of the window.
    pub fn gram_defect(&self, window: ScaleWindow, indices: &[WaveletIndex]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for idx in indices {
            let g = self.generator(idx, window)?;
            let col = self.analyze(&g, window, None)?;
            for (other, v) in col.iter() {
                let want = if other == idx { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
            if col.get(idx) == 0.0 {
                worst = worst.max(1.0);
            }
        }
        Ok(worst)
    }

    /// Every index of `window` on the torus.
    pub fn window_indices(&self, window: ScaleWindow) -> Result<Vec<WaveletIndex>> {
        let fw = self.field_window(window)?;
        let mut out = Vec::new();
        for j in fw.j_min..=fw.j_max {
            let side = fw.positions(j);
            for eps in self.epsilons_at(&fw, j) {
                for k in lattice(self.spec.n, side) {
                    out.push(WaveletIndex::new(eps, j, &k)?);
                }
            }
        }
        Ok(out)
    }

    fn dwt(
        &self,
        filter: &DaubechiesFilter,
        f: &GridFunction,
        fw: &FieldWindow,
    ) -> Vec<(i32, Epsilon, Vec<f64>)> {
        let n = self.spec.n;
        let h = self.grid.spacing();
        let mut approx: Vec<f64> = f
            .samples()
            .iter()
            .map(|v| v * h.powf(n as f64 / 2.0))
            .collect();
        let mut side = self.grid.points_per_axis();
        let mut layers = Vec::new();
        let top = self.grid.cell_scale();
        for j in (fw.j_min..top).rev() {
            filter_bank(filter, &mut approx, n, side, true);
            let half = side / 2;
            let blocks = split_blocks(&approx, n, side);
            approx = blocks[0].clone();
            if j <= fw.j_max {
                for (eps, b) in blocks.into_iter().enumerate().skip(1) {
                    layers.push((j, eps as Epsilon, b));
                }
            }
            side = half;
        }
        layers.push((fw.j_min, 0, approx));
        layers
    }

    fn idwt(
        &self,
        filter: &DaubechiesFilter,
        fw: &FieldWindow,
        layers: Vec<(i32, Epsilon, Vec<f64>)>,
    ) -> GridFunction {
        let n = self.spec.n;
        let top = self.grid.cell_scale();
        let nb = 1usize << n;
        let mut approx = layers
            .iter()
            .find(|(j, e, _)| *j == fw.j_min && *e == 0)
            .map(|l| l.2.clone())
            .expect("scale-function layer present");
        let mut side = fw.positions(fw.j_min) as usize;
        for j in fw.j_min..top {
            let mut blocks = vec![approx];
            for eps in 1..nb {
                let b = layers
                    .iter()
                    .find(|(lj, le, _)| *lj == j && *le as usize == eps)
                    .map(|l| l.2.clone())
                    .unwrap_or_else(|| vec![0.0; side.pow(n as u32)]);
                blocks.push(b);
            }
            let mut full = join_blocks(&blocks, n, side);
            filter_bank(filter, &mut full, n, side * 2, false);
            approx = full;
            side *= 2;
        }
        let scale = self.grid.spacing().powf(-(n as f64) / 2.0);
        approx.iter_mut().for_each(|v| *v *= scale);
        GridFunction::new(self.grid, approx).expect("finite synthesis")
    }
}

fn unflatten(mut p: usize, side: usize, n: usize) -> Vec<i64> {
    let mut k = vec![0i64; n];
    for s in (0..n).rev() {
        k[s] = (p % side) as i64;
        p /= side;
    }
    k
}

/// Applies one filter-bank step (analysis or synthesis) along every axis of a
/// row-major cube of side `side`.
fn filter_bank(filter: &DaubechiesFilter, data: &mut [f64], n: usize, side: usize, forward: bool) {
    let mut line = vec![0.0; side];
    let mut out = vec![0.0; side];
    for axis in 0..n {
        let stride = side.pow((n - 1 - axis) as u32);
        let outer = data.len() / (side * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * side * stride + i;
                for (q, v) in line.iter_mut().enumerate() {
                    *v = data[base + q * stride];
                }
                if forward {
                    filter.analyze_line(&line, &mut out);
                } else {
                    filter.synthesize_line(&line, &mut out);
                }
                for (q, v) in out.iter().enumerate() {
                    data[base + q * stride] = *v;
                }
            }
        }
    }
}

/// Splits a transformed cube into its `2^n` sub-bands, indexed by `ε` with bit
/// `s` selecting the high half on axis `s`.
fn split_blocks(data: &[f64], n: usize, side: usize) -> Vec<Vec<f64>> {
    let half = side / 2;
    let nb = 1usize << n;
    let mut blocks = vec![Vec::with_capacity(half.pow(n as u32)); nb];
    for idx in lattice(n, half as i64) {
        for (eps, block) in blocks.iter_mut().enumerate() {
            let p = (0..n).fold(0usize, |a, s| {
                let hi = (eps >> s) & 1;
                a * side + idx[s] as usize + hi * half
            });
            block.push(data[p]);
        }
    }
    blocks
}

fn join_blocks(blocks: &[Vec<f64>], n: usize, half: usize) -> Vec<f64> {
    let side = half * 2;
    let mut data = vec![0.0; side.pow(n as u32)];
    for (q, idx) in lattice(n, half as i64).into_iter().enumerate() {
        for (eps, block) in blocks.iter().enumerate() {
            let p = (0..n).fold(0usize, |a, s| {
                let hi = (eps >> s) & 1;
                a * side + idx[s] as usize + hi * half
            });
            data[p] = block[q];
        }
    }
    data
}

/// Fraction of `Σ f²` carried by grid points within `margin` (physical units)
/// of the torus boundary on some axis. Large values flag wrap-around.
pub fn boundary_energy_fraction(f: &GridFunction, margin: f64) -> f64 {
    let spec = f.spec();
    let period = spec.period();
    let total: f64 = f.samples().iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let near: f64 = f
        .samples()
        .iter()
        .enumerate()
        .filter(|(p, _)| {
            spec.coords(*p)
                .iter()
                .any(|&x| x < margin || x >= period - margin)
        })
        .map(|(_, v)| v * v)
        .sum();
    near / total
}
