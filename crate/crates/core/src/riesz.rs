//! Riesz transforms in the wavelet domain, Calderón–Zygmund decay checks and
//! the bounded function whose first Riesz transform is unbounded.
//!
//! Riesz transforms act spectrally on the torus (see
//! [`riesz_apply`](crate::spectral::riesz_apply)); the singular kernel
//! `c_n (x_1 − y_1)/|x − y|^{n+1}` only enters the quadrature for `C_D`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::WaveletIndex;
use crate::error::{QspaceError, Result};
use crate::grid::GridFunction;
use crate::predual::{default_family, l1alpha_norm, linfalpha_norm, ScanReport};
use crate::spectral::riesz_apply;
use crate::wavelet::{Basis, CoefficientField, DaubechiesFilter, Family, ScaleWindow};

/// Entries with magnitude at or below this are not stored.
pub const DROP_TOL: f64 = 1e-12;

/// `a_{r,c} = ⟨R_i Φ_r, Φ_c⟩` over explicit row and column index lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    pub op: String,
    pub n: usize,
    pub period_log2: i32,
    pub rows: Vec<WaveletIndex>,
    pub cols: Vec<WaveletIndex>,
    pub entries: BTreeMap<(WaveletIndex, WaveletIndex), f64>,
    pub drop_tol: f64,
    /// `max |a_{r,c} + a_{c,r}|` over pairs present as both row and column.
    pub antisymmetry_defect: Option<f64>,
}

impl OperatorMatrix {
    pub fn empty(op: impl Into<String>, n: usize, period_log2: i32) -> Self {
        Self {
            op: op.into(),
            n,
            period_log2,
            rows: Vec::new(),
            cols: Vec::new(),
            entries: BTreeMap::new(),
            drop_tol: DROP_TOL,
            antisymmetry_defect: None,
        }
    }

    pub fn get(&self, r: &WaveletIndex, c: &WaveletIndex) -> f64 {
        self.entries.get(&(*r, *c)).copied().unwrap_or(0.0)
    }

    /// Largest `|a|` among entries with `|j − j'| >= gap`.
    pub fn max_beyond_band(&self, gap: i32) -> f64 {
        self.entries
            .iter()
            .filter(|((r, c), _)| (r.j() - c.j()).abs() >= gap)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// One JSON object per entry: `{"row": .., "col": .., "v": ..}`.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for ((r, c), v) in &self.entries {
            let rec = serde_json::json!({ "row": r, "col": c, "v": v });
            writeln!(w, "{rec}")?;
        }
        Ok(())
    }
}

/// Assembles `⟨R_axis Φ_r, Φ_c⟩` by synthesizing each row generator,
/// applying the multiplier and analyzing over `window`.
pub fn wavelet_matrix(
    basis: &Basis,
    axis: usize,
    rows: &[WaveletIndex],
    cols: &[WaveletIndex],
    window: ScaleWindow,
) -> Result<OperatorMatrix> {
    if axis > basis.dim() {
        return Err(QspaceError::Parameter(format!(
            "Riesz index {axis} exceeds dimension {}",
            basis.dim()
        )));
    }
    let fw = basis.field_window(window)?;
    for c in cols {
        fw.admits(c)?;
    }
    let per_row: Vec<Vec<((WaveletIndex, WaveletIndex), f64)>> = rows
        .par_iter()
        .map(|r| -> Result<_> {
            let g = riesz_apply(&basis.generator(r, window)?, axis);
            let c = basis.analyze(&g, window, None)?;
            Ok(cols
                .iter()
                .filter_map(|col| {
                    let v = c.get(col);
                    (v.abs() > DROP_TOL).then_some(((*r, *col), v))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let entries: BTreeMap<_, _> = per_row.into_iter().flatten().collect();
    let mut defect: Option<f64> = None;
    let col_set: std::collections::BTreeSet<_> = cols.iter().collect();
    let row_set: std::collections::BTreeSet<_> = rows.iter().collect();
    for r in rows.iter().filter(|r| col_set.contains(r)) {
        for c in cols.iter().filter(|c| row_set.contains(c)) {
            let a = entries.get(&(*r, *c)).copied().unwrap_or(0.0);
            let b = entries.get(&(*c, *r)).copied().unwrap_or(0.0);
            let d = (a + b).abs();
            defect = Some(defect.map_or(d, |x| x.max(d)));
        }
    }
    Ok(OperatorMatrix {
        op: format!("R{axis}"),
        n: basis.dim(),
        period_log2: basis.spec().period_log2,
        rows: rows.to_vec(),
        cols: cols.to_vec(),
        entries,
        drop_tol: DROP_TOL,
        antisymmetry_defect: defect,
    })
}

/// Every wavelet index of `window` whose cube's lower corner lies in
/// `[0, extent)^n`.
pub fn spatial_window(basis: &Basis, window: ScaleWindow, extent: f64) -> Result<Vec<WaveletIndex>> {
    Ok(basis
        .window_indices(window)?
        .into_iter()
        .filter(|i| i.eps != 0 && i.cube.lower().iter().all(|x| *x < extent))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub row: WaveletIndex,
    pub col: WaveletIndex,
    pub value: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// Smallest `C` with `|a| <= C · envelope` for every entry.
    pub c: f64,
    /// `(n/2 + N₀, n + N₀)`.
    pub exponents: (f64, f64),
    pub worst: Option<DecayEntry>,
    /// Entries exceeding the user constant, if one was given.
    pub violations: Vec<DecayEntry>,
    /// Largest ratio per `|j − j'|`.
    pub by_band: BTreeMap<i32, f64>,
}

impl DecayReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("band,max_ratio\n");
        for (b, r) in &self.by_band {
            out.push_str(&format!("{b},{r:.17e}\n"));
        }
        out
    }
}

/// Shortest distance between two points of the torus `[0, 2^{L0})^n`.
pub fn torus_distance(a: &[f64], b: &[f64], period_log2: i32) -> f64 {
    let p = (period_log2 as f64).exp2();
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(p);
            let d = d.min(p - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `2^{−|j−j'|(n/2+N₀)} ((2^{−j}+2^{−j'}) / (2^{−j}+2^{−j'}+|k2^{−j} − k'2^{−j'}|))^{n+N₀}`.
pub fn czo_envelope(r: &WaveletIndex, c: &WaveletIndex, n0: u32, period_log2: i32) -> f64 {
    let n = r.dim() as f64;
    let n0 = n0 as f64;
    let (j, jp) = (r.j() as f64, c.j() as f64);
    let w = (-j).exp2() + (-jp).exp2();
    let d = torus_distance(&r.cube.lower(), &c.cube.lower(), period_log2);
    (-(j - jp).abs() * (n / 2.0 + n0)).exp2() * (w / (w + d)).powf(n + n0)
}

/// Fits the envelope constant and lists entries above `user_c`.
pub fn czo_decay_check(m: &OperatorMatrix, n0: u32, user_c: Option<f64>) -> DecayReport {
    let n = m.n as f64;
    let mut c: f64 = 0.0;
    let mut worst: Option<DecayEntry> = None;
    let mut by_band: BTreeMap<i32, f64> = BTreeMap::new();
    let mut all = Vec::with_capacity(m.entries.len());
    for ((r, col), v) in &m.entries {
        let env = czo_envelope(r, col, n0, m.period_log2);
        let ratio = v.abs() / env;
        let e = DecayEntry {
            row: *r,
            col: *col,
            value: *v,
            envelope: env,
            ratio,
        };
        let b = by_band.entry((r.j() - col.j()).abs()).or_insert(0.0);
        *b = b.max(ratio);
        if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
            worst = Some(e.clone());
        }
        c = c.max(ratio);
        all.push(e);
    }
    let violations = match user_c {
        Some(uc) => all.into_iter().filter(|e| e.ratio > uc).collect(),
        None => Vec::new(),
    };
    DecayReport {
        c,
        exponents: (n / 2.0 + n0 as f64, n + n0 as f64),
        worst,
        violations,
        by_band,
    }
}

/// `c_n = Γ((n+1)/2) / π^{(n+1)/2}`, the constant in front of the Riesz kernel.
pub fn riesz_kernel_constant(n: usize) -> f64 {
    let half = (n as f64 + 1.0) / 2.0;
    gamma_half_integer(half) / PI.powf(half)
}

fn gamma_half_integer(x: f64) -> f64 {
    let mut g = if x.fract() == 0.0 { 1.0 } else { PI.sqrt() };
    let mut y = if x.fract() == 0.0 { 1.0 } else { 0.5 };
    while y < x {
        g *= y;
        y += 1.0;
    }
    g
}

fn daubechies_of(basis: &Basis) -> Result<&DaubechiesFilter> {
    match (basis.family(), basis.filter()) {
        (Family::Daubechies, Some(f)) => Ok(f),
        _ => Err(QspaceError::Parameter("a Daubechies basis is required".into())),
    }
}

/// `∫ −y_1/|y|^{n+1} Φ⁰(y − 2^{M+1} e) dy` with `Φ⁰(y) = Π φ(y_i + 2^M)`,
/// using samples of `φ` at spacing `2^{−resolution}`. With `reflect` the
/// shifted bump is mirrored through the origin.
pub fn c_d_quadrature(
    n: usize,
    filter: &DaubechiesFilter,
    support_log2: u32,
    resolution: u32,
    reflect: bool,
) -> Result<f64> {
    let phi = filter.scaling_function(resolution)?;
    let h = (-(resolution as f64)).exp2();
    let big = (support_log2 as f64).exp2();
    // Φ⁰(y − 2^{M+1} e) = Π φ(y_i − 2^M), so y_i = x_i + 2^M over x_i in supp φ.
    let sign = if reflect { -1.0 } else { 1.0 };
    let coords: Vec<f64> = (0..phi.len()).map(|i| sign * (i as f64 * h + big)).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let w: f64 = idx.iter().map(|&i| phi[i]).product();
        if w != 0.0 {
            let r2: f64 = idx.iter().map(|&i| coords[i] * coords[i]).sum();
            total += -coords[idx[0]] / r2.powf((n as f64 + 1.0) / 2.0) * w;
        }
        let mut s = n;
        loop {
            if s == 0 {
                return Ok(total * h.powi(n as i32));
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < phi.len() {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// `C_D` for the basis' filter and support exponent; a nonnegative value is
/// reported as an error since the construction needs `C_D < 0`.
pub fn c_d_constant(basis: &Basis, resolution: u32) -> Result<f64> {
    let f = daubechies_of(basis)?;
    let v = c_d_quadrature(basis.dim(), f, basis.spec().support_log2, resolution, false)?;
    if v >= 0.0 {
        return Err(QspaceError::Numeric(format!(
            "C_D = {v} is not negative; shift or orientation is wrong"
        )));
    }
    Ok(v)
}

/// `f_J = Σ_{j ∈ scales} Φ(2^j x)` with `Φ(x) = Π φ(x_i − 2^M)`, supported
/// in `[2^M, 3·2^M]^n`.
pub fn counterexample_f(basis: &Basis, scales: &[u32]) -> Result<GridFunction> {
    let filter = daubechies_of(basis)?;
    let grid = *basis.grid();
    let m_log2 = basis.spec().support_log2;
    let big = 1i64 << m_log2;
    if 3 * big > (1i64 << grid.period_log2.max(0)) || grid.period_log2 < 0 {
        return Err(QspaceError::Parameter(format!(
            "period 2^{} does not contain [2^M, 3·2^M] for M = {m_log2}",
            grid.period_log2
        )));
    }
    let r = grid.cell_scale();
    let jmax = scales.iter().copied().max().unwrap_or(0) as i32;
    if r < jmax + 4 {
        return Err(QspaceError::Window {
            scale: jmax,
            reason: format!("grid cells of scale {r} cannot resolve Φ(2^{jmax}x)"),
        });
    }
    let phi = filter.scaling_function(r as u32)?;
    let npts = grid.points_per_axis() as i64;
    let per_unit = 1i64 << r;
    let mut samples = vec![0.0; grid.len()];
    for &j in scales {
        let step = 1i64 << j;
        // Argument index of φ at grid point i: i·2^j − 2^M·2^r.
        let axis: Vec<(usize, f64)> = (0..npts)
            .filter_map(|i| {
                let a = i * step - big * per_unit;
                (a >= 0 && (a as usize) < phi.len() && phi[a as usize] != 0.0)
                    .then(|| (i as usize, phi[a as usize]))
            })
            .collect();
        let mut pos = vec![0usize; grid.n];
        'outer: loop {
            let mut flat = 0usize;
            let mut v = 1.0;
            for s in 0..grid.n {
                let (i, w) = axis[pos[s]];
                flat = flat * npts as usize + i;
                v *= w;
            }
            samples[flat] += v;
            let mut s = grid.n;
            loop {
                if s == 0 {
                    break 'outer;
                }
                s -= 1;
                pos[s] += 1;
                if pos[s] < axis.len() {
                    break;
                }
                pos[s] = 0;
            }
        }
    }
    GridFunction::new(grid, samples)
}

/// Whether the supports `[2^M, 2^M + 2m − 1]·2^{−j}` of consecutive terms
/// are disjoint.
pub fn terms_disjoint(basis: &Basis, scales: &[u32]) -> Result<bool> {
    let filter = daubechies_of(basis)?;
    let big = (basis.spec().support_log2 as f64).exp2();
    let top = big + filter.support_len() as f64;
    let mut s = scales.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s.windows(2)
        .all(|w| top * (-(w[1] as f64)).exp2() < big * (-(w[0] as f64)).exp2()))
}

/// `0, 2, 4, ..., J`.
pub fn even_scales(j: u32) -> Vec<u32> {
    (0..=j).step_by(2).collect()
}

/// Grid points within torus distance `radius` of the origin.
pub fn probe_points(f: &GridFunction, radius: f64) -> Vec<usize> {
    let spec = f.spec();
    let origin = vec![0.0; spec.n];
    (0..spec.len())
        .filter(|&p| torus_distance(&spec.coords(p), &origin, spec.period_log2) < radius)
        .collect()
}

/// Largest radius `δ` such that `R_1 Φ < c_n C_D / 2` at every grid point
/// strictly within distance `δ` of the origin.
pub fn probe_radius(basis: &Basis, c_d: f64) -> Result<f64> {
    let phi = counterexample_f(basis, &[0])?;
    let r1 = riesz_apply(&phi, 1);
    let spec = *phi.spec();
    let threshold = riesz_kernel_constant(spec.n) * c_d / 2.0;
    let origin = vec![0.0; spec.n];
    let mut pts: Vec<(f64, f64)> = (0..spec.len())
        .map(|p| {
            (
                torus_distance(&spec.coords(p), &origin, spec.period_log2),
                r1.samples()[p],
            )
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts
        .into_iter()
        .find(|(_, v)| *v >= threshold)
        .map_or(f64::INFINITY, |(d, _)| d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    #[serde(rename = "J")]
    pub j: u32,
    pub probes: usize,
    /// `min R_1 f_J` over the probes.
    pub probe_min: f64,
    pub sup_norm: f64,
    /// `‖R_1 f_J‖_{L^∞}` over the whole grid.
    pub riesz_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupTable {
    pub c_d: f64,
    pub delta: f64,
    pub rows: Vec<BlowupRow>,
}

impl BlowupTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("J,probes,probe_min,sup_norm,riesz_sup\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e}\n",
                r.j, r.probes, r.probe_min, r.sup_norm, r.riesz_sup
            ));
        }
        out
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].probe_min < w[0].probe_min)
    }
}

/// `R_1 f_J` at probes `|x| < δ 2^{−J}` for each cutoff in `cutoffs`, with
/// even scales up to the cutoff.
pub fn counterexample_blowup(basis: &Basis, cutoffs: &[u32], c_d: f64, delta: f64) -> Result<BlowupTable> {
    let rows = cutoffs
        .iter()
        .map(|&j| {
            let f = counterexample_f(basis, &even_scales(j))?;
            let r1 = riesz_apply(&f, 1);
            let probes = probe_points(&f, delta * (-(j as f64)).exp2());
            if probes.is_empty() {
                return Err(QspaceError::Window {
                    scale: j as i32,
                    reason: "no grid point inside the probe radius".into(),
                });
            }
            let probe_min = probes.iter().map(|&p| r1.samples()[p]).fold(f64::INFINITY, f64::min);
            Ok(BlowupRow {
                j,
                probes: probes.len(),
                probe_min,
                sup_norm: f.linf_norm(),
                riesz_sup: r1.linf_norm(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(BlowupTable { c_d, delta, rows })
}

/// `f = Σ_i R_i f_i` with `f_0 = 0` and `f_i = −R_i f`.
#[derive(Clone, Debug)]
pub struct FsSplit {
    pub components: Vec<GridFunction>,
    /// `‖Σ_i R_i f_i − f‖_{L^∞}`.
    pub reconstruction_error: f64,
    pub sup_norms: Vec<f64>,
}

pub fn naive_fs_split(f: &GridFunction) -> Result<FsSplit> {
    let spec = *f.spec();
    if f.mean().abs() > 1e-12 * f.linf_norm().max(1.0) {
        return Err(QspaceError::Parameter(format!(
            "input mean {} is not zero",
            f.mean()
        )));
    }
    let mut components = vec![GridFunction::zeros(spec)];
    let mut recon = GridFunction::zeros(spec);
    for i in 1..=spec.n {
        let fi = riesz_apply(f, i).scaled(-1.0);
        recon.add_scaled(1.0, &riesz_apply(&fi, i));
        components.push(fi);
    }
    let sup_norms = components.iter().map(|c| c.linf_norm()).collect();
    Ok(FsSplit {
        reconstruction_error: recon.max_abs_diff(f),
        components,
        sup_norms,
    })
}

/// `linfalpha_norm` of each component over the default window family.
pub fn fs_split_linfalpha(split: &FsSplit, basis: &Basis, alpha: f64) -> Result<Vec<f64>> {
    split
        .components
        .iter()
        .map(|c| {
            let field = basis.analyze(c, basis.full_window(), None)?;
            Ok(linfalpha_norm(&field, basis, alpha, &default_family(&field)?)?.value)
        })
        .collect()
}

/// `R_i g` expanded back into coefficients over the window of `g`.
pub fn riesz_field(g: &CoefficientField, basis: &Basis, axis: usize) -> Result<CoefficientField> {
    if axis == 0 {
        return Ok(g.clone());
    }
    let w = g.window();
    let window = ScaleWindow::new(w.j_min, w.j_max);
    let f = riesz_apply(&basis.synthesize(g)?, axis);
    Ok(basis.analyze(&f, window, None)?.pruned(DROP_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszL1Row {
    pub axis: usize,
    pub value: f64,
    pub report: ScanReport,
}

/// `L^{1,α}` surrogates of `R_i g` for `i = 0..=n` over the default family.
pub fn riesz_l1alpha_report(g: &CoefficientField, basis: &Basis, alpha: f64) -> Result<Vec<RieszL1Row>> {
    let family = default_family(g)?;
    (0..=basis.dim())
        .map(|axis| {
            let c = riesz_field(g, basis, axis)?;
            let report = l1alpha_norm(&c, basis, alpha, &family)?;
            Ok(RieszL1Row {
                axis,
                value: report.value,
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::BasisSpec;

    #[test]
    fn kernel_constants() {
        assert!((riesz_kernel_constant(1) - 1.0 / PI).abs() < 1e-15);
        // Γ(3/2)/π^{3/2} = 1/(2π)
        assert!((riesz_kernel_constant(2) - 0.5 / PI).abs() < 1e-15);
        // Γ(2)/π² = 1/π²
        assert!((riesz_kernel_constant(3) - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn torus_distance_wraps() {
        assert!((torus_distance(&[0.1], &[7.9], 3) - 0.2).abs() < 1e-12);
        assert!((torus_distance(&[0.0, 0.0], &[3.0, 4.0], 4) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_one_on_the_diagonal() {
        let a = WaveletIndex::new(1, 2, &[3]).unwrap();
        assert!((czo_envelope(&a, &a, 1, 3) - 1.0).abs() < 1e-15);
        let b = WaveletIndex::new(1, 4, &[12]).unwrap();
        assert!(czo_envelope(&a, &b, 1, 3) < 2f64.powf(-3.0) + 1e-15);
    }

    #[test]
    fn zero_matrix_has_zero_constant() {
        let m = OperatorMatrix::empty("R1", 1, 3);
        let rep = czo_decay_check(&m, 1, Some(1.0));
        assert_eq!(rep.c, 0.0);
        assert!(rep.violations.is_empty());
        assert!(rep.worst.is_none());
    }

    #[test]
    fn inflated_entry_tops_the_report() {
        let mut m = OperatorMatrix::empty("synthetic", 1, 3);
        let idx: Vec<WaveletIndex> = (0..4).map(|k| WaveletIndex::new(1, 2, &[k]).unwrap()).collect();
        for r in &idx {
            for c in &idx {
                let env = czo_envelope(r, c, 1, 3);
                m.entries.insert((*r, *c), 0.5 * env);
            }
        }
        let hot = (idx[0], idx[3]);
        let env = czo_envelope(&hot.0, &hot.1, 1, 3);
        m.entries.insert(hot, 7.0 * env);
        let rep = czo_decay_check(&m, 1, Some(1.0));
        let w = rep.worst.unwrap();
        assert_eq!((w.row, w.col), hot);
        assert!((rep.c - 7.0).abs() < 1e-12);
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn c_d_reflection_flips_sign() {
        let f = DaubechiesFilter::new(4).unwrap();
        let a = c_d_quadrature(1, &f, 3, 5, false).unwrap();
        let b = c_d_quadrature(1, &f, 3, 5, true).unwrap();
        assert!(a < 0.0);
        assert!((a + b).abs() < 1e-14 * a.abs());
    }

    #[test]
    fn counterexample_single_term_is_shifted_bump() {
        let basis = Basis::build(BasisSpec::daubechies(1, 4, 10, 5)).unwrap();
        let f = counterexample_f(&basis, &[0]).unwrap();
        let phi = basis.filter().unwrap().scaling_function(5).unwrap();
        // Φ(x) = φ(x − 8); grid spacing 2^{−5}.
        let grid = basis.grid();
        for p in 0..grid.len() {
            let x = grid.coords(p)[0];
            let a = ((x - 8.0) * 32.0).round() as i64;
            let want = if a >= 0 && (a as usize) < phi.len() { phi[a as usize] } else { 0.0 };
            assert_eq!(f.samples()[p], want);
        }
        assert!(terms_disjoint(&basis, &even_scales(4)).unwrap());
        let wide = Basis::build(BasisSpec::daubechies(1, 8, 12, 6)).unwrap();
        assert!(terms_disjoint(&wide, &[0, 1, 2, 3, 4, 5, 6]).unwrap());
    }

    #[test]
    fn counterexample_rejects_coarse_grids() {
        let basis = Basis::build(BasisSpec::daubechies(1, 4, 10, 5)).unwrap();
        assert!(counterexample_f(&basis, &[2]).is_err());
        let tight = Basis::build(BasisSpec::daubechies(1, 4, 10, 4)).unwrap();
        assert!(counterexample_f(&tight, &[0]).is_err());
    }

    #[test]
    fn fs_split_rejects_nonzero_mean() {
        let spec = crate::grid::GridSpec::new(1, 6, 0).unwrap();
        let f = GridFunction::from_fn(spec, |_| 1.0);
        assert!(naive_fs_split(&f).is_err());
    }
}
