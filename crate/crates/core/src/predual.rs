//! Atoms of the predual space, the dual pairing, the quantities
//! `P_{s,t,N}` and `Q_{s,t,N}`, band splits and the adapted `L^{1,α}` and
//! `L^{∞,α}` norms.
//!
//! Exact atomic norms are infima over all decompositions. Only a bracket is
//! computed: a greedy wavelet-atom decomposition gives the upper end and the
//! pairing with explicit `Q_α` test fields gives the lower end.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dyadic::{positions_per_axis, DyadicCube, Epsilon, WindowSpec};
use crate::error::{QspaceError, Result};
use crate::grid::GridFunction;
use crate::microlocal::{redistribute, solve, MicrolocalProblem};
use crate::norms::{h1_norm, q_norm_field, SquareFunction};
use crate::spectral::fractional_laplacian;
use crate::wavelet::{Basis, CoefficientField};

/// Relative tolerance on atom inequalities.
pub const ATOM_TOL: f64 = 1e-10;

/// Largest block the duality lower bound will hand to the micro-local solver.
pub const LOWER_BOUND_MAX_MEMBERS: usize = 1 << 16;

/// `⟨f, g⟩ = Σ f^ε_{j,k} g^ε_{j,k}` over indices stored in both fields.
pub fn pairing(f: &CoefficientField, g: &CoefficientField) -> f64 {
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    small.iter().map(|(i, v)| v * large.get(i)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Standard,
    Wavelet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomCertificate {
    pub cube: DyadicCube,
    pub kind: AtomKind,
    /// `(name, bound − computed)` per defining inequality.
    pub slacks: Vec<(String, f64)>,
    /// `(β, ∫ (x − x_Q)^β g)` for `|β| <= ⌊α⌋`, standard atoms only.
    pub moment_residuals: Vec<(Vec<u32>, f64)>,
    /// Number of coefficients or samples found outside `Q`.
    pub leaks: usize,
    pub valid: bool,
}

/// Checks `(Σ_{Q_{j,k} ⊂ Q} 2^{−2jα} |g^ε_{j,k}|²)^{1/2} <= |Q|^{α/n − 1/2}`
/// with every wavelet entry of `c` required to sit inside `Q`.
pub fn wavelet_atom_check(c: &CoefficientField, q: &DyadicCube, alpha: f64) -> AtomCertificate {
    let n = q.dim() as f64;
    let bound = q.volume().powf(alpha / n - 0.5);
    let mut leaks = 0;
    let mut e = 0.0;
    for (i, v) in c.wavelets() {
        if q.contains(&i.cube) {
            e += (-2.0 * i.j() as f64 * alpha).exp2() * v * v;
        } else {
            leaks += 1;
        }
    }
    let slack = bound - e.sqrt();
    AtomCertificate {
        cube: *q,
        kind: AtomKind::Wavelet,
        slacks: vec![("size".into(), slack)],
        moment_residuals: Vec::new(),
        leaks,
        valid: leaks == 0 && slack >= -ATOM_TOL * bound,
    }
}

fn multi_indices(n: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for b in &out {
            let used: u32 = b.iter().sum();
            for p in 0..=(max_order - used) {
                let mut c = b.clone();
                c.push(p);
                next.push(c);
            }
        }
        out = next;
    }
    out.sort_by_key(|b| (b.iter().sum::<u32>(), b.clone()));
    out
}

/// Checks support in `Q`, vanishing moments up to order `⌊α⌋` about the
/// centre of `Q`, and `‖(−Δ)^{−α/2} f‖_{L²} <= |Q|^{−1/2 + α/n}`.
pub fn standard_atom_check(f: &GridFunction, q: &DyadicCube, alpha: f64) -> Result<AtomCertificate> {
    let spec = f.spec();
    if q.dim() != spec.n {
        return Err(QspaceError::Shape("cube dimension differs from the grid".into()));
    }
    let inside: BTreeSet<usize> = spec.points_in_cube(q)?.into_iter().collect();
    let samples = f.samples();
    let scale = f.linf_norm();
    let vol = spec.cell_volume();
    let leak_tol = ATOM_TOL * scale.max(f64::MIN_POSITIVE);
    let leaks = samples
        .iter()
        .enumerate()
        .filter(|(p, v)| !inside.contains(p) && v.abs() > leak_tol)
        .count();

    let centre: Vec<f64> = q
        .lower()
        .iter()
        .zip(q.upper())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mass: f64 = inside.iter().map(|&p| samples[p].abs()).sum::<f64>() * vol;
    let mut moment_residuals = Vec::new();
    let mut moments_ok = true;
    for beta in multi_indices(spec.n, alpha.floor().max(0.0) as u32) {
        let mut m = 0.0;
        for &p in &inside {
            let x = spec.coords(p);
            let w: f64 = beta
                .iter()
                .zip(&x)
                .zip(&centre)
                .map(|((&b, xi), ci)| (xi - ci).powi(b as i32))
                .product();
            m += w * samples[p];
        }
        m *= vol;
        let order: u32 = beta.iter().sum();
        if m.abs() > ATOM_TOL * mass.max(f64::MIN_POSITIVE) * q.side().powi(order as i32) {
            moments_ok = false;
        }
        moment_residuals.push((beta, m));
    }

    let bound = q.volume().powf(alpha / spec.n as f64 - 0.5);
    let smoothed = fractional_laplacian(f, -alpha);
    let size = smoothed.l2_norm();
    let slack = bound - size;
    Ok(AtomCertificate {
        cube: *q,
        kind: AtomKind::Standard,
        slacks: vec![("size".into(), slack)],
        moment_residuals,
        leaks,
        valid: leaks == 0 && moments_ok && slack >= -ATOM_TOL * bound,
    })
}

/// Cubes of wavelet entries not strictly contained in another entry's cube.
pub fn maximal_cubes(c: &CoefficientField) -> Vec<DyadicCube> {
    let cubes: BTreeSet<DyadicCube> = c.wavelets().map(|(i, _)| i.cube).collect();
    cubes
        .iter()
        .filter(|q| {
            let mut a = **q;
            let floor = c.window().j_min;
            while a.j > floor {
                a = a.parent();
                if cubes.contains(&a) {
                    return false;
                }
            }
            true
        })
        .copied()
        .collect()
}

/// One piece of the greedy decomposition, `λ_u` times a boundary atom on `cube`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomPiece {
    pub cube: DyadicCube,
    pub lambda: f64,
}

/// Splits the wavelet entries of `c` by their maximal cube and normalizes each
/// piece to a boundary atom, `λ_Q = |Q|^{1/2 − α/n} (Σ 2^{−2jα} g²)^{1/2}`.
pub fn greedy_atoms(c: &CoefficientField, alpha: f64) -> Vec<AtomPiece> {
    let n = c.dim() as f64;
    let roots = maximal_cubes(c);
    let set: BTreeSet<DyadicCube> = roots.iter().copied().collect();
    let mut energy: BTreeMap<DyadicCube, f64> = BTreeMap::new();
    for (i, v) in c.wavelets() {
        let mut a = i.cube;
        while !set.contains(&a) {
            a = a.parent();
        }
        *energy.entry(a).or_default() += (-2.0 * i.j() as f64 * alpha).exp2() * v * v;
    }
    energy
        .into_iter()
        .map(|(q, e)| AtomPiece {
            cube: q,
            lambda: q.volume().powf(0.5 - alpha / n) * e.sqrt(),
        })
        .collect()
}

/// `Σ |λ_u|` of [`greedy_atoms`], an upper bound for the atomic norm of the
/// wavelet part of `c`.
pub fn p_alpha_upper(c: &CoefficientField, alpha: f64) -> f64 {
    greedy_atoms(c, alpha).iter().map(|p| p.lambda).sum()
}

/// `sup_f ⟨f, g⟩ / ‖f‖_{Q_α}` over two families of test fields: `g` itself and
/// the micro-local maximizers of the blocks rooted at the maximal cubes.
pub fn p_alpha_lower(c: &CoefficientField, alpha: f64) -> Result<f64> {
    let g = c.filtered(|i, _| i.eps != 0);
    if g.is_empty() {
        return Ok(0.0);
    }
    let ratio = |f: &CoefficientField| -> Result<f64> {
        let qn = q_norm_field(f, alpha)?.value;
        Ok(if qn > 0.0 { pairing(f, &g).abs() / qn } else { 0.0 })
    };
    let mut best = ratio(&g)?;

    let finest = g.finest_scale().expect("nonempty");
    let n = g.dim();
    if alpha < n as f64 / 2.0 {
        let mut f = CoefficientField::new(*g.window());
        let mut any = false;
        for q in maximal_cubes(&g) {
            let depth = (finest - q.j) as u32;
            if crate::dyadic::BlockIndexSet::expected_len(n, depth) > LOWER_BOUND_MAX_MEMBERS {
                continue;
            }
            let p = MicrolocalProblem::from_field(&g, q, depth, alpha)?;
            let sol = solve(&p)?;
            for (idx, v) in p.members().iter().zip(&sol.maximizer) {
                if *v != 0.0 {
                    f.insert(*idx, *v)?;
                    any = true;
                }
            }
        }
        if any {
            best = best.max(ratio(&f)?);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PBracket {
    pub lower: f64,
    pub upper: f64,
}

pub fn p_alpha_bracket(c: &CoefficientField, alpha: f64) -> Result<PBracket> {
    Ok(PBracket {
        lower: p_alpha_lower(c, alpha)?,
        upper: p_alpha_upper(c, alpha),
    })
}

fn anchor_set(spec: &WindowSpec) -> Result<BTreeSet<DyadicCube>> {
    Ok(spec.anchor_cubes()?.into_iter().collect())
}

fn covers_torus(spec: &WindowSpec, n: usize, period_log2: i32) -> Result<bool> {
    let per = positions_per_axis(spec.anchor_scale(), period_log2);
    Ok(anchor_set(spec)?.len() as i64 == per.pow(n as u32))
}

/// Wavelet entries with `lo <= j <= hi` lying inside one of the anchors.
fn window_part(c: &CoefficientField, spec: &WindowSpec, lo: i32, hi: i32) -> Result<CoefficientField> {
    let a = spec.anchor_scale();
    if a < c.window().j_min {
        return Err(QspaceError::Window {
            scale: a,
            reason: format!("window anchor scale below the field's coarsest scale {}", c.window().j_min),
        });
    }
    let anchors = anchor_set(spec)?;
    Ok(c.filtered(|i, _| {
        i.eps != 0 && i.j() >= lo && i.j() <= hi && anchors.contains(&i.cube.ancestor(a))
    }))
}

/// `P_{s,N} g`: the wavelet entries of the window.
pub fn window_projection(c: &CoefficientField, spec: &WindowSpec) -> Result<CoefficientField> {
    window_part(c, spec, spec.anchor_scale(), spec.s)
}

/// Which pair of operators a split stands for; the arithmetic is identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    /// `T¹`, `T²` acting on predual functions.
    T,
    /// `S¹`, `S²` acting on `Q_α` functions.
    S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandSplit {
    pub s: i32,
    pub t: u32,
    pub depth: u32,
    pub kind: SplitKind,
    /// Scales `s − t ..= s`.
    pub high: CoefficientField,
    /// Scales `s − N ..< s − t`.
    pub low: CoefficientField,
}

pub fn band_split(c: &CoefficientField, spec: &WindowSpec, t: u32, kind: SplitKind) -> Result<BandSplit> {
    check_t(spec, t)?;
    let cut = spec.s - t as i32;
    Ok(BandSplit {
        s: spec.s,
        t,
        depth: spec.depth,
        kind,
        high: window_part(c, spec, cut, spec.s)?,
        low: window_part(c, spec, spec.anchor_scale(), cut - 1)?,
    })
}

fn check_t(spec: &WindowSpec, t: u32) -> Result<()> {
    if t > spec.depth {
        return Err(QspaceError::Parameter(format!(
            "t = {t} exceeds window depth N = {}",
            spec.depth
        )));
    }
    Ok(())
}

/// Redistributed root coefficients per `(cube, depth)`, shared across windows.
#[derive(Default, Debug)]
pub struct BlockCache {
    roots: BTreeMap<(DyadicCube, u32), Vec<(Epsilon, f64)>>,
    pub solves: usize,
}

impl BlockCache {
    fn root(
        &mut self,
        part: &CoefficientField,
        q: DyadicCube,
        t: u32,
        alpha: f64,
    ) -> Result<&[(Epsilon, f64)]> {
        if !self.roots.contains_key(&(q, t)) {
            let p = MicrolocalProblem::from_field(part, q, t, alpha)?;
            let r = if p.values.iter().all(|v| *v == 0.0) {
                redistribute(&p, 0.0)
            } else {
                self.solves += 1;
                solve(&p)?.redistributed
            };
            self.roots.insert((q, t), r);
        }
        Ok(&self.roots[&(q, t)])
    }
}

/// Result of [`p_stn`].
#[derive(Clone, Debug)]
pub struct Pstn {
    pub s: i32,
    pub t: u32,
    pub depth: u32,
    /// `g^{ε,s,t,N}_{j,k}`.
    pub modified: CoefficientField,
    /// `P_{s,t,N} g` squared, on cells of scale `s − t`.
    pub square: SquareFunction,
    /// `Q_{s,t,N} g`, the `L¹` norm of the cutoff layer alone.
    pub q_stn: f64,
    /// `L¹` norm of the square function of the layers below the cutoff.
    pub lower_l1: f64,
    /// `‖P_{s,t,N} g‖_{L¹}`.
    pub l1: f64,
}

impl Pstn {
    pub fn function(&self) -> Result<GridFunction> {
        self.square.to_grid()
    }
}

fn hardy_square(c: &CoefficientField, scale: i32) -> SquareFunction {
    let n = c.dim() as f64;
    SquareFunction::build_at(c, scale, |j| (n * j as f64).exp2())
}

/// Builds the modified coefficients for one window and depth and evaluates
/// `P_{s,t,N} g`, `Q_{s,t,N} g` and the `L¹` norm.
pub fn p_stn(c: &CoefficientField, spec: &WindowSpec, t: u32, alpha: f64) -> Result<Pstn> {
    p_stn_cached(c, spec, t, alpha, &mut BlockCache::default())
}

pub fn p_stn_cached(
    c: &CoefficientField,
    spec: &WindowSpec,
    t: u32,
    alpha: f64,
    cache: &mut BlockCache,
) -> Result<Pstn> {
    check_t(spec, t)?;
    let part = window_projection(c, spec)?;
    let cut = spec.s - t as i32;
    let mut modified = part.filtered(|i, _| i.j() < cut);
    let roots: BTreeSet<DyadicCube> = part
        .iter()
        .filter(|(i, _)| i.j() >= cut)
        .map(|(i, _)| i.cube.ancestor(cut))
        .collect();
    let mut layer = CoefficientField::new(*part.window());
    for q in roots {
        for (eps, v) in cache.root(&part, q, t, alpha)? {
            modified.set(*eps, q.j, q.k(), *v)?;
            layer.set(*eps, q.j, q.k(), *v)?;
        }
    }
    let square = hardy_square(&modified, cut);
    let l1 = square.l1_norm();
    let q_stn = if layer.is_empty() { 0.0 } else { hardy_square(&layer, cut).l1_norm() };
    let below = modified.filtered(|i, _| i.j() < cut);
    let lower_l1 = if below.is_empty() { 0.0 } else { hardy_square(&below, cut - 1).l1_norm() };
    Ok(Pstn {
        s: spec.s,
        t,
        depth: spec.depth,
        modified,
        square,
        q_stn,
        lower_l1,
        l1,
    })
}

/// One `(s, N, t)` evaluation of a sup-min or sup-sup scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub s: i32,
    #[serde(rename = "N")]
    pub depth: u32,
    pub t: u32,
    pub t1: f64,
    pub t2: f64,
    pub total: f64,
}

/// The optimizing `t` of one window and the value it attains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowChoice {
    pub s: i32,
    #[serde(rename = "N")]
    pub depth: u32,
    pub t: u32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub value: f64,
    pub rows: Vec<ScanRow>,
    /// Per window, the optimizing `t`, smallest on ties.
    pub choices: Vec<WindowChoice>,
    /// Window attaining the outer supremum.
    pub argmax: Option<(i32, u32)>,
    pub meta: BTreeMap<String, String>,
}

impl ScanReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("s,N,t,T1_value,T2_value,total\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{:.17e},{:.17e},{:.17e}", r.s, r.depth, r.t, r.t1, r.t2, r.total);
        }
        out
    }

    fn assemble(rows: Vec<ScanRow>, minimize: bool, op: &str, alpha: f64) -> Self {
        let mut choices: Vec<WindowChoice> = Vec::new();
        for r in &rows {
            match choices.last_mut() {
                Some(c) if c.s == r.s && c.depth == r.depth => {
                    let better = if minimize { r.total < c.value } else { r.total > c.value };
                    if better {
                        c.t = r.t;
                        c.value = r.total;
                    }
                }
                _ => choices.push(WindowChoice {
                    s: r.s,
                    depth: r.depth,
                    t: r.t,
                    value: r.total,
                }),
            }
        }
        let mut value = 0.0;
        let mut argmax = None;
        for c in &choices {
            if argmax.is_none() || c.value > value {
                value = c.value;
                argmax = Some((c.s, c.depth));
            }
        }
        let mut meta = BTreeMap::new();
        meta.insert("op".into(), op.into());
        meta.insert("alpha".into(), alpha.to_string());
        meta.insert("windows".into(), choices.len().to_string());
        Self {
            value,
            rows,
            choices,
            argmax,
            meta,
        }
    }
}

/// Every window with `s` in the field's scale window, `N` reaching down to
/// its coarsest scale, anchored over the whole torus.
pub fn default_family(c: &CoefficientField) -> Result<Vec<WindowSpec>> {
    let w = c.window();
    let mut out = Vec::new();
    for s in w.j_min..=w.j_max {
        for depth in 0..=(s - w.j_min) as u32 {
            out.push(WindowSpec::covering_torus(w.n, s, depth, w.period_log2)?);
        }
    }
    Ok(out)
}

fn check_family(family: &[WindowSpec]) -> Result<()> {
    if family.is_empty() {
        return Err(QspaceError::Empty("window family is empty".into()));
    }
    Ok(())
}

/// `sup_{(s,N)} min_{0<=t<=N} ‖P_{s,t,N} g‖_{L¹}` over `family`.
pub fn p_alpha_cha(c: &CoefficientField, alpha: f64, family: &[WindowSpec]) -> Result<ScanReport> {
    check_family(family)?;
    let mut cache = BlockCache::default();
    let mut rows = Vec::new();
    for spec in family {
        for t in 0..=spec.depth {
            let p = p_stn_cached(c, spec, t, alpha, &mut cache)?;
            rows.push(ScanRow {
                s: spec.s,
                depth: spec.depth,
                t,
                t1: p.q_stn,
                t2: p.lower_l1,
                total: p.l1,
            });
        }
    }
    let mut rep = ScanReport::assemble(rows, true, "p_alpha_cha", alpha);
    rep.meta.insert("block_solves".into(), cache.solves.to_string());
    Ok(rep)
}

/// Norms of synthesized scale bands `lo..=hi`, shared by every window that
/// covers the torus.
struct BandNorms<'a> {
    basis: &'a Basis,
    c: &'a CoefficientField,
    predual: bool,
    table: Option<BTreeMap<(i32, i32), f64>>,
}

impl BandNorms<'_> {
    fn norm(&self, f: &GridFunction) -> f64 {
        if self.predual {
            f.l1_norm()
        } else {
            f.linf_norm()
        }
    }

    fn covering(&mut self, lo: i32, hi: i32) -> Result<f64> {
        if self.table.is_none() {
            let w = *self.c.window();
            let layers: Vec<GridFunction> = (w.j_min..=w.j_max)
                .map(|j| self.basis.synthesize(&self.c.scale_band(j, j)))
                .collect::<Result<_>>()?;
            let mut table = BTreeMap::new();
            for a in w.j_min..=w.j_max {
                let mut acc = GridFunction::zeros(*self.basis.grid());
                for b in a..=w.j_max {
                    acc.add_scaled(1.0, &layers[(b - w.j_min) as usize]);
                    table.insert((a, b), self.norm(&acc));
                }
            }
            self.table = Some(table);
        }
        let table = self.table.as_ref().expect("built above");
        Ok(table.get(&(lo, hi)).copied().unwrap_or(0.0))
    }

    fn band(&mut self, spec: &WindowSpec, lo: i32, hi: i32) -> Result<f64> {
        let grid = *self.basis.grid();
        if covers_torus(spec, grid.n, grid.period_log2)? {
            self.covering(lo, hi)
        } else {
            let f = self.basis.synthesize(&window_part(self.c, spec, lo, hi)?)?;
            Ok(self.norm(&f))
        }
    }
}

/// `sup_{(s,N)} min_t (‖T¹‖ + ‖T²‖_{L¹})`, with `‖T¹‖` replaced by its
/// greedy atomic upper bound.
pub fn l1alpha_norm(
    c: &CoefficientField,
    basis: &Basis,
    alpha: f64,
    family: &[WindowSpec],
) -> Result<ScanReport> {
    band_scan(c, basis, alpha, family, true)
}

/// `sup_{(s,N)} sup_t (‖S¹‖_{Q_α} + ‖S²‖_{L^∞})`.
pub fn linfalpha_norm(
    c: &CoefficientField,
    basis: &Basis,
    alpha: f64,
    family: &[WindowSpec],
) -> Result<ScanReport> {
    band_scan(c, basis, alpha, family, false)
}

fn band_scan(
    c: &CoefficientField,
    basis: &Basis,
    alpha: f64,
    family: &[WindowSpec],
    predual: bool,
) -> Result<ScanReport> {
    check_family(family)?;
    let mut bands = BandNorms {
        basis,
        c,
        predual,
        table: None,
    };
    let high_norm = |f: &CoefficientField| -> Result<f64> {
        if predual {
            Ok(p_alpha_upper(f, alpha))
        } else {
            Ok(q_norm_field(f, alpha)?.value)
        }
    };
    let mut high_memo: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    let mut rows = Vec::new();
    for spec in family {
        let covering = covers_torus(spec, c.dim(), c.window().period_log2)?;
        let lo = spec.anchor_scale();
        if lo < c.window().j_min {
            return Err(QspaceError::Window {
                scale: lo,
                reason: "window anchor scale below the field's coarsest scale".into(),
            });
        }
        for t in 0..=spec.depth {
            let cut = spec.s - t as i32;
            let t1 = if covering {
                match high_memo.get(&(cut, spec.s)) {
                    Some(v) => *v,
                    None => {
                        let v = high_norm(&c.scale_band(cut, spec.s))?;
                        high_memo.insert((cut, spec.s), v);
                        v
                    }
                }
            } else {
                high_norm(&window_part(c, spec, cut, spec.s)?)?
            };
            let t2 = if cut > lo { bands.band(spec, lo, cut - 1)? } else { 0.0 };
            rows.push(ScanRow {
                s: spec.s,
                depth: spec.depth,
                t,
                t1,
                t2,
                total: t1 + t2,
            });
        }
    }
    let (op, minimize) = if predual {
        ("l1alpha_norm", true)
    } else {
        ("linfalpha_norm", false)
    };
    let mut rep = ScanReport::assemble(rows, minimize, op, alpha);
    rep.meta.insert(
        "high_part".into(),
        if predual { "greedy atomic upper bound" } else { "q_norm" }.into(),
    );
    Ok(rep)
}

/// `max_j ‖Q_j g‖_{H¹} / ‖g‖_{L¹}` over the wavelet scales of the basis,
/// with the per-scale ratios.
pub fn layer_h1_ratios(basis: &Basis, g: &GridFunction) -> Result<(f64, Vec<(i32, f64)>)> {
    let l1 = g.l1_norm();
    if l1 == 0.0 {
        return Err(QspaceError::Empty("g vanishes on the grid".into()));
    }
    let c = basis.analyze(g, basis.full_window(), None)?;
    let w = c.window();
    let per: Vec<(i32, f64)> = (w.j_min..=w.j_max)
        .map(|j| (j, h1_norm(&c.scale_band(j, j)) / l1))
        .collect();
    let max = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((max, per))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::FieldWindow;

    fn win(n: usize, j_min: i32, j_max: i32, l0: i32) -> FieldWindow {
        FieldWindow::new(n, j_min, j_max, l0).unwrap()
    }

    fn boundary_atom() -> CoefficientField {
        let mut c = CoefficientField::new(win(1, 0, 3, 0));
        c.set(1, 0, &[0], 1.0).unwrap();
        c
    }

    #[test]
    fn pairing_basics() {
        let a = boundary_atom();
        assert_eq!(pairing(&a, &a), 1.0);
        let mut b = CoefficientField::new(win(1, 0, 3, 0));
        b.set(1, 1, &[1], 2.0).unwrap();
        assert_eq!(pairing(&a, &b), 0.0);
    }

    #[test]
    fn wavelet_atom_examples() {
        let q = DyadicCube::new(0, &[0]).unwrap();
        let z = CoefficientField::new(win(1, 0, 3, 0));
        let cert = wavelet_atom_check(&z, &q, 0.25);
        assert!(cert.valid);
        assert_eq!(cert.slacks[0].1, 1.0);

        let cert = wavelet_atom_check(&boundary_atom(), &q, 0.25);
        assert!(cert.valid);
        assert!(cert.slacks[0].1.abs() < 1e-15);

        let cert = wavelet_atom_check(&boundary_atom().scaled(1.01), &q, 0.25);
        assert!(!cert.valid);
    }

    #[test]
    fn wavelet_atom_leak() {
        let mut c = CoefficientField::new(win(1, 0, 3, 1));
        c.set(1, 1, &[2], 0.1).unwrap();
        let q = DyadicCube::new(0, &[0]).unwrap();
        let cert = wavelet_atom_check(&c, &q, 0.25);
        assert_eq!(cert.leaks, 1);
        assert!(!cert.valid);
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(multi_indices(1, 0), vec![vec![0]]);
    }

    #[test]
    fn greedy_upper_examples() {
        assert!((p_alpha_upper(&boundary_atom(), 0.25) - 1.0).abs() < 1e-10);
        assert!((p_alpha_upper(&boundary_atom().scaled(-3.5), 0.25) - 3.5).abs() < 1e-12);

        let mut c = CoefficientField::new(win(1, 0, 3, 1));
        c.set(1, 0, &[0], 2.0).unwrap();
        c.set(1, 0, &[1], 3.0).unwrap();
        assert!((p_alpha_upper(&c, 0.25) - 5.0).abs() < 1e-12);
        assert_eq!(greedy_atoms(&c, 0.25).len(), 2);
    }

    #[test]
    fn bracket_of_boundary_atom() {
        let b = p_alpha_bracket(&boundary_atom(), 0.25).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-10);
        assert!((b.upper - 1.0).abs() < 1e-10);
    }

    #[test]
    fn band_split_degenerate_ranges() {
        let mut c = CoefficientField::new(win(1, 0, 3, 0));
        for j in 0..=3 {
            c.set(1, j, &[0], 1.0 + j as f64).unwrap();
        }
        let spec = WindowSpec::covering_torus(1, 3, 3, 0).unwrap();
        let s = band_split(&c, &spec, 3, SplitKind::T).unwrap();
        assert!(s.low.is_empty());
        assert_eq!(s.high.len(), 4);
        let s = band_split(&c, &spec, 0, SplitKind::S).unwrap();
        assert_eq!(s.high.len(), 1);
        assert_eq!(s.high.coarsest_scale(), Some(3));
        assert!(band_split(&c, &spec, 4, SplitKind::T).is_err());
    }

    #[test]
    fn p_stn_zero_field() {
        let c = CoefficientField::new(win(1, 0, 3, 0));
        let spec = WindowSpec::covering_torus(1, 2, 2, 0).unwrap();
        for t in 0..=2 {
            let p = p_stn(&c, &spec, t, 0.25).unwrap();
            assert_eq!(p.l1, 0.0);
            assert_eq!(p.q_stn, 0.0);
            assert!(p.function().unwrap().samples().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn p_stn_depth_zero_is_hardy() {
        let mut c = CoefficientField::new(win(1, 0, 4, 0));
        c.set(1, 2, &[1], 0.7).unwrap();
        c.set(1, 2, &[3], -0.2).unwrap();
        let spec = WindowSpec::covering_torus(1, 2, 1, 0).unwrap();
        let p = p_stn(&c, &spec, 0, 0.25).unwrap();
        assert!((p.l1 - h1_norm(&c)).abs() < 1e-12);
    }

    #[test]
    fn empty_family_is_an_error() {
        assert!(p_alpha_cha(&boundary_atom(), 0.25, &[]).is_err());
    }

    #[test]
    fn ties_prefer_smallest_t() {
        let rows = vec![
            ScanRow { s: 1, depth: 1, t: 0, t1: 0.0, t2: 0.0, total: 2.0 },
            ScanRow { s: 1, depth: 1, t: 1, t1: 0.0, t2: 0.0, total: 2.0 },
        ];
        let r = ScanReport::assemble(rows, true, "x", 0.1);
        assert_eq!(r.choices[0].t, 0);
        assert_eq!(r.value, 2.0);
    }
}
