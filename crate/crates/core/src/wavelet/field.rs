use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dyadic::{check_dim, positions_per_axis, DyadicCube, Epsilon, WaveletIndex};
use crate::error::{QspaceError, Result};

/// Declared extent of a coefficient field: a scale range on a torus of period
/// `2^period_log2`. Scale functions (`ε = 0`) live at `j_min` only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldWindow {
    pub n: usize,
    pub j_min: i32,
    pub j_max: i32,
    pub period_log2: i32,
}

impl FieldWindow {
    pub fn new(n: usize, j_min: i32, j_max: i32, period_log2: i32) -> Result<Self> {
        check_dim(n)?;
        if j_min > j_max {
            return Err(QspaceError::Window {
                scale: j_min,
                reason: format!("j_min {j_min} exceeds j_max {j_max}"),
            });
        }
        if j_min + period_log2 < 0 {
            return Err(QspaceError::Window {
                scale: j_min,
                reason: format!("coarser than the torus period 2^{period_log2}"),
            });
        }
        Ok(Self {
            n,
            j_min,
            j_max,
            period_log2,
        })
    }

    pub fn positions(&self, j: i32) -> i64 {
        positions_per_axis(j, self.period_log2)
    }

    pub fn admits(&self, idx: &WaveletIndex) -> Result<()> {
        let j = idx.j();
        let reject = |reason: String| Err(QspaceError::Window { scale: j, reason });
        if idx.dim() != self.n {
            return reject(format!("index dimension {} in an {}-d field", idx.dim(), self.n));
        }
        if j < self.j_min || j > self.j_max {
            return reject(format!("outside scale window [{}, {}]", self.j_min, self.j_max));
        }
        if idx.eps == 0 && j != self.j_min {
            return reject(format!("scale-function index away from j_min = {}", self.j_min));
        }
        let per = self.positions(j);
        if idx.k().iter().any(|&k| k < 0 || k >= per) {
            return reject(format!("position {:?} outside the torus range [0, {per})", idx.k()));
        }
        Ok(())
    }
}

/// Sparse wavelet coefficients `f^ε_{j,k}`; absent entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    window: FieldWindow,
    basis: Option<String>,
    entries: BTreeMap<WaveletIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
    j_min: i32,
    j_max: i32,
    period_log2: i32,
    #[serde(default)]
    basis: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    eps: Vec<u8>,
    j: i32,
    k: Vec<i64>,
    v: f64,
}

impl CoefficientField {
    pub fn new(window: FieldWindow) -> Self {
        Self {
            window,
            basis: None,
            entries: BTreeMap::new(),
        }
    }

    pub fn with_basis(mut self, fingerprint: impl Into<String>) -> Self {
        self.basis = Some(fingerprint.into());
        self
    }

    pub fn window(&self) -> &FieldWindow {
        &self.window
    }

    pub fn basis(&self) -> Option<&str> {
        self.basis.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.window.n
    }

    /// Stores `v`; zero removes the entry.
    pub fn insert(&mut self, idx: WaveletIndex, v: f64) -> Result<()> {
        self.window.admits(&idx)?;
        if !v.is_finite() {
            return Err(QspaceError::Numeric(format!("non-finite coefficient at {idx:?}")));
        }
        if v == 0.0 {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, v);
        }
        Ok(())
    }

    pub fn set(&mut self, eps: Epsilon, j: i32, k: &[i64], v: f64) -> Result<()> {
        self.insert(WaveletIndex::new(eps, j, k)?, v)
    }

    pub fn get(&self, idx: &WaveletIndex) -> f64 {
        self.entries.get(idx).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveletIndex, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero wavelet entries (`ε ≠ 0`).
    pub fn wavelets(&self) -> impl Iterator<Item = (&WaveletIndex, &f64)> {
        self.entries.iter().filter(|(i, _)| i.eps != 0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = Self {
            window: self.window,
            basis: self.basis.clone(),
            entries: BTreeMap::new(),
        };
        for (i, v) in &self.entries {
            let w = a * v;
            if w != 0.0 {
                out.entries.insert(*i, w);
            }
        }
        out
    }

    /// `a·self + b·other` on the union of supports.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.window != other.window {
            return Err(QspaceError::Shape("fields have different windows".into()));
        }
        let mut out = self.scaled(a);
        for (i, v) in &other.entries {
            let w = out.get(i) + b * v;
            out.insert(*i, w)?;
        }
        Ok(out)
    }

    /// Copy keeping only entries accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&WaveletIndex, f64) -> bool) -> Self {
        Self {
            window: self.window,
            basis: self.basis.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(i, v)| keep(i, **v))
                .map(|(i, v)| (*i, *v))
                .collect(),
        }
    }

    /// Wavelet entries with `lo <= j <= hi`.
    pub fn scale_band(&self, lo: i32, hi: i32) -> Self {
        self.filtered(|i, _| i.eps != 0 && i.j() >= lo && i.j() <= hi)
    }

    /// Wavelet entries whose cube lies inside `region`.
    pub fn inside(&self, region: &DyadicCube) -> Self {
        self.filtered(|i, _| i.eps != 0 && region.contains(&i.cube))
    }

    /// Entries with `|v| <= tol` removed.
    pub fn pruned(&self, tol: f64) -> Self {
        self.filtered(|_, v| v.abs() > tol)
    }

    pub fn energy(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, v) in &self.entries {
            m = m.max((v - other.get(i)).abs());
        }
        for (i, v) in &other.entries {
            if !self.entries.contains_key(i) {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn finest_scale(&self) -> Option<i32> {
        self.wavelets().map(|(i, _)| i.j()).max()
    }

    pub fn coarsest_scale(&self) -> Option<i32> {
        self.wavelets().map(|(i, _)| i.j()).min()
    }

    /// JSON-lines: one header record, then one record per entry.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        let header = Header {
            n: self.window.n,
            j_min: self.window.j_min,
            j_max: self.window.j_max,
            period_log2: self.window.period_log2,
            basis: self.basis.clone(),
        };
        writeln!(w, "{}", serde_json::json!({ "header": header }))?;
        for (i, v) in &self.entries {
            let rec = Record {
                eps: crate::dyadic::epsilon_bits(i.eps, i.dim()),
                j: i.j(),
                k: i.k().to_vec(),
                v: *v,
            };
            writeln!(w, "{}", serde_json::to_string(&rec)?)?;
        }
        Ok(())
    }

    /// Reads the format written by [`write_jsonl`](Self::write_jsonl). Lines
    /// holding a `footer` object are returned separately.
    pub fn read_jsonl(r: impl BufRead) -> Result<(Self, Vec<Value>)> {
        let mut field: Option<Self> = None;
        let mut footers = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |e: &dyn std::fmt::Display| {
                QspaceError::Format(format!("line {}: {e}", lineno + 1))
            };
            let value: Value = serde_json::from_str(&line).map_err(|e| bad(&e))?;
            if let Some(h) = value.get("header") {
                if field.is_some() {
                    return Err(bad(&"duplicate header"));
                }
                let h: Header = serde_json::from_value(h.clone()).map_err(|e| bad(&e))?;
                let window = FieldWindow::new(h.n, h.j_min, h.j_max, h.period_log2)
                    .map_err(|e| bad(&e))?;
                let mut f = Self::new(window);
                f.basis = h.basis;
                field = Some(f);
            } else if let Some(foot) = value.get("footer") {
                footers.push(foot.clone());
            } else {
                let f = field.as_mut().ok_or_else(|| bad(&"record before header"))?;
                let rec: Record = serde_json::from_value(value).map_err(|e| bad(&e))?;
                if rec.eps.len() != rec.k.len() {
                    return Err(bad(&"eps and k lengths differ"));
                }
                let eps = crate::dyadic::epsilon_from_bits(&rec.eps).map_err(|e| bad(&e))?;
                let idx = WaveletIndex::new(eps, rec.j, &rec.k).map_err(|e| bad(&e))?;
                f.insert(idx, rec.v).map_err(|e| bad(&e))?;
            }
        }
        let field = field.ok_or_else(|| QspaceError::Format("missing header record".into()))?;
        Ok((field, footers))
    }
}
