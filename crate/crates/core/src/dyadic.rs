//! Index algebra for dyadic cubes and wavelet indices.
//!
//! A cube `Q_{j,k}` is the product of intervals `[2^-j k_s, 2^-j (k_s + 1)]`.
//! Everything is stored as exact integers; geometric endpoints are only
//! materialized on request, so containment and refinement never see rounding.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QspaceError, Result};

pub const MAX_DIM: usize = 3;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(QspaceError::Dimension(n))
    }
}

/// Dyadic cube `Q_{j,k}` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    n: u8,
    pub j: i32,
    k: [i64; MAX_DIM],
}

impl DyadicCube {
    pub fn new(j: i32, k: &[i64]) -> Result<Self> {
        check_dim(k.len())?;
        let mut kk = [0; MAX_DIM];
        kk[..k.len()].copy_from_slice(k);
        Ok(Self {
            n: k.len() as u8,
            j,
            k: kk,
        })
    }

    /// The cube `[0, 2^-j]^n`.
    pub fn origin(n: usize, j: i32) -> Result<Self> {
        Self::new(j, &vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> &[i64] {
        &self.k[..self.n as usize]
    }

    /// Side length `2^-j`.
    pub fn side(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    /// Volume `|Q| = 2^{-jn}`.
    pub fn volume(&self) -> f64 {
        (-(self.j as f64) * self.n as f64).exp2()
    }

    /// Lower corner as exact dyadic rationals `(numerator, log2 denominator)`.
    pub fn lower_dyadic(&self) -> Vec<(i64, i32)> {
        self.k().iter().map(|&k| (k, self.j)).collect()
    }

    pub fn lower(&self) -> Vec<f64> {
        let side = self.side();
        self.k().iter().map(|&k| k as f64 * side).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        let side = self.side();
        self.k().iter().map(|&k| (k + 1) as f64 * side).collect()
    }

    /// The `2^n` children `Q_{j+1, 2k+v}`, `v ∈ {0,1}^n`, ordered by the bit
    /// pattern of `v` (bit `s` is axis `s`).
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..1usize << n)
            .map(|v| {
                let mut k = self.k;
                for (s, ks) in k.iter_mut().enumerate().take(n) {
                    *ks = 2 * *ks + ((v >> s) & 1) as i64;
                }
                DyadicCube {
                    n: self.n,
                    j: self.j + 1,
                    k,
                }
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        self.ancestor(self.j - 1)
    }

    /// The unique dyadic cube at scale `j <= self.j` containing `self`.
    pub fn ancestor(&self, j: i32) -> DyadicCube {
        assert!(j <= self.j, "ancestor scale must be coarser");
        let shift = (self.j - j) as u32;
        let mut k = self.k;
        for ks in k.iter_mut().take(self.dim()) {
            *ks = floor_shift(*ks, shift);
        }
        DyadicCube { n: self.n, j, k }
    }

    /// `other ⊂ self` (closed containment, non-strict).
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.n == other.n && other.j >= self.j && other.ancestor(self.j).k == self.k
    }

    /// Offset of a descendant relative to `2^{j'-j} k`.
    pub fn relative_offset(&self, descendant: &DyadicCube) -> Option<Vec<i64>> {
        if !self.contains(descendant) {
            return None;
        }
        let shift = (descendant.j - self.j) as u32;
        Some(
            descendant
                .k()
                .iter()
                .zip(self.k())
                .map(|(&kd, &ka)| kd - (ka << shift))
                .collect(),
        )
    }

    /// Cube wrapped onto a torus with `2^{j + period_log2}` positions per axis.
    pub fn wrapped(&self, period_log2: i32) -> DyadicCube {
        let per = positions_per_axis(self.j, period_log2);
        let mut c = *self;
        if per > 0 {
            for ks in c.k.iter_mut().take(self.dim()) {
                *ks = ks.rem_euclid(per);
            }
        }
        c
    }

    /// All descendants at scale `j' >= self.j`.
    pub fn descendants_at(&self, j: i32) -> Vec<DyadicCube> {
        assert!(j >= self.j);
        let n = self.dim();
        let per = 1i64 << (j - self.j);
        let mut out = Vec::with_capacity((per as usize).pow(n as u32));
        let mut v = vec![0i64; n];
        loop {
            let mut k = [0; MAX_DIM];
            for s in 0..n {
                k[s] = self.k[s] * per + v[s];
            }
            out.push(DyadicCube { n: self.n, j, k });
            if !odometer(&mut v, per) {
                break;
            }
        }
        out
    }
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicCube {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.j, self.k).cmp(&(other.n, other.j, other.k))
    }
}

/// Floor division by `2^shift` for signed integers.
pub(crate) fn floor_shift(k: i64, shift: u32) -> i64 {
    k >> shift
}

/// Number of translates per axis at scale `j` on a torus of period
/// `2^period_log2`; zero when the scale is coarser than the period.
pub fn positions_per_axis(j: i32, period_log2: i32) -> i64 {
    let e = j + period_log2;
    if e < 0 {
        0
    } else {
        1i64 << e
    }
}

/// Advance a mixed counter over `[0, base)^n`, returning false on wrap.
pub(crate) fn odometer(v: &mut [i64], base: i64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

/// All points of `[0, side)^n` in row-major order.
pub fn lattice(n: usize, side: i64) -> Vec<Vec<i64>> {
    if side <= 0 {
        return Vec::new();
    }
    let mut v = vec![0i64; n];
    let mut out = vec![v.clone()];
    while odometer(&mut v, side) {
        out.push(v.clone());
    }
    out
}

/// A bit pattern `ε ∈ {0,1}^n`; bit `s` selects the wavelet factor on axis `s`.
pub type Epsilon = u8;

/// The nonzero patterns `E_n`.
pub fn nonzero_epsilons(n: usize) -> impl Iterator<Item = Epsilon> {
    1..(1u8 << n)
}

pub fn epsilon_bits(eps: Epsilon, n: usize) -> Vec<u8> {
    (0..n).map(|s| (eps >> s) & 1).collect()
}

pub fn epsilon_from_bits(bits: &[u8]) -> Result<Epsilon> {
    let mut e = 0u8;
    for (s, &b) in bits.iter().enumerate() {
        match b {
            0 => {}
            1 => e |= 1 << s,
            _ => return Err(QspaceError::Format(format!("epsilon bit {b} is not 0 or 1"))),
        }
    }
    Ok(e)
}

/// Wavelet index `(ε, j, k)`. `ε = 0` denotes the scale function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    pub cube: DyadicCube,
    pub eps: Epsilon,
}

impl WaveletIndex {
    pub fn new(eps: Epsilon, j: i32, k: &[i64]) -> Result<Self> {
        let cube = DyadicCube::new(j, k)?;
        if eps as usize >= 1 << cube.dim() {
            return Err(QspaceError::Parameter(format!(
                "epsilon pattern {eps:#b} has more than {} bits",
                cube.dim()
            )));
        }
        Ok(Self { cube, eps })
    }

    pub fn j(&self) -> i32 {
        self.cube.j
    }

    pub fn k(&self) -> &[i64] {
        self.cube.k()
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    pub fn is_scale_function(&self) -> bool {
        self.eps == 0
    }
}

#[derive(Serialize, Deserialize)]
struct CubeRecord {
    j: i32,
    k: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    j: i32,
    k: Vec<i64>,
    eps: Vec<u8>,
}

impl Serialize for DyadicCube {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CubeRecord {
            j: self.j,
            k: self.k().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicCube {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CubeRecord::deserialize(d)?;
        DyadicCube::new(r.j, &r.k).map_err(serde::de::Error::custom)
    }
}

impl Serialize for WaveletIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IndexRecord {
            j: self.j(),
            k: self.k().to_vec(),
            eps: epsilon_bits(self.eps, self.dim()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WaveletIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = IndexRecord::deserialize(d)?;
        if r.eps.len() != r.k.len() {
            return Err(serde::de::Error::custom("eps and k lengths differ"));
        }
        let eps = epsilon_from_bits(&r.eps).map_err(serde::de::Error::custom)?;
        WaveletIndex::new(eps, r.j, &r.k).map_err(serde::de::Error::custom)
    }
}

/// `G_{t,n}` rooted at a base cube: every wavelet index `(ε, j+s, 2^s k + v)`
/// with `ε ∈ E_n`, `0 <= s <= t`, `v ∈ {0..2^s-1}^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockIndexSet {
    pub base: DyadicCube,
    pub depth: u32,
    /// Members ordered by level, then node position, then ε.
    pub members: Vec<WaveletIndex>,
}

impl BlockIndexSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `(2^n - 1) Σ_{0<=s<=t} 2^{ns}`.
    pub fn expected_len(n: usize, t: u32) -> usize {
        ((1usize << n) - 1) * block_node_count(n, t)
    }

    /// Cubes of the block, level by level.
    pub fn nodes(&self) -> Vec<DyadicCube> {
        let mut out = Vec::with_capacity(block_node_count(self.base.dim(), self.depth));
        for s in 0..=self.depth {
            out.extend(self.base.descendants_at(self.base.j + s as i32));
        }
        out
    }

    pub fn position(&self, idx: &WaveletIndex) -> Option<usize> {
        self.members.binary_search_by(|m| member_order(m, idx)).ok()
    }
}

fn member_order(a: &WaveletIndex, b: &WaveletIndex) -> Ordering {
    (a.cube, a.eps).cmp(&(b.cube, b.eps))
}

/// Number of cubes in a depth-`t` block, `Σ_{0<=s<=t} 2^{ns}`.
pub fn block_node_count(n: usize, t: u32) -> usize {
    (0..=t).map(|s| 1usize << (n as u32 * s)).sum()
}

pub fn enumerate_block(base: DyadicCube, t: u32) -> BlockIndexSet {
    let n = base.dim();
    let mut members = Vec::with_capacity(BlockIndexSet::expected_len(n, t));
    for s in 0..=t {
        for cube in base.descendants_at(base.j + s as i32) {
            for eps in nonzero_epsilons(n) {
                members.push(WaveletIndex { cube, eps });
            }
        }
    }
    BlockIndexSet {
        base,
        depth: t,
        members,
    }
}

/// A finite family of windows `Ω^{N,N}_{s,m}` over explicit anchors `m` at
/// scale `s - N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub s: i32,
    #[serde(rename = "N")]
    pub depth: u32,
    pub anchors: Vec<Vec<i64>>,
}

impl WindowSpec {
    pub fn new(s: i32, depth: u32, anchors: Vec<Vec<i64>>) -> Self {
        Self { s, depth, anchors }
    }

    /// Every anchor at scale `s - N` on a torus of period `2^period_log2`.
    pub fn covering_torus(n: usize, s: i32, depth: u32, period_log2: i32) -> Result<Self> {
        check_dim(n)?;
        let top = s - depth as i32;
        let per = positions_per_axis(top, period_log2);
        if per == 0 {
            return Err(QspaceError::Window {
                scale: top,
                reason: format!("anchor scale is coarser than the torus period 2^{period_log2}"),
            });
        }
        let mut anchors = Vec::new();
        let mut v = vec![0i64; n];
        loop {
            anchors.push(v.clone());
            if !odometer(&mut v, per) {
                break;
            }
        }
        Ok(Self::new(s, depth, anchors))
    }

    pub fn anchor_scale(&self) -> i32 {
        self.s - self.depth as i32
    }

    pub fn anchor_cubes(&self) -> Result<Vec<DyadicCube>> {
        let set: BTreeSet<DyadicCube> = self
            .anchors
            .iter()
            .map(|m| DyadicCube::new(self.anchor_scale(), m))
            .collect::<Result<_>>()?;
        Ok(set.into_iter().collect())
    }
}

/// Cubes of `Ω^{t,N}_{s,m}` over all anchors: scales `s - t ..= s`, inside
/// `Q_{s-N,m}`.
pub fn enumerate_window_depth(spec: &WindowSpec, t: u32) -> Result<Vec<DyadicCube>> {
    if t > spec.depth {
        return Err(QspaceError::Parameter(format!(
            "t = {t} exceeds window depth N = {}",
            spec.depth
        )));
    }
    let mut out = BTreeSet::new();
    for anchor in spec.anchor_cubes()? {
        for j in (spec.s - t as i32)..=spec.s {
            out.extend(anchor.descendants_at(j));
        }
    }
    Ok(out.into_iter().collect())
}

/// Cubes of `Ω^{N,N}_{s,m}` over all anchors.
pub fn enumerate_window(spec: &WindowSpec) -> Result<Vec<DyadicCube>> {
    enumerate_window_depth(spec, spec.depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(j: i32, k: &[i64]) -> DyadicCube {
        DyadicCube::new(j, k).unwrap()
    }

    #[test]
    fn children_of_unit_interval() {
        let c = cube(0, &[0]).children();
        assert_eq!(c, vec![cube(1, &[0]), cube(1, &[1])]);
        assert_eq!(c[0].lower(), vec![0.0]);
        assert_eq!(c[0].upper(), vec![0.5]);
        assert_eq!(c[1].upper(), vec![1.0]);
    }

    #[test]
    fn children_of_coarse_interval() {
        let c = cube(-1, &[0]).children();
        assert_eq!(c[0].lower(), vec![0.0]);
        assert_eq!(c[0].upper(), vec![1.0]);
        assert_eq!(c[1].lower(), vec![1.0]);
        assert_eq!(c[1].upper(), vec![2.0]);
    }

    #[test]
    fn four_children_in_the_plane() {
        let c = cube(0, &[0, 0]).children();
        assert_eq!(c.len(), 4);
        let ks: BTreeSet<Vec<i64>> = c.iter().map(|q| q.k().to_vec()).collect();
        let want: BTreeSet<Vec<i64>> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|v| v.to_vec())
            .collect();
        assert_eq!(ks, want);
    }

    #[test]
    fn containment_uses_floor_for_negative_positions() {
        let parent = cube(0, &[-1]);
        assert!(parent.contains(&cube(2, &[-4])));
        assert!(parent.contains(&cube(2, &[-1])));
        assert!(!parent.contains(&cube(2, &[0])));
        assert!(!parent.contains(&cube(-1, &[-1])));
    }

    #[test]
    fn block_examples() {
        let b = enumerate_block(cube(0, &[0]), 0);
        assert_eq!(b.members, vec![WaveletIndex::new(1, 0, &[0]).unwrap()]);

        let b = enumerate_block(cube(0, &[0]), 1);
        let want = vec![
            WaveletIndex::new(1, 0, &[0]).unwrap(),
            WaveletIndex::new(1, 1, &[0]).unwrap(),
            WaveletIndex::new(1, 1, &[1]).unwrap(),
        ];
        assert_eq!(b.members, want);

        assert_eq!(enumerate_block(cube(0, &[0, 0]), 1).len(), 15);
    }

    #[test]
    fn block_cardinality_formula() {
        for n in 1..=3 {
            for t in 0..=6u32 {
                if n == 3 && t > 4 {
                    continue;
                }
                let b = enumerate_block(DyadicCube::origin(n, 2).unwrap(), t);
                assert_eq!(b.len(), BlockIndexSet::expected_len(n, t), "n={n} t={t}");
                let mut sorted = b.members.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), b.len());
            }
        }
    }

    #[test]
    fn window_examples() {
        let w = enumerate_window(&WindowSpec::new(1, 1, vec![vec![0]])).unwrap();
        assert_eq!(w, vec![cube(0, &[0]), cube(1, &[0]), cube(1, &[1])]);

        let w = enumerate_window(&WindowSpec::new(3, 0, vec![vec![2], vec![5]])).unwrap();
        assert_eq!(w, vec![cube(3, &[2]), cube(3, &[5])]);

        let w = enumerate_window(&WindowSpec::new(2, 2, vec![vec![0]])).unwrap();
        assert_eq!(w.len(), 7);

        assert!(enumerate_window(&WindowSpec::new(2, 2, vec![])).unwrap().is_empty());
    }

    #[test]
    fn window_volume_bounds() {
        let spec = WindowSpec::new(3, 2, vec![vec![0, 1], vec![1, 1]]);
        let n = 2;
        for q in enumerate_window(&spec).unwrap() {
            let v = q.volume();
            assert!(v >= (-(3.0 * n as f64)).exp2());
            assert!(v <= ((2.0 - 3.0) * n as f64).exp2());
        }
    }

    #[test]
    fn index_json_literal() {
        let idx = WaveletIndex::new(0b10, 3, &[5, -2]).unwrap();
        let s = serde_json::to_string(&idx).unwrap();
        assert_eq!(s, r#"{"j":3,"k":[5,-2],"eps":[0,1]}"#);
        let back: WaveletIndex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, idx);
        let bad = serde_json::from_str::<WaveletIndex>(r#"{"j":0,"k":[0],"eps":[2]}"#);
        assert!(bad.is_err());
    }
}
