//! Real samples on a periodic dyadic grid.
//!
//! The torus is `[0, 2^period_log2)^n` sampled with `2^log2_points` points per
//! axis. Samples are stored row-major: axis 0 varies slowest.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dyadic::{check_dim, DyadicCube};
use crate::error::{QspaceError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub log2_points: u32,
    pub period_log2: i32,
}

impl GridSpec {
    pub fn new(n: usize, log2_points: u32, period_log2: i32) -> Result<Self> {
        check_dim(n)?;
        if log2_points as usize * n > 40 {
            return Err(QspaceError::Parameter(format!(
                "grid of 2^{log2_points} points per axis in dimension {n} is too large"
            )));
        }
        Ok(Self {
            n,
            log2_points,
            period_log2,
        })
    }

    pub fn points_per_axis(&self) -> usize {
        1usize << self.log2_points
    }

    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        (self.period_log2 as f64).exp2()
    }

    /// Grid spacing `h = P / N`.
    pub fn spacing(&self) -> f64 {
        ((self.period_log2 - self.log2_points as i32) as f64).exp2()
    }

    /// Volume element `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Scale whose dyadic cubes coincide with grid cells.
    pub fn cell_scale(&self) -> i32 {
        self.log2_points as i32 - self.period_log2
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let npts = self.points_per_axis();
        let mut out = vec![0; self.n];
        for s in (0..self.n).rev() {
            out[s] = p % npts;
            p /= npts;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let npts = self.points_per_axis();
        idx.iter().fold(0, |acc, &i| acc * npts + i)
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(p).iter().map(|&i| i as f64 * h).collect()
    }

    /// Flat indices of grid points inside the half-open cube `[2^-j k, 2^-j (k+1))^n`.
    pub fn points_in_cube(&self, cube: &DyadicCube) -> Result<Vec<usize>> {
        if cube.dim() != self.n {
            return Err(QspaceError::Shape(format!(
                "cube dimension {} on a {}-dimensional grid",
                cube.dim(),
                self.n
            )));
        }
        let shift = self.cell_scale() - cube.j;
        if shift < 0 {
            return Err(QspaceError::Unresolvable {
                j: cube.j,
                k: cube.k().to_vec(),
                reason: format!("finer than the grid cell scale {}", self.cell_scale()),
            });
        }
        if cube.j < -self.period_log2 {
            return Err(QspaceError::Unresolvable {
                j: cube.j,
                k: cube.k().to_vec(),
                reason: "larger than the torus".into(),
            });
        }
        let per = 1usize << shift;
        let npts = self.points_per_axis() as i64;
        let starts: Vec<i64> = cube.k().iter().map(|&k| k * per as i64).collect();
        let mut out = Vec::with_capacity(per.pow(self.n as u32));
        let mut v = vec![0usize; self.n];
        loop {
            let idx: Vec<usize> = starts
                .iter()
                .zip(&v)
                .map(|(&st, &o)| (st + o as i64).rem_euclid(npts) as usize)
                .collect();
            out.push(self.flat_index(&idx));
            let mut s = self.n;
            loop {
                if s == 0 {
                    return Ok(out);
                }
                s -= 1;
                v[s] += 1;
                if v[s] < per {
                    break;
                }
                v[s] = 0;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    #[serde(rename = "L")]
    log2_points: u32,
    period: f64,
    ordering: String,
}

impl GridFunction {
    pub fn new(spec: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(QspaceError::Shape(format!(
                "expected {} samples, got {}",
                spec.len(),
                samples.len()
            )));
        }
        if let Some(p) = samples.iter().position(|v| !v.is_finite()) {
            return Err(QspaceError::Numeric(format!("non-finite sample at index {p}")));
        }
        Ok(Self { spec, samples })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            samples: vec![0.0; spec.len()],
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples = (0..spec.len()).map(|p| f(&spec.coords(p))).collect();
        Self { spec, samples }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn l1_norm(&self) -> f64 {
        self.spec.cell_volume() * self.samples.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid quadrature `h^n Σ f g`.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        self.spec.cell_volume()
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            spec: self.spec,
            samples: self.samples.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add_scaled(&mut self, a: f64, other: &GridFunction) {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        for (x, y) in self.samples.iter_mut().zip(&other.samples) {
            *x += a * y;
        }
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sidecar_path(data: &Path) -> PathBuf {
        let mut s = data.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes little-endian doubles to `path` and the JSON sidecar next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * self.samples.len());
        for v in &self.samples {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&bytes)?;
        let side = Sidecar {
            n: self.spec.n,
            log2_points: self.spec.log2_points,
            period: self.spec.period(),
            ordering: "row-major".into(),
        };
        fs::write(Self::sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(Self::sidecar_path(path))?)?;
        if side.ordering != "row-major" {
            return Err(QspaceError::Format(format!(
                "unsupported sample ordering {:?}",
                side.ordering
            )));
        }
        let period_log2 = side.period.log2();
        if !(period_log2.fract() == 0.0 && period_log2.abs() < 64.0) {
            return Err(QspaceError::Format(format!(
                "period {} is not a power of two",
                side.period
            )));
        }
        let spec = GridSpec::new(side.n, side.log2_points, period_log2 as i32)?;
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * spec.len() {
            return Err(QspaceError::Format(format!(
                "binary holds {} bytes, sidecar implies {}",
                bytes.len(),
                8 * spec.len()
            )));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        GridFunction::new(spec, samples).map_err(|e| QspaceError::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_points_and_spacing() {
        let g = GridSpec::new(1, 4, 0).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        let pts = g.points_in_cube(&DyadicCube::new(1, &[1]).unwrap()).unwrap();
        assert_eq!(pts, (8..16).collect::<Vec<_>>());
        assert!(g.points_in_cube(&DyadicCube::new(5, &[0]).unwrap()).is_err());
        assert!(g.points_in_cube(&DyadicCube::new(-1, &[0]).unwrap()).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let spec = GridSpec::new(2, 3, 1).unwrap();
        let f = GridFunction::from_fn(spec, |x| x[0] - 2.0 * x[1]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        f.write(&path).unwrap();
        let back = GridFunction::read(&path).unwrap();
        assert_eq!(back, f);
        let side = fs::read_to_string(GridFunction::sidecar_path(&path)).unwrap();
        assert!(side.contains("row-major"));
    }

    #[test]
    fn rejects_truncated_binary() {
        let spec = GridSpec::new(1, 3, 0).unwrap();
        let f = GridFunction::zeros(spec);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        f.write(&path).unwrap();
        fs::write(&path, [0u8; 12]).unwrap();
        assert!(matches!(GridFunction::read(&path), Err(QspaceError::Format(_))));
    }
}
