use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qspace::norms::AlphaParam;
use qspace::{BasisSpec, Family, ScaleWindow};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Meyer,
    Daubechies,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Meyer => Family::Meyer,
            FamilyArg::Daubechies => Family::Daubechies,
        }
    }
}

/// Options shared by every subcommand. Flags win over the config file, which
/// wins over `QSPACE_SEED` and the built-in defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Wavelet family.
    #[arg(long = "basis", global = true, value_enum)]
    pub family: Option<FamilyArg>,
    /// Spatial dimension n.
    #[arg(long = "dim", global = true)]
    pub n: Option<usize>,
    /// log2 of the grid points per axis.
    #[arg(long = "points-log2", global = true)]
    pub log2_points: Option<u32>,
    /// log2 of the torus period.
    #[arg(long = "period-log2", global = true, allow_hyphen_values = true)]
    pub period_log2: Option<i32>,
    /// Daubechies vanishing moments.
    #[arg(long, global = true)]
    pub moments: Option<u32>,
    #[arg(long = "j-min", global = true, allow_hyphen_values = true)]
    pub j_min: Option<i32>,
    #[arg(long = "j-max", global = true, allow_hyphen_values = true)]
    pub j_max: Option<i32>,
    /// Reconstruction tolerance.
    #[arg(long = "recon-tol", global = true)]
    pub recon_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    basis: Option<FileBasis>,
    window: Option<FileWindow>,
    tolerances: Option<FileTolerances>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBasis {
    family: Option<FamilyArg>,
    n: Option<usize>,
    #[serde(rename = "L")]
    log2_points: Option<u32>,
    #[serde(rename = "L0")]
    period_log2: Option<i32>,
    m: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileWindow {
    j_min: Option<i32>,
    j_max: Option<i32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTolerances {
    recon: Option<f64>,
}

/// Starting point a subcommand offers before file and flag overrides.
#[derive(Clone, Copy, Debug)]
pub struct Defaults {
    pub family: Family,
    pub n: usize,
    pub log2_points: u32,
    pub period_log2: i32,
    pub moments: u32,
    pub alpha: f64,
    pub window: Option<ScaleWindow>,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            family: Family::Meyer,
            n: 1,
            log2_points: 10,
            period_log2: 0,
            moments: 4,
            alpha: 0.25,
            window: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRef {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub basis: BasisSpec,
    pub alpha: f64,
    pub window: Option<ScaleWindow>,
    pub seed: u64,
    pub recon_tol: f64,
    pub input: Option<InputRef>,
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub force: bool,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var("QSPACE_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("QSPACE_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: &str, common: &Common, defaults: Defaults) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let fb = file.basis.unwrap_or_default();
        let fw = file.window.unwrap_or_default();
        let family: Family = common
            .family
            .or(fb.family)
            .map(Family::from)
            .unwrap_or(defaults.family);
        let n = common.n.or(fb.n).unwrap_or(defaults.n);
        let l = common.log2_points.or(fb.log2_points).unwrap_or(defaults.log2_points);
        let l0 = common.period_log2.or(fb.period_log2).unwrap_or(defaults.period_log2);
        let m = common.moments.or(fb.m).unwrap_or(defaults.moments);
        let basis = match family {
            Family::Meyer => BasisSpec::meyer(n, l, l0),
            Family::Daubechies => BasisSpec::daubechies(n, m, l, l0),
        };
        let alpha = common.alpha.or(file.alpha).unwrap_or(defaults.alpha);
        AlphaParam::new(alpha, n).map_err(|e| {
            CliError::Input(format!("{e}; the Q-space scale requires 0 <= alpha <= n/2"))
        })?;
        let j_min = common.j_min.or(fw.j_min);
        let j_max = common.j_max.or(fw.j_max);
        let window = match (j_min, j_max, defaults.window) {
            (None, None, w) => w,
            (a, b, Some(w)) => Some(ScaleWindow::new(a.unwrap_or(w.j_min), b.unwrap_or(w.j_max))),
            (Some(a), Some(b), None) => Some(ScaleWindow::new(a, b)),
            _ => {
                return Err(CliError::Input(
                    "give both --j-min and --j-max, or neither".into(),
                ))
            }
        };
        let seed = match common.seed.or(file.seed) {
            Some(s) => s,
            None => seed_from_env()?.unwrap_or(0),
        };
        let recon_tol = common
            .recon_tol
            .or(file.tolerances.and_then(|t| t.recon))
            .unwrap_or(1e-8);
        if !(recon_tol > 0.0 && recon_tol.is_finite()) {
            return Err(CliError::Input(format!("reconstruction tolerance {recon_tol} must be positive")));
        }
        let jobs = common.jobs.or(file.jobs);
        if jobs == Some(0) {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        Ok(Self {
            command: command.to_string(),
            basis,
            alpha,
            window,
            seed,
            recon_tol,
            input: None,
            params: BTreeMap::new(),
            out: common.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("qspace-out")),
            force: common.force,
            jobs,
        })
    }

    pub fn with_input(mut self, path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.input = Some(InputRef {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        });
        Ok(self)
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameters serialize"),
        );
        self
    }

    pub fn fingerprint(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        sha256_hex(format!("qspace {VERSION}\n{body}").as_bytes())
    }

    pub fn header(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "qspace",
            "version": VERSION,
            "fingerprint": self.fingerprint(),
            "config": self,
        })
    }
}

/// Reads the `key=value;...` basis tag stored in coefficient files.
pub fn spec_from_tag(tag: &str) -> Option<BasisSpec> {
    let mut parts = tag.split(';');
    let family = parts.next()?;
    let kv: BTreeMap<&str, &str> = parts.filter_map(|p| p.split_once('=')).collect();
    let n = kv.get("n")?.parse().ok()?;
    let l = kv.get("L")?.parse().ok()?;
    let l0 = kv.get("L0")?.parse().ok()?;
    match family {
        "meyer" => Some(BasisSpec::meyer(n, l, l0)),
        "daubechies" => Some(BasisSpec::daubechies(n, kv.get("m")?.parse().ok()?, l, l0)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alpha = 0.1\nseed = 5\n[basis]\nfamily = \"daubechies\"\nm = 6\nL = 9\n").unwrap();
        let common = Common {
            config: Some(path),
            alpha: Some(0.3),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("norms", &common, Defaults::default()).unwrap();
        assert_eq!(cfg.alpha, 0.3);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.basis, BasisSpec::daubechies(1, 6, 9, 0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "alhpa = 0.1\n").unwrap();
        let common = Common {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve("norms", &common, Defaults::default()),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn alpha_range_names_the_bound() {
        let common = Common {
            alpha: Some(0.7),
            ..Default::default()
        };
        match RunConfig::resolve("norms", &common, Defaults::default()) {
            Err(CliError::Input(msg)) => assert!(msg.contains("n/2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fingerprint_tracks_parameters() {
        let cfg = RunConfig::resolve("norms", &Common::default(), Defaults::default()).unwrap();
        let a = cfg.fingerprint();
        assert_eq!(a, cfg.clone().fingerprint());
        assert_ne!(a, cfg.param("x", 1).fingerprint());
    }

    #[test]
    fn basis_tags_round_trip() {
        for spec in [BasisSpec::meyer(2, 7, 1), BasisSpec::daubechies(1, 4, 12, 3)] {
            let tag = qspace::Basis::build(spec).unwrap().fingerprint();
            assert_eq!(spec_from_tag(&tag), Some(spec));
        }
        assert_eq!(spec_from_tag("haar;n=1"), None);
    }
}
