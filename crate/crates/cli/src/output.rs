use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Output directory guard. Every file a command intends to write is claimed up
/// front so a run either writes all of its outputs or none of them.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn claim(dir: &Path, names: &[&str], force: bool) -> Result<Self, CliError> {
        if !force {
            let taken: Vec<String> = names
                .iter()
                .map(|n| dir.join(n))
                .filter(|p| p.exists())
                .map(|p| p.display().to_string())
                .collect();
            if !taken.is_empty() {
                return Err(CliError::Input(format!(
                    "refusing to overwrite {} (pass --force)",
                    taken.join(", ")
                )));
            }
        }
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
        self.written.push(p);
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s)
    }

    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Python script plotting `y` against `x` columns of a CSV with matplotlib.
pub fn plot_script(csv: &str, x: &str, ys: &[&str], title: &str, png: &str) -> String {
    let cols: Vec<String> = ys.iter().map(|y| format!("{y:?}")).collect();
    format!(
        r#"#!/usr/bin/env python3
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, {csv:?})) as fh:
    rows = list(csv.DictReader(fh))

fig, ax = plt.subplots()
for col in [{cols}]:
    ax.plot([float(r[{x:?}]) for r in rows], [float(r[col]) for r in rows], "o-", label=col)
ax.set_xlabel({x:?})
ax.set_title({title:?})
ax.legend()
fig.savefig(os.path.join(here, {png:?}), dpi=150)
"#,
        cols = cols.join(", ")
    )
}
