//! Output directory handling: files are staged in a sibling temporary
//! directory and moved into place with one rename.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;

pub const CODE_VERSION: &str = env!("CPSIM_CODE_VERSION");

pub struct Staging {
    target: PathBuf,
    dir: PathBuf,
    force: bool,
}

impl Staging {
    pub fn new(target: &Path, force: bool) -> Result<Self> {
        if target.exists() && !force {
            bail!("output directory {} exists; pass --force to replace it", target.display());
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let name = target
            .file_name()
            .with_context(|| format!("output path {} has no final component", target.display()))?;
        let dir = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            target: target.to_path_buf(),
            dir,
            force,
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn csv<T: Serialize>(&self, file: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(file)).with_context(|| format!("writing {file}"))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(file), text).with_context(|| format!("writing {file}"))
    }

    pub fn bytes(&self, file: &str, data: &[u8]) -> Result<()> {
        fs::write(self.path(file), data).with_context(|| format!("writing {file}"))
    }

    /// Moves the staged directory to the target, replacing it under `--force`.
    pub fn commit(self) -> Result<()> {
        if self.target.exists() {
            if !self.force {
                bail!("output directory {} appeared during the run", self.target.display());
            }
            fs::remove_dir_all(&self.target).with_context(|| format!("removing {}", self.target.display()))?;
        }
        fs::rename(&self.dir, &self.target).with_context(|| format!("moving output to {}", self.target.display()))
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub code_version: &'static str,
    pub files: Vec<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}
