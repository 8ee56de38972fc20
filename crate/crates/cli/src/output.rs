use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Files staged in the output directory and renamed into place together.
///
/// Nothing is visible under the final names until [`Staged::commit`] runs, so a failed
/// run leaves no partial outputs behind.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(tempfile::NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn add(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let mut tmp = tempfile::Builder::new()
            .prefix(".diraclab-")
            .tempfile_in(&self.dir)
            .with_context(|| format!("creating a temporary file in {}", self.dir.display()))?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        let target = self.dir.join(name);
        self.files.push((tmp, target.clone()));
        Ok(target)
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for (tmp, target) in self.files {
            tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
            out.push(target);
        }
        Ok(out)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}
