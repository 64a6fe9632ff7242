use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wugaug::corpus::{parse_tsv, Dataset, ParseOptions};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Path and content digest of a file a command read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// A dataset loaded from disk along with its digest.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub digest: InputDigest,
}

/// File name without directories, used as the dataset label.
pub fn label_of(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_dataset(path: &Path, opts: ParseOptions) -> Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("failed to read {}", path.display()))?;
    let parsed = parse_tsv(&bytes, &label_of(path), opts)
        .with_context(|| format!("failed to parse {}", path.display()))?;
    if !parsed.skipped.is_empty() {
        log::warn!(
            "{}: skipped {} malformed line(s)",
            path.display(),
            parsed.skipped.len()
        );
    }
    Ok(Loaded {
        dataset: parsed.dataset,
        digest: InputDigest {
            path: path.to_owned(),
            sha256: sha256_hex(&bytes),
        },
    })
}

/// An output produced in memory before it is written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn new(path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) -> Self {
        OutputFile {
            path: path.into(),
            bytes: bytes.into(),
        }
    }

    pub fn digest(&self) -> OutputDigest {
        OutputDigest {
            path: self.path.clone(),
            sha256: sha256_hex(&self.bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn write_outputs(files: &[OutputFile]) -> Result<()> {
    for f in files {
        if let Some(dir) = f.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)
                .with_context(|| format!("failed to create {}", dir.display()))?;
        }
        fs::write(&f.path, &f.bytes)
            .with_context(|| format!("failed to write {}", f.path.display()))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("manifest types serialize");
    out.push(b'\n');
    out
}

/// `path` with `suffix` appended to its file name.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
