//! Provenance for pipeline outputs: SHA-256 fingerprints, subspace files and
//! run manifests.
//!
//! Every command writes `<output>.manifest.json` next to its primary output.
//! JSON outputs name their manifest in a `manifest` field; `.vec` outputs are
//! tied to it by the file name. `created_at` is the only field that varies
//! between identical runs.

use std::fs::{self, File};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use debias_embed_core::debias::{DebiasConfig, Variant};
use debias_embed_core::lexicon::GenderPair;
use debias_embed_core::subspace::{BiasSubspace, Method};
use debias_embed_core::{EmbeddingSpace, Warning};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hash of the language tag, dimension, vocabulary and the exact bits of every value.
pub fn space_fingerprint(space: &EmbeddingSpace) -> String {
    let mut h = Sha256::new();
    h.update(space.language_tag().as_bytes());
    h.update(b"\n");
    h.update((space.dim() as u64).to_le_bytes());
    for (word, row) in space.rows() {
        h.update(word.as_bytes());
        h.update(b"\n");
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Hash of `language<TAB>male<TAB>female` lines in the given order.
pub fn pairs_fingerprint(pairs: &[GenderPair]) -> String {
    let mut h = Sha256::new();
    for p in pairs {
        h.update(format!("{}\t{}\t{}\n", p.language, p.male, p.female).as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn bytes_fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_fingerprint(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// File name of the manifest, as referenced from JSON outputs.
pub fn manifest_name(output: &Path) -> String {
    manifest_path(output)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Pretty JSON with a trailing newline; key order follows the value.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(path, format!("cannot serialize: {e}")))?;
    text.push('\n');
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Serialized bias subspace with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub method: Method,
    pub k: usize,
    pub seed: u64,
    pub variant: Variant,
    pub center: bool,
    /// Unit basis vectors, full precision.
    pub basis: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    pub orientation_labels: Vec<String>,
    pub embedding_sha256: String,
    pub pairs_sha256: String,
    pub pairs: Vec<GenderPair>,
    pub manifest: String,
}

impl SubspaceFile {
    pub fn new(
        subspace: &BiasSubspace,
        config: &DebiasConfig,
        source: &EmbeddingSpace,
        pairs: &[GenderPair],
        manifest: String,
    ) -> Self {
        SubspaceFile {
            method: subspace.method,
            k: subspace.k(),
            seed: config.seed,
            variant: config.variant,
            center: config.center,
            basis: subspace.basis.clone(),
            scores: subspace.scores.clone(),
            orientation_labels: subspace.orientation_labels.clone(),
            embedding_sha256: space_fingerprint(source),
            pairs_sha256: pairs_fingerprint(pairs),
            pairs: pairs.to_vec(),
            manifest,
        }
    }

    /// Rebuilds the subspace, re-checking orthonormality.
    pub fn subspace(&self) -> Result<BiasSubspace> {
        let mut s = BiasSubspace::from_basis(self.method, self.basis.clone(), self.scores.clone())?;
        s.orientation_labels = self.orientation_labels.clone();
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(role: &str, path: &Path) -> Result<Self> {
        Ok(FileRecord {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: file_fingerprint(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    /// Resolved options after merging the config file and flags.
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub warnings: Vec<Warning>,
    /// Unix seconds; the only field that differs between identical runs.
    pub created_at: u64,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], config: Value, seed: Option<u64>) -> Self {
        RunManifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            args: args.to_vec(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(FileRecord::of(role, path)?);
        Ok(())
    }

    /// Records an input that is not a file on disk, such as the bundled lexicon.
    pub fn input_bytes(&mut self, role: &str, name: &str, bytes: &[u8]) {
        self.inputs.push(FileRecord {
            role: role.to_string(),
            path: name.to_string(),
            sha256: bytes_fingerprint(bytes),
        });
    }

    pub fn output(&mut self, role: &str, path: &Path) -> Result<()> {
        self.outputs.push(FileRecord::of(role, path)?);
        Ok(())
    }

    /// Writes the manifest next to `primary` and returns its path.
    pub fn write_for(&self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        write_json(&path, self)?;
        Ok(path)
    }
}
