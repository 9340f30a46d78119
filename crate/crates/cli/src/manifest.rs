use std::path::{Path, PathBuf};

use anh_spectra::hmetric::SampleConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::RunArgs;
use crate::commands::Outputs;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to rerun a command: tool version, subcommand and the
/// flags as given (after merging the config file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunArgs,
    /// Sampling seed in effect; only the metric checks draw samples.
    pub seed: u64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes every output under `dir`, then the manifest listing their hashes.
pub fn write_outputs(dir: &Path, command: &str, config: &RunArgs, outputs: &Outputs) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(outputs.files.len());
    for a in &outputs.files {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, &a.bytes)?;
        entries.push(OutputEntry {
            file: a.name.clone(),
            sha256: sha256_hex(&a.bytes),
            bytes: a.bytes.len(),
        });
    }
    let manifest = Manifest {
        tool: "anh-spectra".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: config.clone(),
        seed: config.seed.unwrap_or(SampleConfig::default().seed),
        outputs: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("bad manifest {}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize)]
pub struct FileComparison {
    pub file: String,
    pub expected: String,
    pub actual: Option<String>,
    pub identical: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub command: String,
    pub recorded_version: String,
    pub identical: bool,
    pub files: Vec<FileComparison>,
}

pub fn compare(original: &Manifest, rerun: &Manifest) -> Vec<FileComparison> {
    original
        .outputs
        .iter()
        .map(|o| {
            let actual = rerun.outputs.iter().find(|r| r.file == o.file).map(|r| r.sha256.clone());
            FileComparison {
                file: o.file.clone(),
                expected: o.sha256.clone(),
                identical: actual.as_deref() == Some(o.sha256.as_str()),
                actual,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
