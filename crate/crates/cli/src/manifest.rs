//! Dataset manifests: enough recorded inputs to regenerate every file
//! byte-for-byte, plus hashes to notice when a file no longer matches.

use std::collections::BTreeMap;
use std::path::Path;

use junction_core::layout::LayoutDocument;
use junction_core::oracle::OracleConfig;
use junction_core::scenario::GenParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub params: GenParams,
    pub count: usize,
    pub oracle: OracleConfig,
    pub layout: LayoutDocument,
    pub split: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// sha256 of the compact JSON of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub config: GenerationConfig,
    pub count: usize,
    pub positives: usize,
    pub positive_fraction: f64,
    /// File name → sha256 of its bytes.
    pub files: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_counts: Option<SplitCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(config: &GenerationConfig) -> String {
    sha256_hex(serde_json::to_string(config).expect("config serializes").as_bytes())
}

/// The manifest next to `dataset`, if there is a readable one.
pub fn sibling_manifest(dataset: &Path) -> Option<Manifest> {
    let path = dataset.parent().unwrap_or(Path::new(".")).join(MANIFEST_FILE);
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}
