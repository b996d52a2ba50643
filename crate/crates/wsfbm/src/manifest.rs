//! Run manifests: what was run, with which resolved configuration, and what it wrote.

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &serde_json::Value, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            config_digest: config_digest(config),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        crate::output::write_json(&path, self)?;
        Ok(path)
    }
}

/// Object keys are sorted by `serde_json`, so equal configurations hash equally.
pub fn config_digest(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values serialize");
    let hash = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for byte in hash.iter() {
        write!(hex, "{byte:02x}").expect("writing to a String");
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_key_order() {
        let a = json!({"a": 1, "b": [1.5, 2]});
        let b: serde_json::Value = serde_json::from_str(r#"{"b": [1.5, 2], "a": 1}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 64);
        assert_ne!(config_digest(&a), config_digest(&json!({"a": 2, "b": [1.5, 2]})));
    }

    #[test]
    fn empty_object_digest() {
        // sha256("{}")
        assert_eq!(
            config_digest(&json!({})),
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
    }
}
