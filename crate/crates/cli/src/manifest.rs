//! Run manifests: a sorted-key JSON record of the configuration, its hash,
//! the files produced and headline results.

use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::AppError;
use crate::io::write_atomic;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical (sorted-key, compact) serialization.
pub fn config_hash(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("JSON values always serialize");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest(command: &str, config: &Value, files: &[String], results: Value) -> Value {
    json!({
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "files": files,
        "results": results,
        "tool_version": TOOL_VERSION,
    })
}

pub fn write_manifest(dir: &Path, manifest: &Value) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(manifest).expect("JSON values always serialize");
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Option<Value> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}
