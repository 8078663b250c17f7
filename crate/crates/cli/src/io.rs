//! Output files: CSV with an embedded config hash, JSON documents, and the
//! skip-if-up-to-date logic.
//!
//! Every file starts with (or contains) the hash of the configuration that
//! produced it. Re-running a command against an unchanged configuration
//! leaves existing outputs untouched unless `--force` is given. Floats are
//! written with Rust's shortest round-trip formatting, so values survive a
//! parse-print cycle exactly.

use std::fs;
use std::path::Path;

use crate::CliResult;

/// First line of every CSV output.
fn hash_line(hash: &str) -> String {
    format!("# config_hash = {hash}\n")
}

/// True when `path` exists and already carries `hash` (CSV comment line or
/// JSON `config_hash` field).
pub fn is_up_to_date(path: &Path, hash: &str) -> bool {
    let Ok(text) = fs::read_to_string(path) else {
        return false;
    };
    if let Some(first) = text.lines().next() {
        if first.trim() == format!("# config_hash = {hash}") {
            return true;
        }
    }
    if path.extension().is_some_and(|e| e == "json") {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
            return v.get("config_hash").and_then(|h| h.as_str()) == Some(hash);
        }
    }
    false
}

/// Write a CSV file: hash comment, header row, then one row per record.
pub fn write_csv(
    path: &Path,
    hash: &str,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> CliResult<()> {
    let mut out = hash_line(hash);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a JSON document, injecting the config hash as a top-level field.
pub fn write_json(path: &Path, hash: &str, mut value: serde_json::Value) -> CliResult<()> {
    if let Some(map) = value.as_object_mut() {
        map.insert("config_hash".into(), serde_json::Value::String(hash.into()));
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(&value)?)?;
    Ok(())
}
