//! Report plumbing: every JSON artifact carries its volatile data (the wall
//! clock) inside a single `meta` key so reruns stay byte-comparable.

use calogero::Error;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub fn meta() -> serde_json::Value {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    serde_json::json!({ "timestamp": now })
}

pub fn write_json(path: &Path, body: &serde_json::Value) -> calogero::Result<()> {
    let mut text = serde_json::to_string_pretty(body)
        .map_err(|e| Error::Config(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Config(format!("write {}: {e}", path.display())))
}
