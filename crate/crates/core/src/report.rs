//! Report assembly: every suite emits JSON with an embedded field header so
//! results are reproducible bit-for-bit, plus text and CSV renderings.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

/// Wraps a suite payload with the field descriptor header.
pub fn with_header(field: Value, suite: &str, payload: Value) -> Value {
    json!({
        "suite": suite,
        "field": field,
        "report": payload,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Append-only JSON-lines audit log.
pub fn append_jsonl(path: &Path, lines: &[Value]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    for line in lines {
        writeln!(f, "{}", serde_json::to_string(line)?)?;
    }
    Ok(())
}

/// Flat CSV for sweep-style payloads: arrays of homogeneous objects.
pub fn to_csv(rows: &[Value]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else { return out };
    let Some(obj) = first.as_object() else { return out };
    let headers: Vec<&String> = obj.keys().collect();
    out.push_str(&headers.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = headers
            .iter()
            .map(|h| {
                let v = &row[h.as_str()];
                match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
