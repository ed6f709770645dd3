//! On-disk cache for character tables, keyed by group tag and field
//! descriptor, with an integrity checksum over the payload. Class data is
//! always rebuilt (it is cheap and deterministic); the cache only saves the
//! table solve.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num::bigint::BigInt;
use sha2::{Digest, Sha256};

use crate::chartab::{CharacterTable, ClassFunction};
use crate::classes::ClassData;
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};

const SCHEMA_VERSION: u32 = 1;

pub struct DiskCache {
    dir: Option<PathBuf>,
}

impl DiskCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        DiskCache { dir }
    }

    pub fn disabled() -> Self {
        DiskCache { dir: None }
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let safe: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        Some(dir.join(format!("{}.json", safe)))
    }

    /// Returns the cached table for the class data if present and intact,
    /// otherwise builds it and stores the result. Cached rows are checked
    /// against the freshly built class structure before use.
    pub fn table(
        &self,
        data: &Arc<ClassData>,
        field_desc: &serde_json::Value,
        build: impl FnOnce() -> Result<CharacterTable>,
    ) -> Result<CharacterTable> {
        let key = format!("table-{}-{}", data.group_tag, short_hash(&field_desc.to_string()));
        let class_hash = class_structure_hash(data);
        if let Some(path) = self.path_for(&key) {
            if let Some(table) = self.try_load(&path, data, &class_hash)? {
                return Ok(table);
            }
            let table = build()?;
            self.store(&path, &key, data, &class_hash, &table)?;
            return Ok(table);
        }
        build()
    }

    fn try_load(
        &self,
        path: &Path,
        data: &Arc<ClassData>,
        class_hash: &str,
    ) -> Result<Option<CharacterTable>> {
        let Ok(text) = std::fs::read_to_string(path) else { return Ok(None) };
        let Ok(doc) = serde_json::from_str::<serde_json::Value>(&text) else { return Ok(None) };
        if doc["schema"].as_u64() != Some(SCHEMA_VERSION as u64) {
            return Ok(None);
        }
        if doc["class_hash"].as_str() != Some(class_hash) {
            return Ok(None);
        }
        let Some(payload) = doc.get("payload") else { return Ok(None) };
        let checksum = doc["checksum"].as_str().unwrap_or_default();
        if short_hash(&payload.to_string()) != checksum {
            return Ok(None);
        }
        let degrees: Vec<u64> = serde_json::from_value(payload["degrees"].clone())?;
        let rows_raw: Vec<Vec<(u32, Vec<String>)>> = serde_json::from_value(payload["rows"].clone())?;
        let mut rows = Vec::with_capacity(rows_raw.len());
        for row in rows_raw {
            let values: Vec<Cyclotomic> = row
                .into_iter()
                .map(|(order, coeffs)| {
                    let ints: Vec<BigInt> = coeffs
                        .iter()
                        .map(|s| s.parse::<BigInt>().map_err(|_| Error::Invariant("bad cached integer".into())))
                        .collect::<Result<_>>()?;
                    Ok(Cyclotomic::from_integer_coeffs(order, &ints))
                })
                .collect::<Result<_>>()?;
            rows.push(ClassFunction { group_tag: data.group_tag.clone(), values });
        }
        let table = CharacterTable { data: Arc::clone(data), degrees, rows };
        // a corrupted cache must never poison results
        table.validate()?;
        Ok(Some(table))
    }

    fn store(
        &self,
        path: &Path,
        key: &str,
        data: &Arc<ClassData>,
        class_hash: &str,
        table: &CharacterTable,
    ) -> Result<()> {
        let rows: Vec<Vec<(u32, Vec<String>)>> = table
            .rows
            .iter()
            .map(|row| {
                row.values
                    .iter()
                    .map(|v| {
                        let coeffs = v
                            .integer_coeff_vector()
                            .expect("table values are algebraic integers")
                            .iter()
                            .map(|c| c.to_string())
                            .collect();
                        (v.order(), coeffs)
                    })
                    .collect()
            })
            .collect();
        let payload = serde_json::json!({
            "degrees": table.degrees,
            "rows": rows,
        });
        let doc = serde_json::json!({
            "schema": SCHEMA_VERSION,
            "key": key,
            "group": data.group_tag,
            "class_hash": class_hash,
            "checksum": short_hash(&payload.to_string()),
            "payload": payload,
        });
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        // atomic write: temp file then rename
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string(&doc)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn short_hash(s: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(s.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(12).map(|b| format!("{:02x}", b)).collect()
}

/// Digest of the class structure: sizes, centralizers and element orders in
/// class order. A cached table is only reused when this matches exactly.
fn class_structure_hash(data: &ClassData) -> String {
    let mut text = format!("{}:{}:", data.group_tag, data.order);
    for (c, o) in data.classes.iter().zip(&data.element_orders) {
        text.push_str(&format!("{},{},{};", c.size, c.centralizer, o));
    }
    short_hash(&text)
}
