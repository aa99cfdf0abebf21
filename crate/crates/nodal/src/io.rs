//! Reading documents and writing artifacts atomically.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::schema::{self, SchemaKind};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: Some(path.to_path_buf()),
        errors: vec![e.to_string()],
    })
}

/// Reads a document, validates it against its schema and deserializes it.
pub fn read_document<T: DeserializeOwned>(path: &Path, kind: SchemaKind) -> Result<T> {
    let value = read_value(path)?;
    schema::validate(kind, &value).map_err(|errors| CliError::Schema {
        path: Some(path.to_path_buf()),
        errors,
    })?;
    serde_json::from_value(value).map_err(|e| CliError::Schema {
        path: Some(path.to_path_buf()),
        errors: vec![e.to_string()],
    })
}
