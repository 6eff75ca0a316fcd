// SPDX-License-Identifier: Apache-2.0

//! Shared plumbing for the on-disk text formats.
//!
//! Every structured file is TOML whose first line names the format and
//! version, e.g. `format = "srampuf-mask/1"`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub(crate) fn with_format_header<T: Serialize>(format: &str, value: &T) -> String {
    let body = toml::to_string(value).expect("file types serialise to TOML");
    format!("format = \"{format}\"\n{body}")
}

pub(crate) fn parse_with_format_header<T: DeserializeOwned>(
    kind: &'static str,
    format: &str,
    text: &str,
) -> Result<T> {
    let mut table: toml::Table = text.parse().map_err(|e| Error::format(kind, e))?;
    match table.remove("format") {
        Some(toml::Value::String(f)) if f == format => {}
        Some(other) => {
            return Err(Error::format(kind, format!("unsupported format {other}")));
        }
        None => return Err(Error::format(kind, "missing format line")),
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::format(kind, e))
}

/// Lowercase hex SHA-256.
pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write to a sibling temp file, sync, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
