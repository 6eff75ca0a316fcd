// SPDX-License-Identifier: Apache-2.0

//! Flat-file enrollment registry.
//!
//! One TOML file lists enrolled devices. Each entry points at a mask file
//! and, once a key has been generated, a helper file. Paths are stored as
//! written, relative paths resolve against the registry's directory.
//!
//! ```toml
//! format = "srampuf-registry/1"
//!
//! [[device]]
//! device_id = "sim-7"
//! mask_file = "sim-7.mask.toml"
//! mask_fingerprint = "…"
//! helper_file = "sim-7.helper.toml"
//! helper_fingerprint = "…"
//! samples = 300
//! threshold = 4
//! ...
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::enroll::Mask;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::fuzzy::HelperData;

const REGISTRY_FORMAT: &str = "srampuf-registry/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub device_id: String,
    pub mask_file: String,
    pub mask_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helper_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helper_fingerprint: Option<String>,
    pub samples: usize,
    pub threshold: u32,
    pub target_len: usize,
    pub base_offset: usize,
    pub window_length: usize,
    pub windows: usize,
    /// Seconds since the Unix epoch at enrollment.
    pub created_unix: u64,
    pub tool_version: String,
}

impl RegistryEntry {
    /// Entry for a freshly saved mask file.
    pub fn for_mask(
        mask: &Mask,
        mask_file: &str,
        mask_fingerprint: &str,
        created_unix: u64,
    ) -> Self {
        RegistryEntry {
            device_id: mask.device_id.clone(),
            mask_file: mask_file.to_string(),
            mask_fingerprint: mask_fingerprint.to_string(),
            helper_file: None,
            helper_fingerprint: None,
            samples: mask.samples,
            threshold: mask.threshold,
            target_len: mask.target_len,
            base_offset: mask.base_offset,
            window_length: mask.window_length,
            windows: mask.windows,
            created_unix,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    device: Vec<RegistryEntry>,
}

/// Entries sorted by device id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    entries: Vec<RegistryEntry>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn index(&self, device_id: &str) -> std::result::Result<usize, usize> {
        self.entries
            .binary_search_by(|e| e.device_id.as_str().cmp(device_id))
    }

    pub fn get(&self, device_id: &str) -> Result<&RegistryEntry> {
        self.index(device_id)
            .map(|i| &self.entries[i])
            .map_err(|_| Error::UnknownDevice(device_id.to_string()))
    }

    pub fn get_mut(&mut self, device_id: &str) -> Result<&mut RegistryEntry> {
        match self.index(device_id) {
            Ok(i) => Ok(&mut self.entries[i]),
            Err(_) => Err(Error::UnknownDevice(device_id.to_string())),
        }
    }

    pub fn insert(&mut self, entry: RegistryEntry) -> Result<()> {
        match self.index(&entry.device_id) {
            Ok(_) => Err(Error::DuplicateDevice(entry.device_id)),
            Err(i) => {
                self.entries.insert(i, entry);
                Ok(())
            }
        }
    }

    pub fn to_text(&self) -> String {
        fsutil::with_format_header(
            REGISTRY_FORMAT,
            &RegistryFile {
                device: self.entries.clone(),
            },
        )
    }

    /// Parse without touching referenced files.
    pub fn from_text(text: &str) -> Result<Self> {
        let file: RegistryFile =
            fsutil::parse_with_format_header("registry", REGISTRY_FORMAT, text)?;
        let mut registry = Registry::new();
        for entry in file.device {
            registry
                .insert(entry)
                .map_err(|e| Error::format("registry", e))?;
        }
        Ok(registry)
    }

    /// Parse a registry file and check that every referenced mask and
    /// helper file exists with the recorded fingerprint. A missing registry
    /// file yields an empty registry.
    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Registry::new()),
            Err(e) => return Err(e.into()),
        };
        let registry = Registry::from_text(&text)?;
        for entry in &registry.entries {
            let mask_path = resolve(path, &entry.mask_file);
            check_fingerprint(&mask_path, &entry.mask_fingerprint)?;
            match (&entry.helper_file, &entry.helper_fingerprint) {
                (Some(file), Some(fp)) => check_fingerprint(&resolve(path, file), fp)?,
                (None, None) => {}
                _ => {
                    return Err(Error::format(
                        "registry",
                        format!(
                            "{}: helper_file and helper_fingerprint go together",
                            entry.device_id
                        ),
                    ))
                }
            }
        }
        Ok(registry)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_text().as_bytes())
    }

    /// Load the mask of `device_id`, returning it with its file fingerprint.
    pub fn load_mask(&self, registry_path: &Path, device_id: &str) -> Result<(Mask, String)> {
        let entry = self.get(device_id)?;
        let (mask, fp) = Mask::load(&resolve(registry_path, &entry.mask_file))?;
        if fp != entry.mask_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: entry.mask_fingerprint.clone(),
                actual: fp,
            });
        }
        Ok((mask, fp))
    }

    /// Load the helper data of `device_id`.
    pub fn load_helper(&self, registry_path: &Path, device_id: &str) -> Result<HelperData> {
        let entry = self.get(device_id)?;
        let file = entry.helper_file.as_ref().ok_or_else(|| {
            Error::usage(format!(
                "device {device_id:?} has no helper data; run genkey first"
            ))
        })?;
        let path = resolve(registry_path, file);
        let bytes = std::fs::read(&path)?;
        let fp = fsutil::fingerprint(&bytes);
        if entry.helper_fingerprint.as_deref() != Some(fp.as_str()) {
            return Err(Error::FingerprintMismatch {
                expected: entry.helper_fingerprint.clone().unwrap_or_default(),
                actual: fp,
            });
        }
        let text = String::from_utf8(bytes).map_err(|e| Error::format("helper", e))?;
        HelperData::from_text(&text)
    }
}

/// Resolve a path stored in the registry against the registry's directory.
pub fn resolve(registry_path: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        registry_path.parent().unwrap_or(Path::new("")).join(p)
    }
}

fn check_fingerprint(path: &Path, expected: &str) -> Result<()> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::format("registry", format!("cannot read {}: {e}", path.display())))?;
    let actual = fsutil::fingerprint(&bytes);
    if actual != expected {
        return Err(Error::FingerprintMismatch {
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}
