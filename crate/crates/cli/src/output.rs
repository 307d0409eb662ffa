//! Atomic output files, CSV number formatting, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits: enough for a lossless f64 round trip, '.' decimal,
/// no separators.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Writes through a temp file in the same directory and renames, so readers
/// never observe partial output.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    fs::write(&tmp, contents)
        .with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

/// Every run echoes its fully resolved configuration next to the output.
#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: &'static str,
    pub config: C,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: String,
    pub out: String,
    pub version: &'static str,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_manifest<C: Serialize>(out: &Path, manifest: &Manifest<C>) -> Result<()> {
    write_json(&manifest_path(out), manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_round_trips() {
        for &x in &[
            0.25,
            1.0 / 3.0,
            0.20788,
            6.62607015e-34,
            -1.7976931348623157e308,
        ] {
            let s = fmt_f64(x);
            assert!(!s.contains(','));
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
