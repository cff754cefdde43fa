//! `.meta.json` sidecars written next to every output file.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use netdiff_core::io::write_atomic;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ResultMetadata<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub seed: Option<u64>,
    pub duration_secs: f64,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_method: Option<&'static str>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn digests(paths: &[&Path]) -> Result<Vec<InputDigest>> {
    paths
        .iter()
        .map(|p| {
            let sha256 = sha256_file(p).with_context(|| format!("hashing {}", p.display()))?;
            Ok(InputDigest { path: p.display().to_string(), sha256 })
        })
        .collect()
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_sidecar<C: Serialize>(out: &Path, meta: &ResultMetadata<'_, C>) -> Result<()> {
    let json = serde_json::to_string_pretty(meta)?;
    write_atomic(sidecar_path(out), |w| {
        writeln!(w, "{json}")?;
        Ok(())
    })?;
    Ok(())
}

pub fn elapsed_secs(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e3).round() / 1e3
}

