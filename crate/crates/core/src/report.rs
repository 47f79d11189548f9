//! Output files: tidy CSV summaries, JSONL replicate streams and run manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::experiments::EstimateRecord;
use crate::measure::hex;

pub const CSV_HEADER: &str = "quantity,u,n,L,estimate,lo,hi,N,seed";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per record, fixed column order.
pub fn write_csv<W: Write>(records: &[EstimateRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.quantity,
            opt(r.u),
            opt(r.n),
            opt(r.l),
            r.estimate,
            r.lo,
            r.hi,
            r.replicates,
            r.seed
        )?;
    }
    Ok(())
}

pub fn csv_string(records: &[EstimateRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Writes the CSV summary to `path`.
pub fn emit_plot_data(records: &[EstimateRecord], path: &Path) -> Result<()> {
    fs::write(path, csv_string(records))?;
    Ok(())
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn emit_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    write_jsonl(items, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Content hash in git's object format (`blob <len>\0<bytes>`) over SHA-256.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex(&h.finalize())
}

/// Everything needed to reproduce the outputs of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    pub measure_digest: Option<String>,
    pub measure_file: Option<String>,
    pub measure_file_hash: Option<String>,
    pub base_seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub boundary_convention: Option<String>,
    pub forced: bool,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            measure_digest: None,
            measure_file: None,
            measure_file_hash: None,
            base_seed: None,
            parameters: serde_json::Value::Null,
            boundary_convention: None,
            forced: false,
            outputs: Vec::new(),
        }
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_pretty_json())?;
        Ok(())
    }
}
