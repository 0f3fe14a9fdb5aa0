//! Grid function files: a JSON header next to a flat little-endian `c128` array, and CSV export.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, GridSpecFile};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Header {
    pub spec: GridSpecFile,
    pub dtype: String,
    pub order: String,
    /// File name of the binary payload, relative to the header.
    pub data: String,
}

fn payload_path(header: &Path) -> PathBuf {
    header.with_extension("bin")
}

/// Writes `<path>` (JSON header) and `<path>` with extension `.bin` (payload).
pub fn save(f: &GridFunction, path: &Path) -> Result<()> {
    let bin = payload_path(path);
    let name = bin
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Format(format!("bad file name {}", path.display())))?
        .to_string();
    let header = Header {
        spec: f.spec().to_file(),
        dtype: "c128".into(),
        order: "row-major".into(),
        data: name,
    };
    fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
    let mut bytes = Vec::with_capacity(16 * f.values().len());
    for v in f.values() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(bin, bytes)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GridFunction> {
    let header: Header = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.dtype != "c128" || header.order != "row-major" {
        return Err(Error::Format(format!(
            "unsupported layout {}/{}",
            header.dtype, header.order
        )));
    }
    let spec = Arc::new(GridSpec::from_file(&header.spec)?);
    let dir = path.parent().unwrap_or(Path::new("."));
    let bytes = fs::read(dir.join(&header.data))?;
    if bytes.len() != 16 * spec.len() {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            16 * spec.len()
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    GridFunction::new(spec, values)
}

/// One row per node: coordinates, then `re`, `im`.
pub fn write_csv(f: &GridFunction, path: &Path) -> Result<()> {
    let spec = f.spec();
    let mut w = BufWriter::new(fs::File::create(path)?);
    let axes: Vec<String> = (0..spec.dim()).map(|i| format!("x{}", i + 1)).collect();
    writeln!(w, "{},re,im", axes.join(","))?;
    let mut x = vec![0.0; spec.dim()];
    for (k, v) in f.values().iter().enumerate() {
        spec.node_into(k, &mut x);
        for c in &x {
            write!(w, "{c:.12e},")?;
        }
        writeln!(w, "{:.12e},{:.12e}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}
