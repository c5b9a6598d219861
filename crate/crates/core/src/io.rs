//! Small file-format helpers shared by the report writers.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Affine map from raw values to `[-1, 1]`, kept so images stay invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    pub offset: f64,
    pub scale: f64,
}

impl Rescale {
    /// Maps `[min, max]` onto `[-1, 1]`; constant data maps to 0.
    pub fn fit(values: &[f64]) -> Self {
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
            return Self { offset: if lo.is_finite() { lo } else { 0.0 }, scale: 1.0 };
        }
        Self { offset: 0.5 * (lo + hi), scale: 0.5 * (hi - lo) }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.offset) / self.scale
    }

    pub fn invert(&self, u: f64) -> f64 {
        u * self.scale + self.offset
    }
}

/// Binary 16-bit greyscale PGM of a row-major `width × height` array,
/// rescaled to `[-1, 1]` and then to `0..=65535`.
pub fn write_pgm16<W: Write>(values: &[f64], width: usize, height: usize, mut w: W) -> Result<Rescale> {
    if values.len() != width * height {
        return Err(Error::Precondition(format!("{} values for a {width}×{height} image", values.len())));
    }
    let rescale = Rescale::fit(values);
    write!(w, "P5\n{width} {height}\n65535\n")?;
    let mut buf = Vec::with_capacity(values.len() * 2);
    for &v in values {
        let u = rescale.apply(v).clamp(-1.0, 1.0);
        let px = ((u + 1.0) * 0.5 * 65535.0).round() as u16;
        buf.extend_from_slice(&px.to_be_bytes());
    }
    w.write_all(&buf)?;
    Ok(rescale)
}

/// Reads back a file written by [`write_pgm16`], returning values in `[-1, 1]`.
pub fn read_pgm16(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(Error::Parse(format!("unsupported PGM header {fields:?}")));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("PGM size {s}: {e}")));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = bytes.get(pos..pos + 2 * w * h).ok_or_else(|| Error::Parse("truncated PGM data".into()))?;
    let vals = data.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0 * 2.0 - 1.0).collect();
    Ok((w, h, vals))
}

pub fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create_writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes a header line and rows of numbers, formatted so that equal inputs
/// always give byte-identical files.
pub fn write_table<W: Write>(mut w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
