use super::harmonics::HarmonicCoeffs;
use crate::{Complex64, Error, Result};
use std::io::{BufRead, Write};

/// Writes `n,k,re,im` rows sorted by `(n, k)`.
pub fn write_coeffs_csv<W: Write>(coeffs: &HarmonicCoeffs, mut w: W) -> Result<()> {
    writeln!(w, "n,k,re,im")?;
    for n in 0..=coeffs.lmax() {
        for k in -(n as i64)..=n as i64 {
            let v = coeffs.get(n, k);
            writeln!(w, "{n},{k},{:e},{:e}", v.re, v.im)?;
        }
    }
    Ok(())
}

/// Reads the `n,k,re,im` format. Missing entries are zero; `lmax` is the
/// largest degree present.
pub fn read_coeffs_csv<R: BufRead>(r: R) -> Result<HarmonicCoeffs> {
    let mut rows = Vec::new();
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty coefficient file".into()))??;
    if header.trim() != "n,k,re,im" {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("line {}: {line:?}", lineno + 2));
        if f.len() != 4 {
            return Err(bad());
        }
        let n: usize = f[0].parse().map_err(|_| bad())?;
        let k: i64 = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        if k.unsigned_abs() as usize > n {
            return Err(bad());
        }
        rows.push((n, k, Complex64::new(re, im)));
    }
    let lmax = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let mut out = HarmonicCoeffs::zeros(lmax);
    for (n, k, v) in rows {
        out.set(n, k, v);
    }
    Ok(out)
}
