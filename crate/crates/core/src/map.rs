//! Coefficient maps `(β, α) ↦ Ŵ(α, β, γ)` on the equiangular grid and their
//! file formats.

use crate::io::{write_pgm16, write_table, Rescale};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Grid metadata written next to a map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub m_alpha: usize,
    pub m_beta: usize,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Largest discarded imaginary part.
    pub imag_max: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rescale: Option<Rescale>,
}

/// Real parts of `Ŵ` at `α_j = jπ/M` (`j = 1..=2M`) and `β_ℓ = ℓπ/M`
/// (`ℓ = 1..=M`), stored β-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    pub m: usize,
    pub gamma: f64,
    pub k: usize,
    pub n: usize,
    pub values: Vec<f64>,
    pub imag_max: f64,
}

impl CoefficientMap {
    pub fn new(m: usize, gamma: f64, k: usize, n: usize, values: Vec<f64>, imag_max: f64) -> Result<Self> {
        if values.len() != 2 * m * m {
            return Err(Error::Validation(format!("{} values for M = {m}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite map value {v}")));
        }
        Ok(Self { m, gamma, k, n, values, imag_max })
    }

    pub fn alphas(m: usize) -> Vec<f64> {
        (1..=2 * m).map(|j| j as f64 * PI / m as f64).collect()
    }

    pub fn betas(m: usize) -> Vec<f64> {
        (1..=m).map(|l| l as f64 * PI / m as f64).collect()
    }

    pub fn width(&self) -> usize {
        2 * self.m
    }

    pub fn height(&self) -> usize {
        self.m
    }

    pub fn alpha(&self, j: usize) -> f64 {
        (j + 1) as f64 * PI / self.m as f64
    }

    pub fn beta(&self, l: usize) -> f64 {
        (l + 1) as f64 * PI / self.m as f64
    }

    /// Value at zero-based column `j` (α) and row `l` (β).
    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.values[l * self.width() + j]
    }

    pub fn meta(&self) -> MapMeta {
        MapMeta {
            m_alpha: self.width(),
            m_beta: self.height(),
            gamma: self.gamma,
            k: self.k,
            n: self.n,
            imag_max: self.imag_max,
            rescale: None,
        }
    }

    /// Long-format CSV `j,l,alpha,beta,value` with one-based grid indices.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (0..self.height()).flat_map(|l| {
            (0..self.width()).map(move |j| vec![(j + 1) as f64, (l + 1) as f64, self.alpha(j), self.beta(l), self.get(j, l)])
        });
        write_table(w, &["j", "l", "alpha", "beta", "value"], rows)
    }

    pub fn read_csv<R: BufRead>(r: R, meta: &MapMeta) -> Result<Self> {
        let m = meta.m_beta;
        let mut values = vec![f64::NAN; 2 * m * m];
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "j,l,alpha,beta,value" {
                    return Err(Error::Parse(format!("unexpected map header {line:?}")));
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", i + 1)));
            }
            let idx = |s: &str| s.parse::<f64>().map(|v| v as usize).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)));
            let (j, l) = (idx(f[0])?, idx(f[1])?);
            if j == 0 || l == 0 || j > 2 * m || l > m {
                return Err(Error::Parse(format!("line {}: index ({j}, {l}) out of range", i + 1)));
            }
            values[(l - 1) * 2 * m + j - 1] = f[4].parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Self::new(m, meta.gamma, meta.k, meta.n, values, meta.imag_max)
    }

    /// 16-bit PGM with α along rows and β down columns.
    pub fn write_pgm<W: Write>(&self, w: W) -> Result<Rescale> {
        write_pgm16(&self.values, self.width(), self.height(), w)
    }

    /// Magnitudes in descending order.
    pub fn sorted_magnitudes(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }

    pub fn write_sorted_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.sorted_magnitudes().into_iter().enumerate().map(|(i, v)| vec![(i + 1) as f64, v]);
        write_table(w, &["rank", "magnitude"], rows)
    }
}

/// `q`-quantile of `|values|` by the nearest-rank rule.
pub fn magnitude_quantile(values: &[f64], q: f64) -> f64 {
    let mut m: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    m.sort_by(f64::total_cmp);
    if m.is_empty() {
        return f64::NAN;
    }
    let rank = (q.clamp(0.0, 1.0) * m.len() as f64).ceil().max(1.0) as usize;
    m[rank - 1]
}
