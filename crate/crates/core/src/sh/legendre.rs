//! Legendre polynomials and associated Legendre functions.
//!
//! [`legendre`] and [`assoc_legendre`] follow the textbook definitions
//! (`P_n^k = (1 − x²)^{k/2} dᵏ/dxᵏ P_n`, no Condon-Shortley phase). Harmonic
//! transforms use [`NormalizedLegendre`], which evaluates
//! `√((2n+1)/(4π) (n−k)!/(n+k)!) P_n^k` directly by a stable recurrence so
//! that no factorial is ever formed.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Largest degree for which [`assoc_legendre`] forms the factorial ratios.
pub const RAW_MAX_DEGREE: usize = 30;

/// `P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(n, x))
}

pub(crate) fn legendre_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_n(x)` for all `n ≤ nmax`.
pub fn legendre_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax >= 1 {
        out.push(x);
    }
    for k in 2..=nmax {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

/// Unnormalised associated Legendre function `P_n^k(x)` for `n ≤ 30`.
///
/// Negative orders use `P_n^{-k} = (−1)^k (n−k)!/(n+k)! P_n^k`; `|k| > n`
/// gives zero.
pub fn assoc_legendre(n: usize, k: i64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    if n > RAW_MAX_DEGREE {
        return Err(Error::Domain(format!(
            "unnormalised P_n^k limited to n ≤ {RAW_MAX_DEGREE}, got {n}"
        )));
    }
    let m = k.unsigned_abs() as usize;
    if m > n {
        return Ok(0.0);
    }
    let ratio = factorial_ratio(n, m);
    let s = (1.0 - x * x).sqrt();
    let norm = ((2 * n + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let raw = NormalizedLegendre::single(n, m, x, s) / norm;
    if k >= 0 {
        Ok(raw)
    } else {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * ratio * raw)
    }
}

/// `(n − m)! / (n + m)!`.
fn factorial_ratio(n: usize, m: usize) -> f64 {
    ((n - m + 1)..=(n + m)).fold(1.0, |acc, j| acc / j as f64)
}

#[inline]
pub(crate) fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Recurrence tables for the fully normalised functions
/// `P̄_n^m(x) = √((2n+1)/(4π) (n−m)!/(n+m)!) P_n^m(x)`, `0 ≤ m ≤ n ≤ lmax`.
#[derive(Debug, Clone)]
pub struct NormalizedLegendre {
    lmax: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    diag: Vec<f64>,
}

impl NormalizedLegendre {
    pub fn new(lmax: usize) -> Self {
        let size = tri(lmax, lmax) + 1;
        let mut a = vec![0.0; size];
        let mut b = vec![0.0; size];
        for n in 2..=lmax {
            let nf = n as f64;
            for m in 0..=(n - 2) {
                let mf = m as f64;
                a[tri(n, m)] = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let n1 = nf - 1.0;
                b[tri(n, m)] = ((n1 * n1 - mf * mf) / (4.0 * n1 * n1 - 1.0)).sqrt();
            }
        }
        let diag = (0..=lmax)
            .map(|m| if m == 0 { 0.0 } else { ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() })
            .collect();
        Self { lmax, a, b, diag }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Sectoral values `P̄_m^m` for `m ≤ mmax` at `x = cos θ`, given `sin θ`.
    pub fn sectoral(&self, mmax: usize, sin_theta: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(mmax + 1);
        out.push(0.5 / PI.sqrt());
        for m in 1..=mmax {
            let prev = out[m - 1];
            out.push(self.diag[m] * sin_theta * prev);
        }
        out
    }

    /// Runs the degree recurrence for fixed order `m`, writing
    /// `P̄_n^m(x)` for `n = m..=lmax` into `out[n - m]`.
    pub fn column(&self, m: usize, x: f64, sectoral: f64, out: &mut [f64]) {
        let len = self.lmax + 1 - m;
        debug_assert!(out.len() >= len);
        out[0] = sectoral;
        if len > 1 {
            out[1] = ((2 * m + 3) as f64).sqrt() * x * sectoral;
        }
        for i in 2..len {
            let n = m + i;
            let t = tri(n, m);
            out[i] = self.a[t] * (x * out[i - 1] - self.b[t] * out[i - 2]);
        }
    }

    /// Fills `out[tri(n, m)]` with `P̄_n^m(cos θ)` for all `m ≤ min(n, mmax)`.
    /// Entries with `m > mmax` are left untouched.
    pub fn fill(&self, cos_theta: f64, sin_theta: f64, mmax: usize, out: &mut [f64]) {
        let mmax = mmax.min(self.lmax);
        let sect = self.sectoral(mmax, sin_theta);
        let mut col = vec![0.0; self.lmax + 1];
        for m in 0..=mmax {
            self.column(m, cos_theta, sect[m], &mut col);
            for n in m..=self.lmax {
                out[tri(n, m)] = col[n - m];
            }
        }
    }

    /// Adds `Σ_i w_i P̄_n^m(x_i)` to `out[tri(n, m)]` for every `n, m`.
    ///
    /// The recurrence runs across all nodes at once, so the inner loop has no
    /// carried dependency.
    pub fn accumulate_weighted(&self, xs: &[f64], ws: &[f64], out: &mut [f64]) {
        let sects: Vec<Vec<f64>> = xs.iter().map(|x| self.sectoral(self.lmax, (1.0 - x * x).max(0.0).sqrt())).collect();
        let mut prev = vec![0.0; xs.len()];
        let mut cur = vec![0.0; xs.len()];
        for m in 0..=self.lmax {
            for (c, s) in cur.iter_mut().zip(&sects) {
                *c = s[m];
            }
            out[tri(m, m)] += dot(ws, &cur);
            if m == self.lmax {
                break;
            }
            let f = ((2 * m + 3) as f64).sqrt();
            for ((p, c), x) in prev.iter_mut().zip(cur.iter_mut()).zip(xs) {
                *p = *c;
                *c *= f * x;
            }
            out[tri(m + 1, m)] += dot(ws, &cur);
            for n in m + 2..=self.lmax {
                let t = tri(n, m);
                let (a, b) = (self.a[t], self.b[t]);
                for ((p, c), x) in prev.iter_mut().zip(cur.iter_mut()).zip(xs) {
                    let next = a * (x * *c - b * *p);
                    *p = *c;
                    *c = next;
                }
                out[t] += dot(ws, &cur);
            }
        }
    }

    /// One value `P̄_n^m(x)`, `sin_theta = √(1 − x²)`.
    pub fn single(n: usize, m: usize, x: f64, sin_theta: f64) -> f64 {
        let table = NormalizedLegendre::new(n);
        let sect = table.sectoral(m, sin_theta);
        let mut col = vec![0.0; n + 1 - m];
        table.column(m, x, sect[m], &mut col);
        col[n - m]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
