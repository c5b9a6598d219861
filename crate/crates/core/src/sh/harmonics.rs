//! Spherical harmonics and containers for harmonic coefficients.

use super::legendre::NormalizedLegendre;
use crate::{Complex64, Error, Result};

/// Phase relating `Y_n^k` to `P̄_n^{|k|}`: `Y_n^k = s(k) P̄_n^{|k|} e^{ikφ}` with
/// `s(k) = (−1)^k` for `k ≥ 0` and `s(k) = 1` for `k < 0`.
#[inline]
pub fn order_sign(k: i64) -> f64 {
    if k >= 0 && k % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `Y_n^k(θ, φ)` including the Condon-Shortley factor `(−1)^k`.
pub fn sph_harm(n: usize, k: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let m = k.unsigned_abs() as usize;
    if m > n {
        return Err(Error::Domain(format!("order {k} exceeds degree {n}")));
    }
    let (s, c) = theta.sin_cos();
    let p = NormalizedLegendre::single(n, m, c, s);
    Ok(Complex64::from_polar(order_sign(k) * p, k as f64 * phi))
}

/// Triangular array of coefficients `f̂_{n,k}`, `0 ≤ n ≤ lmax`, `|k| ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    lmax: usize,
    values: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(lmax: usize) -> Self {
        Self { lmax, values: vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)] }
    }

    pub fn from_fn<F: FnMut(usize, i64) -> Complex64>(lmax: usize, mut f: F) -> Self {
        let mut out = Self::zeros(lmax);
        for n in 0..=lmax {
            for k in -(n as i64)..=n as i64 {
                out.values[Self::index(n, k)] = f(n, k);
            }
        }
        out
    }

    #[inline]
    pub fn index(n: usize, k: i64) -> usize {
        ((n * n + n) as i64 + k) as usize
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    pub fn get(&self, n: usize, k: i64) -> Complex64 {
        if n > self.lmax || k.unsigned_abs() as usize > n {
            return Complex64::new(0.0, 0.0);
        }
        self.values[Self::index(n, k)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, k: i64, v: Complex64) {
        assert!(n <= self.lmax && k.unsigned_abs() as usize <= n, "({n}, {k}) out of range");
        self.values[Self::index(n, k)] = v;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Degree-`n` block `f̂_{n,−n..=n}`.
    pub fn degree(&self, n: usize) -> &[Complex64] {
        &self.values[n * n..(n + 1) * (n + 1)]
    }

    pub fn degree_mut(&mut self, n: usize) -> &mut [Complex64] {
        &mut self.values[n * n..(n + 1) * (n + 1)]
    }

    /// Copy truncated or zero-padded to `lmax`.
    pub fn with_lmax(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        let n = lmax.min(self.lmax);
        let len = (n + 1) * (n + 1);
        out.values[..len].copy_from_slice(&self.values[..len]);
        out
    }

    /// `Σ |f̂_{n,k}|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn degree_energy(&self, n: usize) -> f64 {
        self.degree(n).iter().map(|v| v.norm_sqr()).sum()
    }

    /// `Σ f̂_{n,k} conj(ĝ_{n,k})` over the common degrees.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let l = self.lmax.min(other.lmax);
        let len = (l + 1) * (l + 1);
        self.values[..len]
            .iter()
            .zip(&other.values[..len])
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Largest deviation from the real-signal symmetry
    /// `f̂_{n,−k} = (−1)^k conj(f̂_{n,k})`.
    pub fn real_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..=self.lmax {
            for k in 0..=n as i64 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.get(n, -k) - self.get(n, k).conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let l = self.lmax.max(other.lmax);
        let mut worst: f64 = 0.0;
        for n in 0..=l {
            for k in -(n as i64)..=n as i64 {
                worst = worst.max((self.get(n, k) - other.get(n, k)).norm());
            }
        }
        worst
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.lmax, other.lmax);
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
    }
}
