//! Forward and inverse spherical-harmonic transforms by direct summation
//! (FFT along each latitude row, Legendre recurrence across rows).

use super::grid::QuadratureGrid;
use super::harmonics::{order_sign, HarmonicCoeffs};
use super::legendre::{tri, NormalizedLegendre};
use crate::{par, Complex64, Error, Result};
use rustfft::FftPlanner;

/// Quadrature of `⟨f, Y_n^k⟩` for `n ≤ lmax` from grid samples.
///
/// The grid must be exact to degree `2·lmax`; for band-limited signals the
/// transform then inverts [`synthesize`] to rounding.
pub fn sht_forward(grid: &QuadratureGrid, samples: &[Complex64], lmax: usize) -> Result<HarmonicCoeffs> {
    if grid.degree() < 2 * lmax {
        return Err(Error::Precondition(format!(
            "grid degree {} below 2·lmax = {}",
            grid.degree(),
            2 * lmax
        )));
    }
    if samples.len() != grid.len() {
        return Err(Error::Precondition(format!(
            "{} samples for a grid of {} points",
            samples.len(),
            grid.len()
        )));
    }
    let n_phi = grid.n_phi();
    let n_theta = grid.n_theta();
    let width = 2 * lmax + 1;

    // row spectra F_i(k) = Σ_j f_ij e^{-ikφ_j}, k = −lmax..=lmax
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_phi);
    let spectra: Vec<Vec<Complex64>> = par::map_range(n_theta, |i| {
        let mut row = samples[i * n_phi..(i + 1) * n_phi].to_vec();
        fft.process(&mut row);
        let scale = grid.area_weight(i);
        (0..width)
            .map(|idx| {
                let k = idx as i64 - lmax as i64;
                row[k.rem_euclid(n_phi as i64) as usize] * scale
            })
            .collect()
    });

    let table = NormalizedLegendre::new(lmax);
    let sectorals: Vec<Vec<f64>> =
        par::map_range(n_theta, |i| table.sectoral(lmax, grid.sin_theta(i)));

    // one task per order m, accumulating both ±m
    let per_order: Vec<(Vec<Complex64>, Vec<Complex64>)> = par::map_range(lmax + 1, |m| {
        let len = lmax + 1 - m;
        let mut pos = vec![Complex64::new(0.0, 0.0); len];
        let mut neg = vec![Complex64::new(0.0, 0.0); len];
        let mut col = vec![0.0; len];
        for i in 0..n_theta {
            table.column(m, grid.cos_theta(i), sectorals[i][m], &mut col);
            let fp = spectra[i][lmax + m];
            let fm = spectra[i][lmax - m];
            for (t, &p) in col.iter().enumerate() {
                pos[t] += fp * p;
                neg[t] += fm * p;
            }
        }
        (pos, neg)
    });

    let mut out = HarmonicCoeffs::zeros(lmax);
    for (m, (pos, neg)) in per_order.into_iter().enumerate() {
        let mi = m as i64;
        for (t, (p, q)) in pos.into_iter().zip(neg).enumerate() {
            let n = m + t;
            out.set(n, mi, p * order_sign(mi));
            if m > 0 {
                out.set(n, -mi, q * order_sign(-mi));
            }
        }
    }
    Ok(out)
}

/// Real-valued convenience wrapper around [`sht_forward`].
pub fn sht_forward_real(grid: &QuadratureGrid, samples: &[f64], lmax: usize) -> Result<HarmonicCoeffs> {
    let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    sht_forward(grid, &c, lmax)
}

/// `Σ_{n,k} f̂_{n,k} Y_n^k(θ, φ)` at each point `(θ, φ)`.
pub fn synthesize(coeffs: &HarmonicCoeffs, points: &[(f64, f64)]) -> Vec<Complex64> {
    let lmax = coeffs.lmax();
    let kmax = max_order(coeffs);
    let table = NormalizedLegendre::new(lmax);
    par::map_slice(points, |&(theta, phi)| {
        let (s, c) = theta.sin_cos();
        let mut plm = vec![0.0; tri(lmax, lmax) + 1];
        table.fill(c, s, kmax, &mut plm);
        evaluate_with_table(coeffs, &plm, kmax, phi)
    })
}

/// Synthesis at one colatitude for many longitudes; the Legendre table is
/// shared across the row.
pub fn synthesize_row(coeffs: &HarmonicCoeffs, theta: f64, phis: &[f64]) -> Vec<Complex64> {
    let lmax = coeffs.lmax();
    let kmax = max_order(coeffs);
    let table = NormalizedLegendre::new(lmax);
    let (s, c) = theta.sin_cos();
    let mut plm = vec![0.0; tri(lmax, lmax) + 1];
    table.fill(c, s, kmax, &mut plm);
    let fourier = row_fourier(coeffs, &plm, kmax);
    phis.iter()
        .map(|&phi| {
            fourier
                .iter()
                .enumerate()
                .map(|(idx, a)| a * Complex64::from_polar(1.0, (idx as i64 - kmax as i64) as f64 * phi))
                .sum()
        })
        .collect()
}

/// Highest order with a nonzero coefficient.
pub fn max_order(coeffs: &HarmonicCoeffs) -> usize {
    let mut kmax = 0;
    for n in 0..=coeffs.lmax() {
        for k in -(n as i64)..=n as i64 {
            if coeffs.get(n, k) != Complex64::new(0.0, 0.0) {
                kmax = kmax.max(k.unsigned_abs() as usize);
            }
        }
    }
    kmax
}

fn row_fourier(coeffs: &HarmonicCoeffs, plm: &[f64], kmax: usize) -> Vec<Complex64> {
    let lmax = coeffs.lmax();
    (0..=2 * kmax)
        .map(|idx| {
            let k = idx as i64 - kmax as i64;
            let m = k.unsigned_abs() as usize;
            let sum: Complex64 = (m..=lmax).map(|n| coeffs.get(n, k) * plm[tri(n, m)]).sum();
            sum * order_sign(k)
        })
        .collect()
}

fn evaluate_with_table(coeffs: &HarmonicCoeffs, plm: &[f64], kmax: usize, phi: f64) -> Complex64 {
    row_fourier(coeffs, plm, kmax)
        .iter()
        .enumerate()
        .map(|(idx, a)| a * Complex64::from_polar(1.0, (idx as i64 - kmax as i64) as f64 * phi))
        .sum()
}

/// Synthesis onto every sample of a quadrature grid.
pub fn synthesize_grid(coeffs: &HarmonicCoeffs, grid: &QuadratureGrid) -> Vec<Complex64> {
    let phis: Vec<f64> = (0..grid.n_phi()).map(|j| grid.phi(j)).collect();
    let rows = par::map_range(grid.n_theta(), |i| synthesize_row(coeffs, grid.theta(i), &phis));
    rows.into_iter().flatten().collect()
}
