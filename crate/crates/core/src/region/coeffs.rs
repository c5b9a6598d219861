use super::graph::{region_indicator, GraphRegion};
use crate::geometry::SpherePoint;
use crate::quad::GaussLegendre;
use crate::sh::legendre::{legendre_all, tri};
use crate::sh::{order_sign, sht_forward_real, HarmonicCoeffs, NormalizedLegendre, QuadratureGrid};
use crate::wigner::rotate_coeffs;
use crate::{par, Complex64, Result};
use std::f64::consts::{PI, TAU};

/// Quadrature coefficients of a sampled indicator.
#[derive(Debug, Clone)]
pub struct RegionCoeffs {
    pub coeffs: HarmonicCoeffs,
    pub grid_degree: usize,
    /// `√(E_tail / E)` with the tail taken over the top quarter of degrees;
    /// a proxy for the aliasing and truncation noise of the sampled indicator.
    pub noise_level: f64,
}

/// Tail-energy ratio over degrees `n > 3 lmax / 4`.
pub fn tail_energy_ratio(f: &HarmonicCoeffs) -> f64 {
    let lmax = f.lmax();
    let total = f.energy();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = (3 * lmax / 4 + 1..=lmax).map(|n| f.degree_energy(n)).sum();
    (tail / total).sqrt()
}

/// Forward transform of the indicator sampled on a grid exact to `grid_degree`.
pub fn region_harmonic_coeffs(region: &GraphRegion, lmax: usize, grid_degree: usize) -> Result<RegionCoeffs> {
    region_harmonic_coeffs_on(region, lmax, &QuadratureGrid::new(grid_degree))
}

/// As [`region_harmonic_coeffs`] on a prebuilt grid.
pub fn region_harmonic_coeffs_on(region: &GraphRegion, lmax: usize, grid: &QuadratureGrid) -> Result<RegionCoeffs> {
    let samples = grid.sample(|t, p| region_indicator(region, &SpherePoint::from_polar(t, p)) as f64);
    let coeffs = sht_forward_real(grid, &samples, lmax)?;
    let noise_level = tail_energy_ratio(&coeffs);
    Ok(RegionCoeffs { coeffs, grid_degree: grid.degree(), noise_level })
}

/// Coefficients of the indicator of `{θ < g(φ)}` in the region's own frame,
/// rotated into place.
///
/// The polar cap below `g_min` is handled in closed form; the remaining
/// band `[g_min, g(φ)]` by Gauss-Legendre in `cos θ` and the trapezoidal rule
/// in `φ`, which is spectrally accurate for the smooth periodic integrand.
pub fn graph_region_coeffs(region: &GraphRegion, lmax: usize) -> HarmonicCoeffs {
    let (n_phi, nodes) = graph_rule_sizes(region, lmax);
    graph_region_coeffs_with(region, lmax, n_phi, nodes)
}

/// Longitudes and band nodes; `P̄_n^m(cos θ)` oscillates about
/// `n (g_max − g_min)/π` times across the band.
fn graph_rule_sizes(region: &GraphRegion, lmax: usize) -> (usize, usize) {
    let n_phi = 2 * lmax + 16 * region.bandwidth() + 64;
    let nodes = (lmax as f64 * (region.g_max() - region.g_min()) / 2.0).ceil() as usize + 24;
    (n_phi, nodes)
}

fn graph_region_coeffs_with(region: &GraphRegion, lmax: usize, n_phi: usize, nodes: usize) -> HarmonicCoeffs {
    let theta_a = region.g_min();
    let ca = theta_a.cos();
    let rule = GaussLegendre::new(nodes);
    let table = NormalizedLegendre::new(lmax);
    let size = tri(lmax, lmax) + 1;

    // Σ_j e^{−imφ_j} ∫_{cos g(φ_j)}^{cos θa} P̄_n^m(x) dx, accumulated in fixed
    // chunks of longitudes and summed in order so the result is deterministic
    let chunks = n_phi.min(32);
    let partial: Vec<Vec<Complex64>> = par::map_range(chunks, |c| {
        let mut acc = vec![Complex64::new(0.0, 0.0); size];
        let mut band = vec![0.0; size];
        let mut xs = vec![0.0; rule.nodes.len()];
        let mut ws = vec![0.0; rule.nodes.len()];
        for j in (c * n_phi / chunks)..((c + 1) * n_phi / chunks) {
            let phi = TAU * j as f64 / n_phi as f64;
            let lo = region.g(phi).cos();
            let (mid, half) = (0.5 * (ca + lo), 0.5 * (ca - lo));
            for (i, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                xs[i] = mid + half * x;
                ws[i] = w * half;
            }
            band.iter_mut().for_each(|b| *b = 0.0);
            table.accumulate_weighted(&xs, &ws, &mut band);
            for m in 0..=lmax {
                let e = Complex64::from_polar(1.0, -(m as f64) * phi);
                for n in m..=lmax {
                    acc[tri(n, m)] += e * band[tri(n, m)];
                }
            }
        }
        acc
    });
    let mut sums = vec![Complex64::new(0.0, 0.0); size];
    for part in &partial {
        for (s, v) in sums.iter_mut().zip(part) {
            *s += v;
        }
    }

    let p = legendre_all(lmax + 1, ca);
    let cap_part = |n: usize| {
        let norm = ((2 * n + 1) as f64 / (4.0 * PI)).sqrt();
        let integral = if n == 0 { 1.0 - ca } else { (p[n - 1] - p[n + 1]) / (2 * n + 1) as f64 };
        TAU * norm * integral
    };

    let scale = TAU / n_phi as f64;
    let rows: Vec<Vec<Complex64>> = (0..=lmax)
        .map(|n| {
            let ni = n as i64;
            (-ni..=ni)
                .map(|k| {
                    let s = sums[tri(n, k.unsigned_abs() as usize)];
                    // the band integrals are real, so the k < 0 sum is the conjugate
                    let s = if k < 0 { s.conj() } else { s };
                    let mut v = s * (order_sign(k) * scale);
                    if k == 0 {
                        v += cap_part(n);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut f = HarmonicCoeffs::zeros(lmax);
    for (n, row) in rows.into_iter().enumerate() {
        f.degree_mut(n).copy_from_slice(&row);
    }
    rotate_coeffs(&f, region.frame())
}
