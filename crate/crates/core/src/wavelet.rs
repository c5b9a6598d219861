//! Window functions, directionality components and directional wavelets.

use crate::quad::{adaptive, GaussLegendre};
use crate::sh::{synthesize, synthesize_row, HarmonicCoeffs};
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;
use std::io::BufRead;
use std::sync::{Arc, OnceLock};

const TABLE_INTERVALS: usize = 16384;

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Bump mapped onto `[1/2, 1]`.
fn bump_half(t: f64) -> f64 {
    bump(4.0 * t - 3.0)
}

/// Piecewise cubic Hermite data on a sorted abscissa.
#[derive(Debug, Clone)]
struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// Clamps slopes with the Fritsch-Carlson condition so that monotone
    /// data give a monotone interpolant.
    fn monotone(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        for i in 0..x.len() - 1 {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if delta == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (d[i] / delta, d[i + 1] / delta);
            if a < 0.0 {
                d[i] = 0.0;
            }
            if b < 0.0 {
                d[i + 1] = 0.0;
            }
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                d[i] = tau * a * delta;
                d[i + 1] = tau * b * delta;
            }
        }
        Self { x, y, d }
    }

    /// Slopes from three-point differences, then limited.
    fn pchip(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let d = (0..n)
            .map(|i| {
                let (lo, hi) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
                (y[hi] - y[lo]) / (x[hi] - x[lo])
            })
            .collect();
        Self::monotone(x, y, d)
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }
}

#[derive(Debug, Clone)]
enum WindowKind {
    /// `k_λ` and `1 − k_λ` tabulated on `[1/2, 1]`, each accumulated from
    /// the end where it vanishes so both keep full relative precision.
    ScaleDiscretised { k: Hermite, complement: Hermite },
    /// `κ` tabulated directly.
    Tabulated(Hermite),
}

/// A window `κ ≥ 0` supported in `[1/2, 2]`.
#[derive(Debug, Clone)]
pub struct WindowKappa {
    kind: WindowKind,
    label: String,
}

impl WindowKappa {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.5 || t >= 2.0 {
            return 0.0;
        }
        match &self.kind {
            WindowKind::ScaleDiscretised { k, complement } => {
                // k_λ(t/2) = 1 on (1/2, 1] and k_λ(t) = 0 on [1, 2)
                if t <= 1.0 {
                    complement.eval(t).max(0.0).sqrt()
                } else {
                    k.eval(0.5 * t).max(0.0).sqrt()
                }
            }
            WindowKind::Tabulated(h) => {
                if t < h.x[0] || t > h.x[h.x.len() - 1] {
                    0.0
                } else {
                    h.eval(t).max(0.0)
                }
            }
        }
    }

    /// Smoothness class of the window.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// `k_λ(t)` of the scale-discretised construction, if this is one.
    pub fn k_lambda(&self, t: f64) -> Option<f64> {
        match &self.kind {
            WindowKind::ScaleDiscretised { k, .. } => Some(if t <= 0.5 {
                1.0
            } else if t >= 1.0 {
                0.0
            } else {
                k.eval(t)
            }),
            WindowKind::Tabulated(_) => None,
        }
    }

    /// Window from samples `(t_i, κ_i)`, interpolated by monotone cubics and
    /// zero outside the sampled range.
    pub fn from_table(t: Vec<f64>, kappa: Vec<f64>) -> Result<Self> {
        if t.len() != kappa.len() || t.len() < 4 {
            return Err(Error::Validation("window table needs at least 4 matching samples".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("window abscissae must increase strictly".into()));
        }
        if t[0] < 0.5 - 1e-12 || t[t.len() - 1] > 2.0 + 1e-12 {
            return Err(Error::Validation("window support must lie in [1/2, 2]".into()));
        }
        if kappa.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
            return Err(Error::Validation("window values must lie in [0, 1]".into()));
        }
        if kappa.iter().all(|&v| v == 0.0) {
            return Err(Error::Validation("window vanishes identically".into()));
        }
        Ok(Self { kind: WindowKind::Tabulated(Hermite::pchip(t, kappa)), label: "tabulated".into() })
    }

    /// Reads a `t,kappa` CSV table.
    pub fn from_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty window file".into()))??;
        if header.trim() != "t,kappa" {
            return Err(Error::Parse(format!("unexpected window header {header:?}")));
        }
        let (mut t, mut v) = (Vec::new(), Vec::new());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse(format!("bad window row {line:?}")))
            };
            t.push(parse(it.next())?);
            v.push(parse(it.next())?);
        }
        Self::from_table(t, v)
    }
}

fn build_default() -> WindowKappa {
    let integrand = |t: f64| bump_half(t) / t;
    let norm = adaptive(integrand, 0.5, 1.0, 1e-15, 1e-13);
    let h = 0.5 / TABLE_INTERVALS as f64;
    let x: Vec<f64> = (0..=TABLE_INTERVALS).map(|i| 0.5 + i as f64 * h).collect();
    let rule = GaussLegendre::new(8);
    let pieces: Vec<f64> = (0..TABLE_INTERVALS)
        .map(|i| rule.integrate(x[i], x[i + 1], integrand) / norm)
        .collect();
    let mut k = vec![0.0; TABLE_INTERVALS + 1];
    let mut kc = vec![0.0; TABLE_INTERVALS + 1];
    for i in (0..TABLE_INTERVALS).rev() {
        k[i] = k[i + 1] + pieces[i];
    }
    for i in 0..TABLE_INTERVALS {
        kc[i + 1] = kc[i] + pieces[i];
    }
    let dk: Vec<f64> = x.iter().map(|&t| -integrand(t) / norm).collect();
    let dkc = dk.iter().map(|v| -v).collect();
    WindowKappa {
        kind: WindowKind::ScaleDiscretised {
            k: Hermite::monotone(x.clone(), k, dk),
            complement: Hermite::monotone(x, kc, dkc),
        },
        label: "C-infinity".into(),
    }
}

/// The `λ = 2` scale-discretised window:
/// `κ(t) = √(k(t/2) − k(t))`, `k(t) = ∫_t^1 s(u)/u du / ∫_{1/2}^1 s(u)/u du`,
/// with `s` the bump `exp(−1/(1−x²))` mapped onto `[1/2, 1]`.
pub fn default_window() -> Arc<WindowKappa> {
    static WINDOW: OnceLock<Arc<WindowKappa>> = OnceLock::new();
    WINDOW.get_or_init(|| Arc::new(build_default())).clone()
}

/// `ζ_{n,k}^K`.
pub fn zeta(kk: usize, n: usize, k: i64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if kk == 0 || k.unsigned_abs() as usize >= kk {
        return zero;
    }
    let ki = kk as i64;
    if (ki + k).rem_euclid(2) == 0 {
        return zero;
    }
    let p = if (kk + n).is_multiple_of(2) { (ki - 1).min(n as i64 - 1) } else { (ki - 1).min(n as i64) };
    if p < 0 || (p - k).rem_euclid(2) != 0 || k.abs() > p {
        return zero;
    }
    let j = ((p - k) / 2) as u64;
    let mag = (binomial(p as u64, j) / 2f64.powi(p as i32)).sqrt();
    let eta = if (kk - 1).is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    eta * mag
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `χ_K(γ) = conj(η) Σ_k ζ_k^K e^{ikγ}`; real by construction.
pub fn chi(kk: usize, gamma: f64) -> f64 {
    chi_complex(kk, gamma).re
}

/// The complex sum behind [`chi`], for checking that it is real.
pub fn chi_complex(kk: usize, gamma: f64) -> Complex64 {
    let eta = if (kk - 1).is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    let ki = kk as i64;
    let s: Complex64 = (1 - ki..ki)
        .map(|k| zeta(kk, kk, k) * Complex64::from_polar(1.0, k as f64 * gamma))
        .sum();
    eta.conj() * s
}

/// `Ψ_K^N` as a directionality `K`, dilation `N` and window.
#[derive(Debug, Clone)]
pub struct WaveletSpec {
    pub k: usize,
    pub n: usize,
    pub window: Arc<WindowKappa>,
}

impl WaveletSpec {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        Self::with_window(k, n, default_window())
    }

    pub fn with_window(k: usize, n: usize, window: Arc<WindowKappa>) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::Validation(format!("K = {k} and N = {n} must both be positive")));
        }
        Ok(Self { k, n, window })
    }

    /// Smallest degree bound holding every nonzero coefficient.
    pub fn lmax(&self) -> usize {
        2 * self.n
    }
}

/// `ψ̂_{n,k} = √((2n+1)/(8π²)) κ(n/N) ζ_{n,k}^K` for `n ≤ lmax`.
pub fn wavelet_coeffs(spec: &WaveletSpec, lmax: usize) -> Result<HarmonicCoeffs> {
    if lmax < 2 * spec.n {
        return Err(Error::Precondition(format!("Lmax = {lmax} truncates a wavelet with N = {}", spec.n)));
    }
    let mut out = HarmonicCoeffs::zeros(lmax);
    let kc = (spec.k as i64 - 1).min(lmax as i64);
    for n in 0..=(2 * spec.n).min(lmax) {
        let w = spec.window.eval(n as f64 / spec.n as f64);
        if w == 0.0 {
            continue;
        }
        let scale = ((2 * n + 1) as f64 / (8.0 * PI * PI)).sqrt() * w;
        for k in -kc.min(n as i64)..=kc.min(n as i64) {
            out.set(n, k, zeta(spec.k, n, k) * scale);
        }
    }
    Ok(out)
}

/// `Ψ_K^N(θ, φ)` at each point.
pub fn wavelet_synthesize(spec: &WaveletSpec, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let c = wavelet_coeffs(spec, spec.lmax())?;
    Ok(synthesize(&c, points))
}

/// Decay diagnostics of `θ ↦ max_φ |Ψ_K^N(θ, φ)|`.
#[derive(Debug, Clone)]
pub struct LocalizationReport {
    pub thetas: Vec<f64>,
    /// `max_φ |Ψ(θ, φ)| / N²`.
    pub profile: Vec<f64>,
    /// Least-squares slope of `ln(envelope)` against `ln θ` over `θ ∈ [8/N, π/2]`,
    /// where the envelope is `max_{θ' ≥ θ}` of the profile.
    pub tail_slope: f64,
    /// `sup_θ max_φ |Ψ| (1 + Nθ)⁶ / N²`.
    pub weighted_sup: f64,
    /// Location of the profile maximum.
    pub peak_theta: f64,
}

/// Number of longitudes used for the `max_φ`; `Ψ` is a trigonometric
/// polynomial of degree `K − 1` in `φ`.
fn phi_samples(k: usize) -> usize {
    16 * k + 16
}

pub fn localization_profile(spec: &WaveletSpec, thetas: &[f64]) -> Result<LocalizationReport> {
    let c = wavelet_coeffs(spec, spec.lmax())?;
    let m = phi_samples(spec.k);
    let phis: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let n2 = (spec.n * spec.n) as f64;
    let profile: Vec<f64> = crate::par::map_slice(thetas, |&t| {
        synthesize_row(&c, t, &phis).iter().map(|v| v.norm()).fold(0.0, f64::max) / n2
    });
    let nf = spec.n as f64;

    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
    let mut envelope = vec![0.0; thetas.len()];
    let mut running: f64 = 0.0;
    for &i in order.iter().rev() {
        running = running.max(profile[i]);
        envelope[i] = running;
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &t) in thetas.iter().enumerate() {
        if t >= 8.0 / nf && t <= PI / 2.0 && envelope[i] > 0.0 {
            xs.push(t.ln());
            ys.push(envelope[i].ln());
        }
    }
    let tail_slope = fit_slope(&xs, &ys);
    let weighted_sup = thetas
        .iter()
        .zip(&profile)
        .map(|(&t, &p)| p * (1.0 + nf * t).powi(6))
        .fold(0.0, f64::max);
    let peak = order.iter().copied().max_by(|&a, &b| profile[a].total_cmp(&profile[b])).unwrap_or(0);
    Ok(LocalizationReport {
        thetas: thetas.to_vec(),
        profile,
        tail_slope,
        weighted_sup,
        peak_theta: thetas.get(peak).copied().unwrap_or(0.0),
    })
}

/// Least-squares slope; NaN for fewer than two points.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
