//! Frame coefficients of indicator functions and their asymptotics near a
//! smooth boundary.
//!
//! Coefficients are computed spectrally, `⟨f, D(x, r)Ψ⟩ = Σ f̂_{n,k}
//! conj((D(x, r)Ψ)^_{n,k})`. The leading term describes them to `O(1/N)` in
//! terms of the distance to the boundary, the side of the boundary, the
//! radius of the osculating cap and the angle between the wavelet orientation
//! and the boundary tangent.

use crate::geometry::{tangent_angle, EulerAngles, Rotation, SpherePoint, TangentFrame};
use crate::map::{magnitude_quantile, CoefficientMap};
use crate::quad::GaussLegendre;
use crate::region::{
    cap_harmonic_coeffs, nearest_boundary_point, osculating_cap, signed_opening, BoundaryCurve, NearestPoint,
    SegmentReport,
};
use crate::sh::{max_order, HarmonicCoeffs};
use crate::wavelet::{chi, fit_slope, wavelet_coeffs, WaveletSpec};
use crate::wigner::{rotated_inner, so3_synthesis, WignerDStack};
use crate::{par, Complex64, Error, Result};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

fn truncated(f: &HarmonicCoeffs, lmax: usize) -> Result<HarmonicCoeffs> {
    if f.lmax() < lmax {
        return Err(Error::Precondition(format!("signal Lmax {} below the wavelet's 2N = {lmax}", f.lmax())));
    }
    Ok(f.with_lmax(lmax))
}

/// `⟨f, D(x, r)Ψ⟩` given precomputed wavelet coefficients.
pub fn frame_coefficient_with(f: &HarmonicCoeffs, psi: &HarmonicCoeffs, frame: &TangentFrame) -> Result<Complex64> {
    let f = truncated(f, psi.lmax())?;
    rotated_inner(&f, psi, frame.to_rotation().to_euler())
}

/// `⟨f, D(x, r)Ψ_K^N⟩`; requires `f̂` up to degree `2N`.
pub fn frame_coefficient(f: &HarmonicCoeffs, spec: &WaveletSpec, frame: &TangentFrame) -> Result<Complex64> {
    let psi = wavelet_coeffs(spec, spec.lmax())?;
    frame_coefficient_with(f, &psi, frame)
}

/// `Ŵ(α_j, β_ℓ, γ)` on the equiangular grid; the imaginary parts, which
/// vanish for real signals only up to rounding, are dropped and their maximum
/// is recorded.
pub fn coefficient_map(f: &HarmonicCoeffs, spec: &WaveletSpec, m: usize, gamma: f64) -> Result<CoefficientMap> {
    if m == 0 {
        return Err(Error::Validation("map resolution M must be positive".into()));
    }
    let psi = wavelet_coeffs(spec, spec.lmax())?;
    let f = truncated(f, spec.lmax())?;
    let s = so3_synthesis(&f, &psi, &CoefficientMap::alphas(m), &CoefficientMap::betas(m), gamma)?;
    let imag_max = s.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let values = s.values.iter().map(|v| v.re).collect();
    CoefficientMap::new(m, gamma, spec.k, spec.n, values, imag_max)
}

/// `c_{k'}` with `⟨f, D(R(α, β, γ))Ψ⟩ = Σ_{k'} c_{k'} e^{ik'γ}`, `|k'| < K`.
fn gamma_fourier(f: &HarmonicCoeffs, psi: &HarmonicCoeffs, stack: &WignerDStack, alpha: f64) -> Vec<Complex64> {
    let kc = stack.kcol() as i64;
    let mut c = vec![Complex64::new(0.0, 0.0); (2 * kc + 1) as usize];
    for n in 0..=f.lmax() {
        let ni = n as i64;
        for kp in -kc.min(ni)..=kc.min(ni) {
            let g = psi.get(n, kp).conj();
            if g.norm_sqr() == 0.0 {
                continue;
            }
            let s: Complex64 = (-ni..=ni)
                .map(|k| f.get(n, k) * Complex64::from_polar(stack.get(n, k, kp), k as f64 * alpha))
                .sum();
            c[(kp + kc) as usize] += g * s;
        }
    }
    c
}

fn eval_gamma(c: &[Complex64], gamma: f64) -> Complex64 {
    let kc = (c.len() / 2) as i64;
    c.iter().enumerate().map(|(i, v)| v * Complex64::from_polar(1.0, (i as i64 - kc) as f64 * gamma)).sum()
}

/// `∫_{1/2}^{2} κ(t) t⁻¹ dt`, the natural scale of [`oscillatory_integral`].
pub fn window_mass(spec: &WaveletSpec) -> f64 {
    GaussLegendre::cached(256).integrate(0.5, 2.0, |t| spec.window.eval(t) / t)
}

/// `∫_{1/2}^{2} κ(t) t⁻¹ cos(N d t + (2d − π(1 − (−1)^K))/4) dt`.
///
/// Starts from `max(64, 4⌈N d⌉)` Gauss-Legendre nodes and doubles until two
/// successive rules agree to `1e-8` relative to [`window_mass`].
pub fn oscillatory_integral(spec: &WaveletSpec, d: f64) -> f64 {
    let nd = spec.n as f64 * d;
    let phase = (2.0 * d - if spec.k % 2 == 1 { TAU } else { 0.0 }) / 4.0;
    let integrand = |t: f64| spec.window.eval(t) / t * (nd * t + phase).cos();
    let tol = 1e-8 * window_mass(spec);
    let mut m = 64usize.max(4 * nd.abs().ceil() as usize);
    let mut value = GaussLegendre::cached(m).integrate(0.5, 2.0, integrand);
    for _ in 0..8 {
        let finer = GaussLegendre::cached(2 * m).integrate(0.5, 2.0, integrand);
        let done = (finer - value).abs() <= tol;
        value = finer;
        m *= 2;
        if done {
            break;
        }
    }
    value
}

/// Local data entering the leading term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeGeometry {
    /// `d(x, ∂A) ≥ 0`.
    pub distance: f64,
    pub inside: bool,
    /// Opening of the osculating cap on the region side, in `(0, π)`.
    pub opening: f64,
    /// `d_x(r, v'(p_x))`.
    pub delta_gamma: f64,
}

impl EdgeGeometry {
    /// Geometry for a boundary bending towards the region, with the opening
    /// `arcsin(‖v''‖⁻¹)`.
    pub fn from_curvature(distance: f64, inside: bool, curvature: f64, delta_gamma: f64) -> Result<Self> {
        if curvature < 1.0 {
            return Err(Error::Domain(format!("curvature {curvature} below 1")));
        }
        Ok(Self { distance, inside, opening: (1.0 / curvature).asin(), delta_gamma })
    }
}

/// The leading term
/// `√(sin φ / (2π³ sin(∓d + φ))) χ_K(Δγ) (±1)^K ∫ κ(t) t⁻¹ cos(...) dt`,
/// where the upper signs apply inside the region.
pub fn leading_term(spec: &WaveletSpec, g: &EdgeGeometry) -> Result<f64> {
    let side = if g.inside { -1.0 } else { 1.0 };
    let arg = side * g.distance + g.opening;
    let denom = arg.sin();
    if !(arg > 0.0 && arg < PI && denom > 0.0) {
        return Err(Error::Domain(format!("sin({arg}) ≤ 0: distance {} exceeds the cap", g.distance)));
    }
    let prefactor = (g.opening.sin() / (2.0 * PI.powi(3) * denom)).sqrt();
    let flip = if !g.inside && spec.k % 2 == 1 { -1.0 } else { 1.0 };
    Ok(prefactor * chi(spec.k, g.delta_gamma) * flip * oscillatory_integral(spec, g.distance))
}

/// Edge geometry of a frame relative to a boundary curve.
pub fn edge_geometry(curve: &BoundaryCurve, frame: &TangentFrame) -> Result<(EdgeGeometry, NearestPoint)> {
    let x = frame.point();
    let near = nearest_boundary_point(curve, x);
    // v'(p_x) is orthogonal to the normal plane through x and v(p_x)
    let t = near.point.d1;
    let t = (t - x.vec() * x.vec().dot(&t)).normalize();
    let delta_gamma = tangent_angle(x, frame.tangent(), &t)?;
    let g = EdgeGeometry { distance: near.distance, inside: near.inside, opening: signed_opening(&near.point), delta_gamma };
    Ok((g, near))
}

/// The frame at signed distance `d` (positive towards the region) along the
/// normal through `v(t)`, turned by `Δγ` from the boundary tangent.
pub fn normal_frame(curve: &BoundaryCurve, t: f64, d: f64, delta_gamma: f64) -> Result<TangentFrame> {
    let p = curve.eval(t);
    let x = p.v * d.cos() + p.normal() * d.sin();
    let r = Rotation::about_axis(&x, delta_gamma).apply_vec(&p.d1);
    TangentFrame::new(SpherePoint::new(x)?, r)
}

/// Interval of `u = N d` where the leading term stays above half its peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub lo: f64,
    pub hi: f64,
    pub peak_u: f64,
    pub peak_value: f64,
    /// `min |leading term| / |χ_K(Δγ)|` over the interval.
    pub c1: f64,
}

/// Scans `u ∈ [0, 40]` on a great-circle boundary (outside, aligned) for the
/// maximal interval around the peak of `|leading term(u/N)|` where it exceeds
/// half the peak. Stand-in for the existential interval of the lower bound.
pub fn interval_estimate(spec: &WaveletSpec) -> Result<IntervalEstimate> {
    let n = spec.n as f64;
    let us: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
    let vals: Vec<f64> = par::map_slice(&us, |&u| {
        let g = EdgeGeometry { distance: u / n, inside: false, opening: PI / 2.0, delta_gamma: 0.0 };
        leading_term(spec, &g).map(|v| v.abs() / chi(spec.k, 0.0).abs()).unwrap_or(0.0)
    });
    let (imax, &peak) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty scan");
    let half = 0.5 * peak;
    let mut i = imax;
    while i > 0 && vals[i - 1] > half {
        i -= 1;
    }
    let mut j = imax;
    while j + 1 < vals.len() && vals[j + 1] > half {
        j += 1;
    }
    let cross = |a: usize, b: usize| us[a] + (half - vals[a]) / (vals[b] - vals[a]) * (us[b] - us[a]);
    let lo = if i == 0 { 0.0 } else { cross(i - 1, i) };
    let hi = if j + 1 == vals.len() { us[j] } else { cross(j, j + 1) };
    let c1 = vals[i..=j].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(IntervalEstimate { lo, hi, peak_u: us[imax], peak_value: peak, c1 })
}

/// A study frame: normal offset `u = N d` (positive inside) from `v(t)` and
/// orientation offset `Δγ` from the tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyFrame {
    pub t: f64,
    pub nd: f64,
    pub delta_gamma: f64,
}

/// Where the asymptotic statements are guaranteed.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbourhood {
    pub phi_star: f64,
    /// Segment bookkeeping; `None` for caps, whose statements hold on the
    /// whole boundary.
    pub segment: Option<SegmentReport>,
}

impl Neighbourhood {
    fn admits(&self, near: &NearestPoint, length: f64) -> bool {
        let in_segment = self.segment.as_ref().is_none_or(|s| s.contains_inner(near.t, length) && near.distance < s.d_delta);
        near.distance <= self.phi_star / 4.0 && in_segment
    }

    /// Whether `N^{-3/4} < d_δ/2`, the scale from which the curve statements
    /// apply.
    pub fn asymptotic(&self, n: usize) -> bool {
        self.segment.as_ref().is_none_or(|s| (n as f64).powf(-0.75) < s.d_delta / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    pub sup_residual: f64,
    pub scaled_residual: f64,
    /// `sup |⟨1_A − 1_{C_{p_x}}, D(x, r)Ψ⟩|`.
    pub sup_cap_difference: f64,
    pub frames_used: usize,
    pub frames_excluded: usize,
    pub asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub k: usize,
    pub rows: Vec<ResidualRow>,
    /// Log-log slope of the sup residual against `N`.
    pub residual_exponent: f64,
    pub cap_difference_exponent: f64,
}

impl ResidualReport {
    /// `max / min` of `N · sup residual` across the rows.
    pub fn scaled_spread(&self) -> f64 {
        let s: Vec<f64> = self.rows.iter().map(|r| r.scaled_residual).collect();
        s.iter().cloned().fold(0.0, f64::max) / s.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// For each wavelet, the sup over admissible frames of
/// `|⟨1_A, D(x, r)Ψ⟩ − leading term|` and of the osculating-cap difference.
///
/// `coeffs` must hold the exact indicator coefficients up to the largest `2N`.
pub fn residual_study(
    curve: &BoundaryCurve,
    coeffs: &HarmonicCoeffs,
    specs: &[WaveletSpec],
    frames: &[StudyFrame],
    hood: &Neighbourhood,
) -> Result<ResidualReport> {
    let k = specs.first().ok_or_else(|| Error::Validation("no wavelets to study".into()))?.k;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let psi = wavelet_coeffs(spec, spec.lmax())?;
        let f = truncated(coeffs, spec.lmax())?;
        let n = spec.n as f64;
        let results = par::map_slice(frames, |sf| -> Result<Option<(f64, f64)>> {
            let frame = normal_frame(curve, sf.t, sf.nd / n, sf.delta_gamma)?;
            let (geom, near) = edge_geometry(curve, &frame)?;
            if !hood.admits(&near, curve.length()) {
                return Ok(None);
            }
            let w = frame_coefficient_with(&f, &psi, &frame)?;
            let lead = leading_term(spec, &geom)?;
            let cap = osculating_cap(curve, near.t)?;
            let wc = frame_coefficient_with(&cap_harmonic_coeffs(&cap, spec.lmax()), &psi, &frame)?;
            Ok(Some(((w - lead).norm(), (w - wc).norm())))
        });
        let (mut used, mut excluded, mut sup, mut sup_cap) = (0, 0, 0.0f64, 0.0f64);
        for r in results {
            match r? {
                Some((a, b)) => {
                    used += 1;
                    sup = sup.max(a);
                    sup_cap = sup_cap.max(b);
                }
                None => excluded += 1,
            }
        }
        rows.push(ResidualRow {
            n: spec.n,
            sup_residual: sup,
            scaled_residual: sup * n,
            sup_cap_difference: sup_cap,
            frames_used: used,
            frames_excluded: excluded,
            asymptotic: hood.asymptotic(spec.n),
        });
    }
    let ln_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let slope = |ys: Vec<f64>| if rows.len() > 1 { fit_slope(&ln_n, &ys) } else { f64::NAN };
    let residual_exponent = slope(rows.iter().map(|r| r.sup_residual.ln()).collect());
    let cap_difference_exponent = slope(rows.iter().map(|r| r.sup_cap_difference.ln()).collect());
    Ok(ResidualReport { k, rows, residual_exponent, cap_difference_exponent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    /// `(N d, |⟨f, D(x, r)Ψ⟩|)` with `N d` signed, positive inside.
    pub rows: Vec<(f64, f64)>,
    /// Slope of the log running-max envelope against `ln(1 + N|d|)` over
    /// `N|d| ≥ 4`.
    pub tail_exponent: f64,
}

/// `|⟨f, D(x, r)Ψ⟩|` along the normal through `v(p)` with aligned
/// orientation, at signed offsets `u = N d`.
pub fn decay_profile(
    curve: &BoundaryCurve,
    coeffs: &HarmonicCoeffs,
    spec: &WaveletSpec,
    p: f64,
    nds: &[f64],
) -> Result<DecayProfile> {
    let psi = wavelet_coeffs(spec, spec.lmax())?;
    let f = truncated(coeffs, spec.lmax())?;
    let n = spec.n as f64;
    let vals = par::map_slice(nds, |&u| -> Result<f64> {
        let frame = normal_frame(curve, p, u / n, 0.0)?;
        Ok(frame_coefficient_with(&f, &psi, &frame)?.norm())
    });
    let rows: Vec<(f64, f64)> = nds.iter().cloned().zip(vals.into_iter().collect::<Result<Vec<_>>>()?).collect();
    let mut tail: Vec<(f64, f64)> = rows.iter().filter(|(u, _)| u.abs() >= 4.0).map(|&(u, w)| (u.abs(), w)).collect();
    tail.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut env = 0.0f64;
    let mut pts = Vec::with_capacity(tail.len());
    for &(u, w) in tail.iter().rev() {
        env = env.max(w);
        pts.push(((1.0 + u).ln(), env.ln()));
    }
    let tail_exponent = if pts.len() > 1 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(DecayProfile { rows, tail_exponent })
}

/// A strong coefficient on the map with its estimated edge orientation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgePeak {
    pub alpha: f64,
    pub beta: f64,
    pub x: [f64; 3],
    pub magnitude: f64,
    /// `γ` maximising `|Ŵ(α, β, γ)|`.
    pub gamma: f64,
    /// `R(α, β, γ) e1`, the estimated tangent direction.
    pub tangent: [f64; 3],
    pub d_to_truth: Option<f64>,
    /// Angle in `[0, π/2]` between the estimated and the true tangent lines.
    pub orientation_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Keep grid points with `|Ŵ|` at or above this quantile.
    pub quantile: f64,
    /// Keep only points not exceeded by any of their eight neighbours.
    pub local_max: bool,
    pub gamma_steps: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self { quantile: 0.99, local_max: true, gamma_steps: 32 }
    }
}

fn is_local_max(map: &CoefficientMap, j: usize, l: usize) -> bool {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let v = map.get(j, l).abs();
    for dl in -1..=1i64 {
        for dj in -1..=1i64 {
            let (jj, ll) = ((j as i64 + dj).rem_euclid(w), l as i64 + dl);
            if (dj, dl) == (0, 0) || ll < 0 || ll >= h {
                continue;
            }
            if map.get(jj as usize, ll as usize).abs() > v {
                return false;
            }
        }
    }
    true
}

/// Thresholds a map, then estimates the orientation at each surviving point
/// by scanning `|Ŵ(α, β, ·)|` over `gamma_steps` angles and refining the
/// maximum with a parabola through its neighbours.
pub fn peak_extract(
    map: &CoefficientMap,
    coeffs: &HarmonicCoeffs,
    spec: &WaveletSpec,
    opts: &PeakOptions,
    truth: Option<&BoundaryCurve>,
) -> Result<Vec<EdgePeak>> {
    if opts.gamma_steps < 3 {
        return Err(Error::Validation("γ scan needs at least three angles".into()));
    }
    let psi = wavelet_coeffs(spec, spec.lmax())?;
    let f = truncated(coeffs, spec.lmax())?;
    let threshold = magnitude_quantile(&map.values, opts.quantile);
    let rows: Vec<usize> = (0..map.height()).collect();
    let kcol = max_order(&psi);
    let steps = opts.gamma_steps;
    let peaks = par::map_slice(&rows, |&l| -> Result<Vec<EdgePeak>> {
        let picks: Vec<usize> = (0..map.width())
            .filter(|&j| map.get(j, l).abs() >= threshold && (!opts.local_max || is_local_max(map, j, l)))
            .collect();
        if picks.is_empty() {
            return Ok(Vec::new());
        }
        let beta = map.beta(l);
        let stack = WignerDStack::with_columns(beta, f.lmax(), kcol);
        picks.into_iter().map(|j| orient_peak(map, &f, &psi, &stack, j, l, steps, truth)).collect()
    });
    Ok(peaks.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

#[allow(clippy::too_many_arguments)]
fn orient_peak(
    map: &CoefficientMap,
    f: &HarmonicCoeffs,
    psi: &HarmonicCoeffs,
    stack: &WignerDStack,
    j: usize,
    l: usize,
    steps: usize,
    truth: Option<&BoundaryCurve>,
) -> Result<EdgePeak> {
    let (alpha, beta) = (map.alpha(j), map.beta(l));
    let c = gamma_fourier(f, psi, stack, alpha);
    let mags: Vec<f64> = (0..steps).map(|i| eval_gamma(&c, TAU * i as f64 / steps as f64).norm()).collect();
    let (i, _) = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty scan");
    let (ym, y0, yp) = (mags[(i + steps - 1) % steps], mags[i], mags[(i + 1) % steps]);
    let curv = ym - 2.0 * y0 + yp;
    let shift = if curv < 0.0 { (0.5 * (ym - yp) / curv).clamp(-0.5, 0.5) } else { 0.0 };
    let gamma = (TAU * (i as f64 + shift) / steps as f64).rem_euclid(TAU);
    let frame = Rotation::from_euler(EulerAngles::new(alpha, beta, gamma)).to_frame();
    let x = *frame.point();
    let r = *frame.tangent();
    let (d_to_truth, orientation_error) = match truth {
        Some(curve) => {
            let near = nearest_boundary_point(curve, &x);
            let t = near.point.d1;
            let t = (t - x.vec() * x.vec().dot(&t)).normalize();
            (Some(near.distance), Some(r.dot(&t).abs().min(1.0).acos()))
        }
        None => (None, None),
    };
    Ok(EdgePeak {
        alpha,
        beta,
        x: [x.vec().x, x.vec().y, x.vec().z],
        magnitude: map.get(j, l).abs(),
        gamma,
        tangent: [r.x, r.y, r.z],
        d_to_truth,
        orientation_error,
    })
}
