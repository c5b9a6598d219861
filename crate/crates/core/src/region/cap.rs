use super::curve::{BoundaryCurve, CurvePoint, SegmentReport};
use crate::geometry::{Cap, EulerAngles, SpherePoint, Vec3};
use crate::quad::{composite, GaussLegendre};
use crate::sh::legendre::legendre_all;
use crate::sh::HarmonicCoeffs;
use crate::wigner::rotate_coeffs_euler;
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;

/// Opening of the osculating cap on the region side, in `(0, π)`.
///
/// Equals `arcsin(‖v''‖⁻¹)` where the boundary bends towards the region and
/// `π − arcsin(‖v''‖⁻¹)` where it bends away.
pub fn signed_opening(p: &CurvePoint) -> f64 {
    1f64.atan2(p.geodesic_curvature())
}

/// The cap through `v(p)` matching the curve to second order, lying on the
/// region side of the tangent.
pub fn osculating_cap(curve: &BoundaryCurve, p: f64) -> Result<Cap> {
    let pt = curve.eval(p);
    if pt.curvature() < 1.0 - 1e-9 {
        return Err(Error::Validation(format!("‖v''‖ = {} < 1 at t = {p}", pt.curvature())));
    }
    let rho = signed_opening(&pt);
    let z = pt.v * rho.cos() + pt.normal() * rho.sin();
    Cap::new(SpherePoint::new(z)?, rho)
}

/// `‖u − v‖, ‖u' − v'‖, ‖u'' − v''‖` at `v(p)` for the unit-speed
/// boundary `u` of the osculating cap, started at the same point.
pub fn tangency_residuals(curve: &BoundaryCurve, p: f64) -> Result<[f64; 3]> {
    let cap = osculating_cap(curve, p)?;
    let pt = curve.eval(p);
    let start = pt.v - cap.center.vec() * cap.center.vec().dot(&pt.v);
    let (u, du, ddu) = cap.boundary_point(&start, 0.0);
    Ok([(u - pt.v).norm(), (du - pt.d1).norm(), (ddu - pt.d2).norm()])
}

/// Harmonic coefficients of the cap indicator, exact up to rounding.
pub fn cap_harmonic_coeffs(cap: &Cap, lmax: usize) -> HarmonicCoeffs {
    let c = cap.opening.cos();
    let p = legendre_all(lmax + 1, c);
    let mut f = HarmonicCoeffs::zeros(lmax);
    f.set(0, 0, Complex64::new(PI.sqrt() * (1.0 - c), 0.0));
    for n in 1..=lmax {
        let v = (PI / (2 * n + 1) as f64).sqrt() * (p[n - 1] - p[n + 1]);
        f.set(n, 0, Complex64::new(v, 0.0));
    }
    let (theta, phi) = cap.center.polar();
    rotate_coeffs_euler(&f, EulerAngles::new(phi, theta, 0.0))
}

/// Local polar coordinates about a cap centre `z`, azimuth zero at `v0`.
struct Polar {
    z: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl Polar {
    fn new(z: Vec3, v0: Vec3) -> Self {
        let e1 = (v0 - z * z.dot(&v0)).normalize();
        Self { z, e1, e2: z.cross(&e1) }
    }

    fn coords(&self, v: &Vec3) -> (f64, f64) {
        let (a, b) = (v.dot(&self.e1), v.dot(&self.e2));
        let theta = a.hypot(b).atan2(v.dot(&self.z));
        (theta, b.atan2(a))
    }
}

/// `∫ sin θ dθ` over `[lo, hi]`, zero if empty.
fn band(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        0.0
    } else {
        2.0 * (0.5 * (lo + hi)).sin() * (0.5 * (hi - lo)).sin()
    }
}

/// Area of `(A Δ C_p) ∩ C(x, r)` where `C_p` is the osculating cap at `v(p)`
/// and `x` lies at signed distance `offset` from `v(p)` along the inward
/// normal.
///
/// Integrates over the boundary parameter: at each azimuth about the cap
/// centre the symmetric difference is the band between the cap edge and the
/// curve, clipped to the disk.
pub fn cap_area_difference(
    curve: &BoundaryCurve,
    segment: &SegmentReport,
    p: f64,
    offset: f64,
    r: f64,
) -> Result<f64> {
    if !(r > 0.0 && r < segment.d_delta / 2.0) {
        return Err(Error::Precondition(format!("r = {r} not in (0, d_δ/2 = {})", segment.d_delta / 2.0)));
    }
    if offset.abs() >= segment.d_delta / 2.0 {
        return Err(Error::Precondition(format!("offset {offset} leaves the guaranteed neighbourhood")));
    }
    if !segment.contains_inner(p, curve.length()) {
        return Err(Error::Precondition(format!("p = {p} outside [a+δ, b−δ]")));
    }
    let cap = osculating_cap(curve, p)?;
    let rho = cap.opening;
    let vp = curve.eval(p);
    let polar = Polar::new(*cap.center.vec(), vp.v);
    let theta_x = rho - offset;
    let (sin_r2, sin_tx) = (r.sin().powi(2), theta_x.sin());

    // squared sine of the disk's half-width along azimuth ψ, negative outside its shadow
    let reach = |psi: f64| sin_r2 - (sin_tx * psi.sin()).powi(2);
    let integrand = |t: f64| {
        let pt = curve.eval(t);
        let (h, psi) = polar.coords(&pt.v);
        let q = reach(psi);
        if q <= 0.0 {
            return 0.0;
        }
        let zx = polar.z.cross(&pt.v);
        let dpsi = pt.d1.dot(&zx) / zx.norm_squared();
        let a = (1.0 - (sin_tx * psi.sin()).powi(2)).sqrt();
        let w = (q.sqrt() / a).min(1.0).asin();
        let centre = (sin_tx * psi.cos()).atan2(theta_x.cos());
        let (lo, hi) = (rho.min(h).max(centre - w), rho.max(h).min(centre + w));
        dpsi * band(lo, hi)
    };

    // bracket the parameter range whose azimuth falls in the disk's shadow
    let inside = |t: f64| reach(polar.coords(&curve.eval(t).v).1) > 0.0;
    let edge = |dir: f64| {
        let step = r / 4.0;
        let mut k = 1.0;
        while inside(p + dir * k * step) {
            k += 1.0;
            if k > 400.0 {
                break;
            }
        }
        let (mut a, mut b) = (p + dir * (k - 1.0) * step, p + dir * k * step);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if inside(m) {
                a = m;
            } else {
                b = m;
            }
        }
        b
    };
    let (t_lo, t_hi) = (edge(-1.0), edge(1.0));
    let rule = GaussLegendre::new(12);
    let left = composite(&rule, t_lo, p, 48, integrand);
    let right = composite(&rule, p, t_hi, 48, integrand);
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use crate::quad::GaussLegendre;
    use crate::region::curve::{boundary_curve, segment_validate, select_segment};
    use crate::region::graph::GraphRegion;
    use crate::sh::{legendre, sht_forward_real, QuadratureGrid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_examples() {
        let f = cap_harmonic_coeffs(&Cap::new(SpherePoint::north(), PI / 3.0).unwrap(), 8);
        assert_abs_diff_eq!(f.get(0, 0).re, 0.886_226_925_452_758, epsilon = 1e-12);
        let g = cap_harmonic_coeffs(&Cap::new(SpherePoint::north(), PI / 2.0).unwrap(), 8);
        assert_abs_diff_eq!(g.get(2, 0).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(1, 1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_matches_zonal_quadrature() {
        // ∫_{cos φ0}^1 P̄_n(x) dx by Gauss-Legendre, times 2π
        let phi0 = 0.7;
        let f = cap_harmonic_coeffs(&Cap::new(SpherePoint::north(), phi0).unwrap(), 20);
        let rule = GaussLegendre::new(30);
        for n in 0..=20 {
            let norm = ((2 * n + 1) as f64 / (4.0 * PI)).sqrt();
            let q = 2.0 * PI * norm * rule.integrate(phi0.cos(), 1.0, |x| legendre(n, x).unwrap());
            assert_abs_diff_eq!(f.get(n, 0).re, q, epsilon = 1e-13);
        }
    }

    #[test]
    fn rotated_cap_matches_sampled_indicator() {
        let cap = Cap::new(SpherePoint::from_polar(1.0, 2.0), PI / 4.0).unwrap();
        let exact = cap_harmonic_coeffs(&cap, 16);
        let grid = QuadratureGrid::new(512);
        let samples = grid.sample(|t, p| cap.contains(&SpherePoint::from_polar(t, p)) as u8 as f64);
        let approx = sht_forward_real(&grid, &samples, 16).unwrap();
        assert!(exact.max_abs_diff(&approx) < 2e-2);
        assert!(exact.real_symmetry_defect() < 1e-13);
    }

    #[test]
    fn osculating_cap_tangency() {
        let curve = boundary_curve(&GraphRegion::example(), 1024).unwrap();
        let len = curve.length();
        for i in 0..32 {
            let r = tangency_residuals(&curve, len * i as f64 / 32.0).unwrap();
            assert!(r.iter().all(|&e| e < 1e-6), "{r:?}");
        }
    }

    #[test]
    fn osculating_cap_of_cap_is_itself() {
        let frame = Rotation::about_y(0.3);
        let curve = boundary_curve(&GraphRegion::cap(frame, 0.6).unwrap(), 512).unwrap();
        let z0 = frame.apply_vec(&Vec3::z());
        for t in [0.0, 1.0, 2.5] {
            let c = osculating_cap(&curve, t).unwrap();
            assert_abs_diff_eq!(c.opening, 0.6, epsilon = 1e-9);
            assert!((c.center.vec() - z0).norm() < 1e-9);
        }
        let great = boundary_curve(&GraphRegion::cap(frame, PI / 2.0).unwrap(), 512).unwrap();
        let c = osculating_cap(&great, 0.4).unwrap();
        assert_abs_diff_eq!(c.opening, PI / 2.0, epsilon = 1e-9);
        let pt = great.eval(0.4);
        assert!((c.center.vec() - pt.normal()).norm() < 1e-9);
    }

    #[test]
    fn cap_region_has_no_area_difference() {
        let curve = boundary_curve(&GraphRegion::cap(Rotation::about_y(0.3), 0.6).unwrap(), 512).unwrap();
        let seg = segment_validate(&curve, 0.0, 0.6, 0.2).unwrap();
        let d = cap_area_difference(&curve, &seg, 0.3, 0.0, seg.d_delta / 4.0).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn area_difference_matches_brute_force() {
        let region = GraphRegion::example();
        let curve = boundary_curve(&region, 1024).unwrap();
        let seg = select_segment(&curve, 32).unwrap();
        let p = 0.5 * (seg.a + seg.b) + 0.3 * seg.delta;
        let r = 0.45 * seg.d_delta;
        let got = cap_area_difference(&curve, &seg, p, 0.1 * r, r).unwrap();
        // oracle: rays from x, locating where each indicator changes along them
        let cap = osculating_cap(&curve, p).unwrap();
        let z = *cap.center.vec();
        let inv = region.frame().inverse();
        let pt = curve.eval(p);
        let x = pt.v * (0.1 * r).cos() + pt.normal() * (0.1 * r).sin();
        let e1 = pt.d1;
        let e2 = x.cross(&e1);
        let f_a = |y: &Vec3| {
            let (t, ph) = inv.apply(&SpherePoint::from_unit(*y)).polar();
            region.g(ph) - t
        };
        let f_c = |y: &Vec3| cap.opening - z.cross(y).norm().atan2(z.dot(y));
        let na = 4000;
        let mut area = 0.0;
        for j in 0..na {
            let a = 2.0 * PI * (j as f64 + 0.5) / na as f64;
            let u = e1 * a.cos() + e2 * a.sin();
            let ray = |s: f64| x * s.cos() + u * s.sin();
            let mut cuts = vec![0.0, r];
            for f in [&f_a as &dyn Fn(&Vec3) -> f64, &f_c] {
                let ns = 400;
                for i in 0..ns {
                    let (mut lo, mut hi) = (r * i as f64 / ns as f64, r * (i + 1) as f64 / ns as f64);
                    if f(&ray(lo)).signum() == f(&ray(hi)).signum() {
                        continue;
                    }
                    let s_lo = f(&ray(lo)).signum();
                    for _ in 0..80 {
                        let m = 0.5 * (lo + hi);
                        if f(&ray(m)).signum() == s_lo {
                            lo = m;
                        } else {
                            hi = m;
                        }
                    }
                    cuts.push(0.5 * (lo + hi));
                }
            }
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                let m = ray(0.5 * (w[0] + w[1]));
                if (f_a(&m) > 0.0) != (f_c(&m) > 0.0) {
                    area += (w[0].cos() - w[1].cos()) * 2.0 * PI / na as f64;
                }
            }
        }
        assert!(got > 0.0);
        assert!((got - area).abs() < 0.05 * got, "{got} vs {area}");
    }
}
