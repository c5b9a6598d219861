use super::graph::GraphRegion;
use crate::geometry::{geodesic_distance, SpherePoint, Vec3};
use crate::quad::GaussLegendre;
use crate::{par, Error, Result};
use std::f64::consts::TAU;
use std::io::Write;

/// Position and first three arc-length derivatives of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub v: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
    pub d3: Vec3,
}

impl CurvePoint {
    /// Inward unit normal `R_v(π/2) v' = v × v'`.
    pub fn normal(&self) -> Vec3 {
        self.v.cross(&self.d1)
    }

    /// `‖v''‖`.
    pub fn curvature(&self) -> f64 {
        self.d2.norm()
    }

    /// Signed geodesic curvature `⟨v'', v × v'⟩`, positive where the curve
    /// bends towards the region.
    pub fn geodesic_curvature(&self) -> f64 {
        self.d2.dot(&self.normal())
    }

    /// Arc-length derivative of the geodesic curvature.
    pub fn geodesic_curvature_rate(&self) -> f64 {
        self.d3.dot(&self.normal())
    }

    /// `arcsin(‖v''‖⁻¹) ∈ (0, π/2]`.
    pub fn opening(&self) -> f64 {
        (1.0 / self.curvature()).min(1.0).asin()
    }
}

/// The positively oriented, unit-speed boundary of a graph region.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    region: GraphRegion,
    phis: Vec<f64>,
    arc: Vec<f64>,
    rule: GaussLegendre,
}

fn speed(region: &GraphRegion, phi: f64) -> f64 {
    region.boundary_jet(phi)[1].norm()
}

/// Traces `{θ = g(φ)}` with increasing `φ`, which keeps the region on the
/// left, and tabulates arc length at `samples + 1` equispaced longitudes.
pub fn boundary_curve(region: &GraphRegion, samples: usize) -> Result<BoundaryCurve> {
    if samples < 512 {
        return Err(Error::Precondition(format!("{samples} boundary samples, at least 512 required")));
    }
    let rule = GaussLegendre::new(16);
    let phis: Vec<f64> = (0..=samples).map(|i| TAU * i as f64 / samples as f64).collect();
    let pieces = par::map_range(samples, |i| rule.integrate(phis[i], phis[i + 1], |p| speed(region, p)));
    let mut arc = Vec::with_capacity(samples + 1);
    arc.push(0.0);
    for p in pieces {
        let last = arc[arc.len() - 1];
        arc.push(last + p);
    }
    if arc.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain("boundary arc length is not finite".into()));
    }
    Ok(BoundaryCurve { region: region.clone(), phis, arc, rule })
}

impl BoundaryCurve {
    pub fn region(&self) -> &GraphRegion {
        &self.region
    }

    pub fn length(&self) -> f64 {
        self.arc[self.arc.len() - 1]
    }

    /// Longitude (in the region's reference frame) of arc length `t`.
    pub fn phi_at(&self, t: f64) -> f64 {
        let len = self.length();
        let t = t.rem_euclid(len);
        let i = self.arc.partition_point(|&a| a <= t).clamp(1, self.arc.len() - 1) - 1;
        let (p0, p1) = (self.phis[i], self.phis[i + 1]);
        let (a0, a1) = (self.arc[i], self.arc[i + 1]);
        let mut phi = p0 + (p1 - p0) * (t - a0) / (a1 - a0);
        for _ in 0..8 {
            let s = a0 + self.rule.integrate(p0, phi, |p| speed(&self.region, p));
            let step = (s - t) / speed(&self.region, phi);
            phi = (phi - step).clamp(p0, p1);
            if step.abs() < 1e-15 {
                break;
            }
        }
        phi
    }

    /// `v(t)` and its derivatives; `t` is taken modulo the length.
    pub fn eval(&self, t: f64) -> CurvePoint {
        let phi = self.phi_at(t);
        let [c0, c1, c2, c3] = self.region.boundary_jet(phi);
        let sigma = c1.norm();
        let c12 = c1.dot(&c2);
        let s1 = c12 / sigma;
        let s2 = (c2.norm_squared() + c1.dot(&c3)) / sigma - c12 * c12 / sigma.powi(3);
        let p1 = 1.0 / sigma;
        let p2 = -s1 / sigma.powi(3);
        let p3 = -s2 / sigma.powi(4) + 3.0 * s1 * s1 / sigma.powi(5);
        CurvePoint {
            t,
            v: c0,
            d1: c1 * p1,
            d2: c2 * (p1 * p1) + c1 * p2,
            d3: c3 * (p1 * p1 * p1) + c2 * (3.0 * p1 * p2) + c1 * p3,
        }
    }

    /// `samples` points at equispaced arc length.
    pub fn table(&self, samples: usize) -> Vec<CurvePoint> {
        let len = self.length();
        par::map_range(samples, |i| self.eval(len * i as f64 / samples as f64))
    }

    /// Writes `t,x,y,z,kx,ky,kz` (position and second derivative).
    pub fn write_csv<W: Write>(&self, samples: usize, mut w: W) -> Result<()> {
        writeln!(w, "t,x,y,z,kx,ky,kz")?;
        for p in self.table(samples) {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", p.t, p.v.x, p.v.y, p.v.z, p.d2.x, p.d2.y, p.d2.z)?;
        }
        Ok(())
    }
}

/// Geometry of a segment `[a, b]` and its trimmed interior `[a+δ, b−δ]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SegmentReport {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    /// `inf_{[a,b]} arcsin(‖v''‖⁻¹)`.
    pub phi_star: f64,
    pub d_delta: f64,
    /// Distance from `v([a+δ, b−δ])` to the rest of the curve.
    pub separation: f64,
    pub bounds_ok: bool,
    pub chord_max: f64,
    pub chord_bound: f64,
    pub tangent_max: f64,
    pub tangent_bound: f64,
    pub sup_v3: f64,
}

impl SegmentReport {
    pub fn inner(&self) -> (f64, f64) {
        (self.a + self.delta, self.b - self.delta)
    }

    pub fn contains_inner(&self, t: f64, length: f64) -> bool {
        let (lo, hi) = self.inner();
        let shifted = lo + (t - lo).rem_euclid(length);
        shifted <= hi
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

struct BoundScan {
    phi_star: f64,
    chord_max: f64,
    tangent_max: f64,
    sup_v3: f64,
}

impl BoundScan {
    fn chord_bound(&self) -> f64 {
        (1.0 - self.phi_star.cos()) / 2.0
    }

    fn tangent_bound(&self) -> f64 {
        0.25 - (1.0 + self.phi_star.cos()).powi(2) / 16.0
    }

    fn ok(&self) -> bool {
        self.chord_max <= self.chord_bound() && self.tangent_max <= self.tangent_bound()
    }
}

fn bound_scan(curve: &BoundaryCurve, a: f64, b: f64, n: usize) -> BoundScan {
    let pts: Vec<CurvePoint> = linspace(a, b, n).map(|t| curve.eval(t)).collect();
    let mut e = BoundScan { phi_star: f64::INFINITY, chord_max: 0.0, tangent_max: 0.0, sup_v3: 0.0 };
    for (i, p) in pts.iter().enumerate() {
        e.phi_star = e.phi_star.min(p.opening());
        e.sup_v3 = e.sup_v3.max(p.d3.norm());
        for q in &pts[i + 1..] {
            e.chord_max = e.chord_max.max((p.v - q.v).norm());
            e.tangent_max = e.tangent_max.max((p.d1 - q.d1).norm());
        }
    }
    e
}

/// Minimum distance between `v([lo, hi])` and `v([b, a + L])`.
fn separation(curve: &BoundaryCurve, lo: f64, hi: f64, b: f64, a_wrapped: f64) -> f64 {
    if a_wrapped <= b {
        return f64::INFINITY;
    }
    let inner: Vec<SpherePoint> = linspace(lo, hi, 200).map(|t| SpherePoint::from_unit(curve.eval(t).v)).collect();
    let steps = ((a_wrapped - b) / curve.length() * 4000.0).ceil().max(8.0) as usize;
    let outer: Vec<f64> = linspace(b, a_wrapped, steps).collect();
    let best = par::map_slice(&outer, |&s| {
        let q = SpherePoint::from_unit(curve.eval(s).v);
        inner.iter().map(|p| geodesic_distance(p, &q)).fold(f64::INFINITY, f64::min)
    });
    let (i, _) = best.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc });
    // refine around the best sampled complement point
    let h = (a_wrapped - b) / (steps - 1) as f64;
    let s_lo = (outer[i] - h).max(b);
    let s_hi = (outer[i] + h).min(a_wrapped);
    let dist_to_inner = |s: f64| {
        let q = SpherePoint::from_unit(curve.eval(s).v);
        let t = golden(|t| geodesic_distance(&SpherePoint::from_unit(curve.eval(t).v), &q), lo, hi, 1e-12);
        geodesic_distance(&SpherePoint::from_unit(curve.eval(t).v), &q)
    };
    let s = golden(dist_to_inner, s_lo, s_hi, 1e-12);
    dist_to_inner(s).min(best[i])
}

/// Golden-section minimiser on `[a, b]`.
fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Checks the segment conditions on `[a, b]` and computes `φ*`, `d_δ` and
/// `sup ‖v'''‖`. Parameters may exceed `L`; the curve is periodic.
pub fn segment_validate(curve: &BoundaryCurve, a: f64, b: f64, delta: f64) -> Result<SegmentReport> {
    let len = curve.length();
    if !(a < b && b - a <= len + 1e-12) {
        return Err(Error::Precondition(format!("segment [{a}, {b}] is empty or longer than the curve")));
    }
    if !(delta > 0.0 && delta <= 1.0 && a + delta < b - delta) {
        return Err(Error::Precondition(format!("δ = {delta} does not fit in [{a}, {b}]")));
    }
    let e = bound_scan(curve, a, b, 160);
    let (lo, hi) = (a + delta, b - delta);
    let sep = separation(curve, lo, hi, b, a + len);
    let d_delta = (delta / 5.0 * (e.phi_star / 2.0).sin()).min(sep);
    Ok(SegmentReport {
        a,
        b,
        delta,
        phi_star: e.phi_star,
        d_delta,
        separation: sep,
        bounds_ok: e.ok(),
        chord_max: e.chord_max,
        chord_bound: e.chord_bound(),
        tangent_max: e.tangent_max,
        tangent_bound: e.tangent_bound(),
        sup_v3: e.sup_v3,
    })
}

/// Largest half-width `w` for which `[c − w, c + w]` satisfies the segment
/// conditions.
fn max_half_width(curve: &BoundaryCurve, c: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, curve.length() / 4.0);
    if bound_scan(curve, c - hi, c + hi, 48).ok() {
        return hi;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if bound_scan(curve, c - mid, c + mid, 48).ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn centred_segment(curve: &BoundaryCurve, c: f64) -> Result<SegmentReport> {
    // shrink slightly so the denser validation scan agrees with the search
    let w = 0.98 * max_half_width(curve, c);
    let delta = (0.5 * w).min(1.0);
    segment_validate(curve, c - w, c + w, delta)
}

/// Among `candidates` equispaced segment centres, the maximal valid segment
/// with the largest `d_δ`, using `δ = w/2` for half-width `w`.
pub fn select_segment(curve: &BoundaryCurve, candidates: usize) -> Result<SegmentReport> {
    let len = curve.length();
    let centres: Vec<f64> = (0..candidates.max(1)).map(|i| len * i as f64 / candidates.max(1) as f64).collect();
    let reports = par::map_slice(&centres, |&c| centred_segment(curve, c));
    let mut best: Option<SegmentReport> = None;
    for r in reports {
        let r = r?;
        if r.bounds_ok && best.as_ref().is_none_or(|b| r.d_delta > b.d_delta) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Domain("no candidate segment satisfies the segment conditions".into()))
}

/// Maximal valid segments centred at `count` equispaced points; together
/// their interiors cover the curve when `count` is large enough.
pub fn subsegments(curve: &BoundaryCurve, count: usize) -> Result<Vec<SegmentReport>> {
    let len = curve.length();
    let centres: Vec<f64> = (0..count).map(|i| len * i as f64 / count as f64).collect();
    par::map_slice(&centres, |&c| centred_segment(curve, c)).into_iter().collect()
}

/// Closest boundary point to `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub t: f64,
    pub point: CurvePoint,
    pub distance: f64,
    pub inside: bool,
    /// Another local minimiser lies within `1e-9` of the minimal distance.
    pub ambiguous: bool,
}

const SCAN: usize = 4096;

pub fn nearest_boundary_point(curve: &BoundaryCurve, x: &SpherePoint) -> NearestPoint {
    let len = curve.length();
    let h = len / SCAN as f64;
    let dist = |t: f64| geodesic_distance(&SpherePoint::from_unit(curve.eval(t).v), x);
    let samples: Vec<f64> = par::map_range(SCAN, |i| dist(i as f64 * h));
    let mut minima = Vec::new();
    for i in 0..SCAN {
        let (l, r) = (samples[(i + SCAN - 1) % SCAN], samples[(i + 1) % SCAN]);
        if samples[i] <= l && samples[i] <= r {
            minima.push(i);
        }
    }
    let refine = |i: usize| -> (f64, f64) {
        let c = i as f64 * h;
        let mut t = golden(dist, c - h, c + h, 1e-9 * len);
        // Newton on the first-order condition ⟨x, v'(t)⟩ = 0
        for _ in 0..6 {
            let p = curve.eval(t);
            let g = x.vec().dot(&p.d1);
            let dg = x.vec().dot(&p.d2);
            if dg.abs() < 1e-300 {
                break;
            }
            let next = t - g / dg;
            if (next - c).abs() > 2.0 * h || dist(next) > dist(t) {
                break;
            }
            t = next;
        }
        (t.rem_euclid(len), dist(t))
    };
    let mut cands: Vec<(f64, f64)> = minima.iter().map(|&i| refine(i)).collect();
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (t, d) = cands[0];
    let ambiguous = cands.iter().skip(1).any(|&(t2, d2)| {
        let gap = (t2 - t).rem_euclid(len).min((t - t2).rem_euclid(len));
        d2 - d < 1e-9 && gap > 4.0 * h
    });
    NearestPoint { t, point: curve.eval(t), distance: d, inside: curve.region().contains(x), ambiguous }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cap_curve(phi0: f64) -> BoundaryCurve {
        boundary_curve(&GraphRegion::cap(Rotation::about_y(0.4), phi0).unwrap(), 512).unwrap()
    }

    #[test]
    fn cap_boundary_geometry() {
        let phi0 = PI / 3.0;
        let c = cap_curve(phi0);
        assert_abs_diff_eq!(c.length(), TAU * phi0.sin(), epsilon = 1e-10);
        for p in c.table(64) {
            assert_abs_diff_eq!(p.v.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.d1.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.curvature(), 1.0 / phi0.sin(), epsilon = 1e-9);
            assert!(p.geodesic_curvature() > 0.0);
        }
        let g = cap_curve(PI / 2.0);
        let p = g.eval(0.3);
        assert_abs_diff_eq!(p.curvature(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.opening(), PI / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn positive_orientation() {
        let region = GraphRegion::example();
        let c = boundary_curve(&region, 1024).unwrap();
        for p in c.table(50) {
            let inward = SpherePoint::new(p.v + 1e-6 * p.normal()).unwrap();
            let outward = SpherePoint::new(p.v - 1e-6 * p.normal()).unwrap();
            assert!(region.contains(&inward));
            assert!(!region.contains(&outward));
        }
    }

    #[test]
    fn example_curve_is_unit_speed() {
        let c = boundary_curve(&GraphRegion::example(), 1024).unwrap();
        let h = 1e-5;
        for p in c.table(40) {
            assert_abs_diff_eq!(p.d1.norm(), 1.0, epsilon = 1e-10);
            assert!(p.curvature() >= 1.0 - 1e-6);
            let fd = (c.eval(p.t + h).d2 - c.eval(p.t - h).d2) / (2.0 * h);
            assert!((fd - p.d3).norm() < 1e-4 * (1.0 + p.d3.norm()));
            let fd1 = (c.eval(p.t + h).v - c.eval(p.t - h).v) / (2.0 * h);
            assert!((fd1 - p.d1).norm() < 1e-8);
        }
    }

    #[test]
    fn cap_segment_report() {
        let c = cap_curve(PI / 3.0);
        let r = segment_validate(&c, 0.0, 0.08, 0.02).unwrap();
        assert_abs_diff_eq!(r.phi_star, PI / 3.0, epsilon = 1e-6);
        assert!(r.bounds_ok);
        assert!(r.d_delta <= 0.02 / 5.0 * (r.phi_star / 2.0).sin() + 1e-15);
        let g = segment_validate(&cap_curve(PI / 2.0), 0.0, 0.1, 0.02).unwrap();
        assert_abs_diff_eq!(g.phi_star, PI / 2.0, epsilon = 1e-6);
        assert!(segment_validate(&c, 0.0, 0.08, 0.05).is_err());
        assert!(!segment_validate(&c, 0.0, 0.5, 0.1).unwrap().bounds_ok);
    }

    #[test]
    fn selected_segment_is_valid() {
        let c = boundary_curve(&GraphRegion::example(), 1024).unwrap();
        let s = select_segment(&c, 64).unwrap();
        assert!(s.bounds_ok);
        assert!(s.d_delta > 0.0);
        assert!(s.d_delta <= s.delta / 5.0 * (s.phi_star / 2.0).sin() + 1e-15);
    }

    #[test]
    fn nearest_point_on_and_off_the_curve() {
        let c = boundary_curve(&GraphRegion::example(), 1024).unwrap();
        let t0 = 1.234;
        let p = c.eval(t0);
        let on = nearest_boundary_point(&c, &SpherePoint::from_unit(p.v));
        assert!(on.distance < 1e-12);
        assert_abs_diff_eq!(on.t, t0, epsilon = 1e-6);
        for s in [0.05f64, -0.05] {
            let n = p.normal();
            let x = SpherePoint::from_unit(p.v * s.cos() + n * s.sin());
            let q = nearest_boundary_point(&c, &x);
            assert_abs_diff_eq!(q.distance, 0.05, epsilon = 1e-8);
            assert_abs_diff_eq!(q.t, t0, epsilon = 1e-6);
            assert_eq!(q.inside, s > 0.0);
            assert!(x.vec().dot(&q.point.d1).abs() < 1e-6);
            assert!(!q.ambiguous);
        }
    }

    #[test]
    fn cap_centre_is_equidistant() {
        let c = boundary_curve(&GraphRegion::cap(Rotation::identity(), 0.8).unwrap(), 512).unwrap();
        let q = nearest_boundary_point(&c, &SpherePoint::north());
        assert_abs_diff_eq!(q.distance, 0.8, epsilon = 1e-12);
        assert!(q.inside);
        assert!(q.ambiguous);
    }
}
