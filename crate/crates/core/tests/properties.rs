use proptest::prelude::*;
use sphere_edgelab_core::geometry::*;
use sphere_edgelab_core::region::{boundary_curve, GraphRegion};
use sphere_edgelab_core::sh::*;
use sphere_edgelab_core::wavelet::{chi, wavelet_coeffs, WaveletSpec};
use sphere_edgelab_core::wigner::{rotate_coeffs, wigner_D};
use sphere_edgelab_core::Complex64;
use std::f64::consts::{PI, TAU};

fn point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0..TAU).prop_map(|(z, phi)| SpherePoint::from_polar(z.acos(), phi))
}

fn euler() -> impl Strategy<Value = EulerAngles> {
    (0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, g)| EulerAngles::new(a, b, g))
}

fn coeffs(lmax: usize) -> impl Strategy<Value = HarmonicCoeffs> {
    let len = (lmax + 1) * (lmax + 1);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |v| {
        let mut it = v.into_iter();
        HarmonicCoeffs::from_fn(lmax, |_, _| {
            let (re, im) = it.next().unwrap();
            Complex64::new(re, im)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_distance_is_a_metric(x in point(), y in point(), z in point()) {
        let d = |a: &SpherePoint, b: &SpherePoint| geodesic_distance(a, b);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-12);
        prop_assert!(d(&x, &x) < 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-10);
        prop_assert!(d(&x, &y) <= PI);
    }

    #[test]
    fn chord_and_arc_are_equivalent(x in point(), y in point()) {
        let d = geodesic_distance(&x, &y);
        let chord = (x.vec() - y.vec()).norm();
        prop_assert!(2.0 / PI * d <= chord + 1e-12);
        prop_assert!(chord <= d + 1e-12);
    }

    #[test]
    fn euler_and_frame_round_trips(e in euler()) {
        let r = Rotation::from_euler(e);
        let back = Rotation::from_euler(r.to_euler());
        prop_assert!((r.matrix() - back.matrix()).abs().max() < 1e-10);
        let f = r.to_frame();
        prop_assert!((f.to_rotation().matrix() - r.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn rotations_about_one_axis_add(x in point(), a in 0.0..TAU, b in 0.0..TAU) {
        let axis = *x.vec();
        let ab = Rotation::about_axis(&axis, a).compose(&Rotation::about_axis(&axis, b));
        let sum = Rotation::about_axis(&axis, (a + b).rem_euclid(TAU));
        prop_assert!((ab.matrix() - sum.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn harmonics_obey_the_addition_bound(n in 0usize..40, k in -39i64..40, theta in 0.0..PI, phi in 0.0..TAU) {
        prop_assume!(k.unsigned_abs() as usize <= n);
        let y = sph_harm(n, k, theta, phi).unwrap();
        prop_assert!(y.norm() <= ((2 * n + 1) as f64 / (4.0 * PI)).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn wigner_matrices_are_unitary(n in 0usize..12, e in euler()) {
        let d = wigner_D(n, e.alpha, e.beta, e.gamma);
        let id = d.adjoint() * &d;
        for i in 0..=2 * n {
            for j in 0..=2 * n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((id[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wigner_matrices_compose(n in 0usize..8, e1 in euler(), e2 in euler()) {
        let r1 = Rotation::from_euler(e1);
        let r2 = Rotation::from_euler(e2);
        let e12 = r1.compose(&r2).to_euler();
        let lhs = wigner_D(n, e12.alpha, e12.beta, e12.gamma);
        let rhs = wigner_D(n, e1.alpha, e1.beta, e1.gamma) * wigner_D(n, e2.alpha, e2.beta, e2.gamma);
        prop_assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn rotation_preserves_energy_and_composes(f in coeffs(10), e1 in euler(), e2 in euler()) {
        let (r1, r2) = (Rotation::from_euler(e1), Rotation::from_euler(e2));
        let g = rotate_coeffs(&f, &r1);
        prop_assert!((g.energy() - f.energy()).abs() < 1e-10 * f.energy());
        let twice = rotate_coeffs(&g, &r2);
        let once = rotate_coeffs(&f, &r2.compose(&r1));
        prop_assert!(twice.max_abs_diff(&once) < 1e-10);
    }

    #[test]
    fn sht_round_trips_band_limited_signals(f in coeffs(12)) {
        let grid = QuadratureGrid::new(2 * 12);
        let back = sht_forward(&grid, &synthesize_grid(&f, &grid), 12).unwrap();
        prop_assert!(back.max_abs_diff(&f) < 1e-11);
    }

    #[test]
    fn quadrature_integrates_polynomials(f in coeffs(16)) {
        let grid = QuadratureGrid::new(16);
        let re: Vec<f64> = synthesize_grid(&f, &grid).iter().map(|v| v.re).collect();
        let want = f.get(0, 0).re * (4.0 * PI).sqrt();
        prop_assert!((grid.integrate(&re) - want).abs() < 1e-9);
    }

    #[test]
    fn rotation_commutes_with_evaluation(f in coeffs(8), e in euler(), x in point()) {
        // (D(R)f)(x) = f(R⁻¹x)
        let r = Rotation::from_euler(e);
        let g = rotate_coeffs(&f, &r);
        let y = r.inverse().apply(&x);
        let lhs = synthesize(&g, &[x.polar()])[0];
        let rhs = synthesize(&f, &[y.polar()])[0];
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn wavelets_have_zero_mean_and_bounded_order(k in 1usize..9, n in 2usize..24) {
        let spec = WaveletSpec::new(k, n).unwrap();
        let psi = wavelet_coeffs(&spec, spec.lmax()).unwrap();
        prop_assert_eq!(psi.get(0, 0), Complex64::new(0.0, 0.0));
        for deg in 0..=psi.lmax() {
            for ord in -(deg as i64)..=deg as i64 {
                if ord.unsigned_abs() as usize >= k {
                    prop_assert_eq!(psi.get(deg, ord), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn chi_has_parity(k in 1usize..=16, g in 0.0..TAU) {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        prop_assert!((chi(k, g + PI) - sign * chi(k, g)).abs() < 1e-12);
    }
}

#[test]
fn latitude_circle_distance_formula() {
    for i in 0..50 {
        let theta = PI * (i as f64 + 0.5) / 50.0;
        for j in 0..50 {
            let dphi = -PI + TAU * (j as f64 + 0.5) / 50.0;
            let a = SpherePoint::from_polar(theta, 0.0);
            let b = SpherePoint::from_polar(theta, dphi);
            let formula = (1.0 + (dphi.cos() - 1.0) * theta.sin().powi(2)).clamp(-1.0, 1.0).acos();
            let d = geodesic_distance(&a, &b);
            assert!((formula - d).abs() < 1e-12, "θ={theta} Δφ={dphi}");
            let lower = (1.0 - dphi * dphi / 12.0).max(0.0).sqrt() * dphi.abs() * theta.sin();
            assert!(lower <= d + 1e-12);
        }
    }
}

#[test]
fn example_boundary_is_unit_speed_and_curved() {
    let curve = boundary_curve(&GraphRegion::example(), 1024).unwrap();
    for p in curve.table(400) {
        assert!((p.v.norm() - 1.0).abs() < 1e-12);
        assert!((p.d1.norm() - 1.0).abs() < 1e-9);
        assert!(p.v.dot(&p.d1).abs() < 1e-9);
        assert!(p.d1.dot(&p.d2).abs() < 1e-7);
        assert!(p.curvature() >= 1.0 - 1e-9);
    }
}
