//! Wigner d- and D-functions, rotation of harmonic expansions and synthesis
//! of coefficient maps on SO(3).
//!
//! Convention: `D^n_{k,k'}(α, β, γ) = e^{−ikα} d^n_{k,k'}(β) e^{−ik'γ}` with
//! `R(α, β, γ) = R_{e3}(α) R_{e2}(β) R_{e3}(γ)`, chosen so that
//! `Y_n^{k'}(R⁻¹y) = Σ_k D^n_{k,k'}(R) Y_n^k(y)`.

use crate::geometry::{EulerAngles, Rotation};
use crate::sh::{max_order, HarmonicCoeffs};
use crate::{par, Complex64, Error, Result};
use nalgebra::DMatrix;

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for i in 1..=n {
        out.push(out[i - 1] + (i as f64).ln());
    }
    out
}

fn ln_pow(ln_base: f64, e: i64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * ln_base
    }
}

/// `d^j_{k,k'}(β)` by the explicit finite sum. Exact for small `j`; used as
/// an oracle and to seed the degree ladder, where the sum has one term.
pub fn wigner_d_element(j: usize, k: i64, kp: i64, beta: f64) -> f64 {
    let ji = j as i64;
    if k.abs() > ji || kp.abs() > ji {
        return 0.0;
    }
    let lf = ln_factorials(2 * j + 1);
    let f = |i: i64| lf[i as usize];
    let (lc, ls) = ((0.5 * beta).cos().abs().ln(), (0.5 * beta).sin().abs().ln());
    let (sc, ss) = ((0.5 * beta).cos().signum(), (0.5 * beta).sin().signum());
    let pref = 0.5 * (f(ji + k) + f(ji - k) + f(ji + kp) + f(ji - kp));
    let s_lo = 0.max(kp - k);
    let s_hi = (ji + kp).min(ji - k);
    let mut sum = 0.0;
    for s in s_lo..=s_hi {
        let ec = 2 * ji + kp - k - 2 * s;
        let es = k - kp + 2 * s;
        let ln_term = pref - f(ji + kp - s) - f(s) - f(k - kp + s) - f(ji - k - s)
            + ln_pow(lc, ec)
            + ln_pow(ls, es);
        let mut sign = if (k - kp + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if ec % 2 != 0 {
            sign *= sc;
        }
        if es % 2 != 0 {
            sign *= ss;
        }
        sum += sign * ln_term.exp();
    }
    sum
}

/// Writes `d^l_{k,k'}(β)` for `l = l0..=lmax` into `out[l − l0]`, with
/// `l0 = max(|k|, |k'|)`, by the three-term recurrence in the degree.
fn ladder(k: i64, kp: i64, beta: f64, lmax: usize, out: &mut [f64]) {
    let l0 = k.unsigned_abs().max(kp.unsigned_abs()) as usize;
    if l0 > lmax {
        return;
    }
    let cb = beta.cos();
    let (m, mp) = (k as f64, kp as f64);
    out[0] = wigner_d_element(l0, k, kp, beta);
    let mut prev = 0.0;
    for l in l0..lmax {
        let lf = l as f64;
        let l1 = lf + 1.0;
        let cur = out[l - l0];
        let shift = if l == 0 { 0.0 } else { m * mp / (lf * l1) };
        let back = if l == 0 {
            0.0
        } else {
            ((lf * lf - m * m) * (lf * lf - mp * mp)).max(0.0).sqrt() / (lf * (2.0 * lf + 1.0))
        };
        let scale = l1 * (2.0 * lf + 1.0) / ((l1 * l1 - m * m) * (l1 * l1 - mp * mp)).sqrt();
        let next = scale * ((cb - shift) * cur - back * prev);
        prev = cur;
        out[l + 1 - l0] = next;
    }
}

/// `d^n_{k,k'}(β)` for all `n ≤ lmax`, `|k| ≤ n` and `|k'| ≤ min(n, kcol)`.
#[derive(Debug, Clone)]
pub struct WignerDStack {
    beta: f64,
    lmax: usize,
    kcol: usize,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl WignerDStack {
    /// Full stack (every column).
    pub fn new(beta: f64, lmax: usize) -> Self {
        Self::with_columns(beta, lmax, lmax)
    }

    /// Stack restricted to columns `|k'| ≤ kcol`.
    pub fn with_columns(beta: f64, lmax: usize, kcol: usize) -> Self {
        let kcol = kcol.min(lmax);
        let width = 2 * kcol + 1;
        let mut offsets = Vec::with_capacity(lmax + 2);
        let mut total = 0;
        for n in 0..=lmax {
            offsets.push(total);
            total += (2 * n + 1) * width;
        }
        offsets.push(total);
        let (li, ki) = (lmax as i64, kcol as i64);
        let pairs: Vec<(i64, i64)> =
            (-li..=li).flat_map(|k| (-ki..=ki).map(move |kp| (k, kp))).collect();
        let columns = par::map_slice(&pairs, |&(k, kp)| {
            let mut buf = vec![0.0; lmax + 1];
            ladder(k, kp, beta, lmax, &mut buf);
            buf
        });
        let mut data = vec![0.0; total];
        for (&(k, kp), col) in pairs.iter().zip(columns) {
            let l0 = k.unsigned_abs().max(kp.unsigned_abs()) as usize;
            for n in l0..=lmax {
                let idx = offsets[n] + (k + n as i64) as usize * width + (kp + ki) as usize;
                data[idx] = col[n - l0];
            }
        }
        Self { beta, lmax, kcol, offsets, data }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn kcol(&self) -> usize {
        self.kcol
    }

    /// `d^n_{k,k'}(β)`; zero outside the stored index range.
    pub fn get(&self, n: usize, k: i64, kp: i64) -> f64 {
        let ni = n as i64;
        if n > self.lmax || k.abs() > ni || kp.abs() > ni || kp.unsigned_abs() as usize > self.kcol {
            return 0.0;
        }
        let width = 2 * self.kcol + 1;
        self.data[self.offsets[n] + (k + ni) as usize * width + (kp + self.kcol as i64) as usize]
    }

    /// The full `(2n+1) × (2n+1)` matrix of degree `n`; requires `kcol ≥ n`.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        assert!(self.kcol >= n, "stack lacks columns for degree {n}");
        let ni = n as i64;
        DMatrix::from_fn(2 * n + 1, 2 * n + 1, |r, c| self.get(n, r as i64 - ni, c as i64 - ni))
    }
}

/// Real matrix `d^n(β)`, rows/columns indexed by `k, k' = −n..=n`.
pub fn wigner_d(n: usize, beta: f64) -> DMatrix<f64> {
    let ni = n as i64;
    let mut m = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    let mut buf = vec![0.0; n + 1];
    for k in -ni..=ni {
        for kp in -ni..=ni {
            ladder(k, kp, beta, n, &mut buf);
            let l0 = k.unsigned_abs().max(kp.unsigned_abs()) as usize;
            m[((k + ni) as usize, (kp + ni) as usize)] = buf[n - l0];
        }
    }
    m
}

/// Complex matrix `D^n(α, β, γ)`.
#[allow(non_snake_case)]
pub fn wigner_D(n: usize, alpha: f64, beta: f64, gamma: f64) -> DMatrix<Complex64> {
    let d = wigner_d(n, beta);
    let ni = n as i64;
    DMatrix::from_fn(2 * n + 1, 2 * n + 1, |r, c| {
        let (k, kp) = ((r as i64 - ni) as f64, (c as i64 - ni) as f64);
        Complex64::from_polar(d[(r, c)], -(k * alpha + kp * gamma))
    })
}

/// Coefficients of `y ↦ f(R⁻¹y)`.
pub fn rotate_coeffs(f: &HarmonicCoeffs, rot: &Rotation) -> HarmonicCoeffs {
    rotate_coeffs_euler(f, rot.to_euler())
}

pub fn rotate_coeffs_euler(f: &HarmonicCoeffs, e: EulerAngles) -> HarmonicCoeffs {
    let lmax = f.lmax();
    let kcol = max_order(f);
    let stack = WignerDStack::with_columns(e.beta, lmax, kcol);
    let degrees = par::map_range(lmax + 1, |n| {
        let ni = n as i64;
        let kc = (kcol as i64).min(ni);
        (-ni..=ni)
            .map(|k| {
                let sum: Complex64 = (-kc..=kc)
                    .map(|kp| f.get(n, kp) * Complex64::from_polar(stack.get(n, k, kp), -(kp as f64) * e.gamma))
                    .sum();
                sum * Complex64::from_polar(1.0, -(k as f64) * e.alpha)
            })
            .collect::<Vec<_>>()
    });
    let mut out = HarmonicCoeffs::zeros(lmax);
    for (n, vals) in degrees.into_iter().enumerate() {
        out.degree_mut(n).copy_from_slice(&vals);
    }
    out
}

/// `⟨f, D(R)g⟩ = Σ_{n,k,k'} f̂_{n,k} conj(ĝ_{n,k'}) conj(D^n_{k,k'}(R))`.
pub fn rotated_inner(f: &HarmonicCoeffs, g: &HarmonicCoeffs, e: EulerAngles) -> Result<Complex64> {
    check_lmax(f, g)?;
    let stack = WignerDStack::with_columns(e.beta, f.lmax(), max_order(g));
    let row = row_fourier(f, g, &stack, e.gamma);
    Ok(eval_fourier(&row, e.alpha))
}

fn check_lmax(f: &HarmonicCoeffs, g: &HarmonicCoeffs) -> Result<()> {
    if f.lmax() != g.lmax() {
        return Err(Error::Precondition(format!(
            "signal Lmax {} differs from wavelet Lmax {}",
            f.lmax(),
            g.lmax()
        )));
    }
    Ok(())
}

/// `c_k = Σ_n Σ_{k'} f̂_{n,k} conj(ĝ_{n,k'}) d^n_{k,k'}(β) e^{ik'γ}`, `k = −lmax..=lmax`.
fn row_fourier(f: &HarmonicCoeffs, g: &HarmonicCoeffs, stack: &WignerDStack, gamma: f64) -> Vec<Complex64> {
    let lmax = f.lmax() as i64;
    let kc = stack.kcol() as i64;
    let mut c = vec![Complex64::new(0.0, 0.0); (2 * lmax + 1) as usize];
    for n in 0..=f.lmax() {
        let ni = n as i64;
        let kcn = kc.min(ni);
        let gw: Vec<Complex64> = (-kcn..=kcn)
            .map(|kp| g.get(n, kp).conj() * Complex64::from_polar(1.0, kp as f64 * gamma))
            .collect();
        if gw.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        for k in -ni..=ni {
            let fv = f.get(n, k);
            if fv.norm_sqr() == 0.0 {
                continue;
            }
            let s: Complex64 = (-kcn..=kcn)
                .zip(&gw)
                .map(|(kp, w)| w * stack.get(n, k, kp))
                .sum();
            c[(k + lmax) as usize] += fv * s;
        }
    }
    c
}

fn eval_fourier(c: &[Complex64], alpha: f64) -> Complex64 {
    let lmax = (c.len() / 2) as i64;
    c.iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, (i as i64 - lmax) as f64 * alpha))
        .sum()
}

/// Samples of `Ŵ(α, β, γ) = ⟨f, D(R(α, β, γ))g⟩` on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct So3Samples {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gamma: f64,
    /// β-major: `values[ℓ * alphas.len() + j]`.
    pub values: Vec<Complex64>,
}

/// Evaluates `Ŵ` on `alphas × betas` at fixed `γ`, one d-stack per β row.
pub fn so3_synthesis(
    f: &HarmonicCoeffs,
    g: &HarmonicCoeffs,
    alphas: &[f64],
    betas: &[f64],
    gamma: f64,
) -> Result<So3Samples> {
    check_lmax(f, g)?;
    let kcol = max_order(g);
    let rows = par::map_slice(betas, |&beta| {
        let stack = WignerDStack::with_columns(beta, f.lmax(), kcol);
        let c = row_fourier(f, g, &stack, gamma);
        alphas.iter().map(|&a| eval_fourier(&c, a)).collect::<Vec<_>>()
    });
    Ok(So3Samples {
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        gamma,
        values: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpherePoint;
    use crate::sh::sph_harm;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
        let e = EulerAngles::new(rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
        Rotation::from_euler(e)
    }

    #[test]
    fn degree_zero_and_one_closed_forms() {
        assert_abs_diff_eq!(wigner_d(0, 0.4)[(0, 0)], 1.0, epsilon = 1e-15);
        let b = 0.7;
        let d = wigner_d(1, b);
        let s2 = 2f64.sqrt();
        let expected = [
            [(1.0 + b.cos()) / 2.0, b.sin() / s2, (1.0 - b.cos()) / 2.0],
            [-b.sin() / s2, b.cos(), b.sin() / s2],
            [(1.0 - b.cos()) / 2.0, -b.sin() / s2, (1.0 + b.cos()) / 2.0],
        ];
        for r in 0..3 {
            for c in 0..3 {
                assert_abs_diff_eq!(d[(r, c)], expected[r][c], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn degree_two_closed_form() {
        let b: f64 = 1.1;
        let d = wigner_d(2, b);
        assert_abs_diff_eq!(d[(2, 2)], 0.5 * (3.0 * b.cos().powi(2) - 1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(d[(4, 4)], ((1.0 + b.cos()) / 2.0).powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(d[(3, 2)], -(1.5f64).sqrt() * b.sin() * b.cos(), epsilon = 1e-14);
    }

    #[test]
    fn identity_at_zero_and_orthogonality() {
        for n in 0..=16 {
            let d0 = wigner_d(n, 0.0);
            assert!((d0 - DMatrix::identity(2 * n + 1, 2 * n + 1)).amax() < 1e-12);
        }
        let stack = WignerDStack::new(2.3, 60);
        for n in [5, 31, 60] {
            let d = stack.matrix(n);
            assert!((&d * d.transpose() - DMatrix::identity(2 * n + 1, 2 * n + 1)).amax() < 1e-9);
        }
    }

    #[test]
    fn ladder_matches_explicit_sum() {
        for &b in &[0.0, 0.3, 1.7, PI] {
            let stack = WignerDStack::new(b, 12);
            for n in 0..=12usize {
                let ni = n as i64;
                for k in -ni..=ni {
                    for kp in -ni..=ni {
                        // the alternating sum loses a few digits to cancellation by n = 12
                        assert_abs_diff_eq!(stack.get(n, k, kp), wigner_d_element(n, k, kp, b), epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn representation_property_in_beta() {
        for n in [1, 4, 9] {
            let p = wigner_d(n, 0.4) * wigner_d(n, 1.1);
            assert!((p - wigner_d(n, 1.5)).amax() < 1e-9);
        }
    }

    #[test]
    fn column_limited_stack_agrees_with_full() {
        let full = WignerDStack::new(0.9, 40);
        let part = WignerDStack::with_columns(0.9, 40, 3);
        for n in 0..=40usize {
            let ni = n as i64;
            for k in -ni..=ni {
                for kp in -3i64..=3 {
                    assert_eq!(full.get(n, k, kp), part.get(n, k, kp));
                }
            }
        }
        assert_eq!(part.get(10, 0, 4), 0.0);
    }

    #[test]
    fn rotation_matches_resampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let rot = random_rotation(&mut rng);
            let inv = rot.inverse();
            for n in 0..=6usize {
                for k in -(n as i64)..=n as i64 {
                    let mut delta = HarmonicCoeffs::zeros(6);
                    delta.set(n, k, Complex64::new(1.0, 0.0));
                    let rotated = rotate_coeffs(&delta, &rot);
                    for _ in 0..4 {
                        let y = SpherePoint::from_polar(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
                        let (t, p) = y.polar();
                        let lhs = crate::sh::synthesize(&rotated, &[(t, p)])[0];
                        let (ti, pi) = inv.apply(&y).polar();
                        let rhs = sph_harm(n, k, ti, pi).unwrap();
                        assert!((lhs - rhs).norm() < 1e-10, "n={n} k={k}: {lhs} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn composition_of_full_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let (r1, r2) = (random_rotation(&mut rng), random_rotation(&mut rng));
            let r12 = r1.compose(&r2);
            for n in [1, 3, 6] {
                let d = |r: &Rotation| {
                    let e = r.to_euler();
                    wigner_D(n, e.alpha, e.beta, e.gamma)
                };
                let lhs = d(&r1) * d(&r2);
                let err = (lhs - d(&r12)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-8);
                let u = d(&r1);
                let id = &u * u.adjoint();
                let err = (id - DMatrix::identity(2 * n + 1, 2 * n + 1)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-9);
            }
        }
    }

    #[test]
    fn synthesis_at_identity_is_parseval() {
        let g = HarmonicCoeffs::from_fn(8, |n, k| {
            if k.abs() < 2 && n > 2 {
                Complex64::new(n as f64 * 0.1, k as f64 * 0.2)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let w = so3_synthesis(&g, &g, &[0.0], &[0.0], 0.0).unwrap();
        assert_abs_diff_eq!(w.values[0].re, g.energy(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.values[0].im, 0.0, epsilon = 1e-12);
        let short = HarmonicCoeffs::zeros(7);
        assert!(matches!(so3_synthesis(&short, &g, &[0.0], &[0.0], 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn high_degree_columns_stay_normalised() {
        let stack = WignerDStack::with_columns(1.3, 400, 4);
        for kp in [-4i64, 0, 3] {
            let norm: f64 = (-400..=400).map(|k| stack.get(400, k, kp).powi(2)).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-9);
        }
    }
}
