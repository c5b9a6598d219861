use crate::geometry::{EulerAngles, Rotation, SpherePoint, Vec3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Value and first three derivatives of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet(pub [f64; 4]);

impl Jet {
    pub fn var(x: f64) -> Self {
        Jet([x, 1.0, 0.0, 0.0])
    }

    fn chain(self, f: [f64; 4]) -> Self {
        let [_, h1, h2, h3] = self.0;
        Jet([f[0], f[1] * h1, f[2] * h1 * h1 + f[1] * h2, f[3] * h1 * h1 * h1 + 3.0 * f[2] * h1 * h2 + f[1] * h3])
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.0[0].sin_cos();
        self.chain([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.0[0].sin_cos();
        self.chain([c, -s, -c, s])
    }

    pub fn mul(self, o: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        Jet([a0 * b0, a1 * b0 + a0 * b1, a2 * b0 + 2.0 * a1 * b1 + a0 * b2, a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3])
    }
}

/// `g(φ) = a0 + Σ_m (a_m cos mφ + b_m sin mφ)`, with `a[m−1]`, `b[m−1]` the
/// coefficients of order `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GCoeffs {
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

/// JSON region description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub g_coeffs: GCoeffs,
    #[serde(default)]
    pub frame_euler: [f64; 3],
}

/// `{x : θ(R0⁻¹x) < g(φ(R0⁻¹x))}` for a trigonometric polynomial `g`.
#[derive(Debug, Clone)]
pub struct GraphRegion {
    coeffs: GCoeffs,
    frame: Rotation,
    g_min: f64,
    g_max: f64,
}

impl GraphRegion {
    pub fn new(coeffs: GCoeffs, frame: Rotation) -> Result<Self> {
        let mut r = Self { coeffs, frame, g_min: 0.0, g_max: 0.0 };
        let (lo, hi) = r.extremes();
        if !(lo > 0.0 && hi < PI) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!("g ranges over [{lo}, {hi}], outside (0, π)")));
        }
        r.g_min = lo;
        r.g_max = hi;
        Ok(r)
    }

    pub fn from_spec(spec: &RegionSpec) -> Result<Self> {
        let [a, b, c] = spec.frame_euler;
        Self::new(spec.g_coeffs.clone(), Rotation::from_euler(EulerAngles::new(a, b, c)))
    }

    pub fn to_spec(&self) -> RegionSpec {
        let e = self.frame.to_euler();
        RegionSpec { g_coeffs: self.coeffs.clone(), frame_euler: [e.alpha, e.beta, e.gamma] }
    }

    /// The test region `g(φ) = 7/500 (20π + 5 cos 2φ + 5 sin 5φ − 2 sin 7φ)`
    /// tilted by `R_{e2}(π/5)`.
    pub fn example() -> Self {
        let s = 7.0 / 500.0;
        let mut a = vec![0.0; 7];
        let mut b = vec![0.0; 7];
        a[1] = 5.0 * s;
        b[4] = 5.0 * s;
        b[6] = -2.0 * s;
        Self::new(GCoeffs { a0: 20.0 * PI * s, a, b }, Rotation::about_y(PI / 5.0)).expect("valid example region")
    }

    /// The cap `C(R0 e3, φ0)` written as a graph region.
    pub fn cap(frame: Rotation, phi0: f64) -> Result<Self> {
        Self::new(GCoeffs { a0: phi0, a: vec![], b: vec![] }, frame)
    }

    pub fn frame(&self) -> &Rotation {
        &self.frame
    }

    pub fn coeffs(&self) -> &GCoeffs {
        &self.coeffs
    }

    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    /// Whether `g` is constant, i.e. the region is a cap.
    pub fn is_cap(&self) -> bool {
        self.coeffs.a.iter().chain(&self.coeffs.b).all(|&c| c == 0.0)
    }

    pub fn bandwidth(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        last(&self.coeffs.a).max(last(&self.coeffs.b))
    }

    pub fn g(&self, phi: f64) -> f64 {
        self.g_jet(phi).0[0]
    }

    pub(crate) fn g_jet(&self, phi: f64) -> Jet {
        let mut out = [self.coeffs.a0, 0.0, 0.0, 0.0];
        let terms = self.coeffs.a.iter().map(|&c| (c, true)).enumerate().chain(self.coeffs.b.iter().map(|&c| (c, false)).enumerate());
        for (i, (c, is_cos)) in terms {
            if c == 0.0 {
                continue;
            }
            let m = (i + 1) as f64;
            let (s, co) = (m * phi).sin_cos();
            let d = if is_cos { [co, -m * s, -m * m * co, m * m * m * s] } else { [s, m * co, -m * m * s, -m * m * m * co] };
            for j in 0..4 {
                out[j] += c * d[j];
            }
        }
        Jet(out)
    }

    /// Boundary point `c(φ)` and its first three `φ`-derivatives, in the
    /// rotated frame.
    pub(crate) fn boundary_jet(&self, phi: f64) -> [Vec3; 4] {
        let g = self.g_jet(phi);
        let p = Jet::var(phi);
        let sg = g.sin();
        let x = sg.mul(p.cos());
        let y = sg.mul(p.sin());
        let z = g.cos();
        let m = self.frame.matrix();
        std::array::from_fn(|j| m * Vec3::new(x.0[j], y.0[j], z.0[j]))
    }

    fn extremes(&self) -> (f64, f64) {
        let n = 4096;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ilo, mut ihi) = (0, 0);
        for i in 0..n {
            let v = self.g(TAU * i as f64 / n as f64);
            if v < lo {
                lo = v;
                ilo = i;
            }
            if v > hi {
                hi = v;
                ihi = i;
            }
        }
        // Newton polish on g' = 0 from the best samples
        let polish = |i: usize| {
            let mut phi = TAU * i as f64 / n as f64;
            for _ in 0..20 {
                let j = self.g_jet(phi).0;
                if j[2] == 0.0 {
                    break;
                }
                let step = j[1] / j[2];
                if step.abs() > TAU / n as f64 {
                    break;
                }
                phi -= step;
            }
            self.g(phi)
        };
        (lo.min(polish(ilo)), hi.max(polish(ihi)))
    }

    pub fn contains(&self, x: &SpherePoint) -> bool {
        let y = self.frame.inverse().apply(x);
        let (theta, phi) = y.polar();
        theta < self.g(phi)
    }
}

/// `1` inside the region, `0` outside or on the boundary.
pub fn region_indicator(region: &GraphRegion, x: &SpherePoint) -> u8 {
    u8::from(region.contains(x))
}
