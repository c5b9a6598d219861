//! Points, caps and rotations on the unit sphere.

use crate::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::{PI, TAU};

pub type Vec3 = Vector3<f64>;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    /// Normalises `v`; fails on the zero vector or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Validation(format!("cannot normalise {v:?}")));
        }
        Ok(Self(v / n))
    }

    /// Wraps a vector the caller guarantees to be of unit length.
    pub fn from_unit(v: Vec3) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9);
        Self(v)
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(Vec3::new(st * cp, st * sp, ct))
    }

    pub fn north() -> Self {
        Self(Vec3::z())
    }

    pub fn vec(&self) -> &Vec3 {
        &self.0
    }

    /// Latitude `θ ∈ [0, π]`.
    pub fn theta(&self) -> f64 {
        self.0.x.hypot(self.0.y).atan2(self.0.z)
    }

    /// Longitude `φ ∈ [0, 2π)`; zero at the poles.
    pub fn phi(&self) -> f64 {
        if self.0.x == 0.0 && self.0.y == 0.0 {
            0.0
        } else {
            wrap_angle(self.0.y.atan2(self.0.x))
        }
    }

    pub fn polar(&self) -> (f64, f64) {
        (self.theta(), self.phi())
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }
}

/// Great-circle distance, in `[0, π]`.
///
/// Evaluated as `atan2(‖x × y‖, ⟨x, y⟩)`, which equals the arccosine of the
/// clamped inner product but keeps full relative precision for nearly
/// coincident and nearly antipodal points.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    x.0.cross(&y.0).norm().atan2(x.0.dot(&y.0))
}

/// Arccosine of the inner product clamped to `[-1, 1]`.
pub fn geodesic_distance_acos(x: &SpherePoint, y: &SpherePoint) -> f64 {
    x.0.dot(&y.0).clamp(-1.0, 1.0).acos()
}

/// A point together with a unit tangent vector at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    x: SpherePoint,
    r: Vec3,
}

const FRAME_TOL: f64 = 1e-9;

impl TangentFrame {
    /// Builds a frame; `r` must be a unit vector orthogonal to `x` up to
    /// `1e-9`. The stored tangent is re-projected so that the invariants hold
    /// to rounding.
    pub fn new(x: SpherePoint, r: Vec3) -> Result<Self> {
        let dot = x.0.dot(&r);
        if dot.abs() > FRAME_TOL || (r.norm() - 1.0).abs() > FRAME_TOL {
            return Err(Error::Validation(format!(
                "tangent {r:?} is not a unit vector orthogonal to {:?}",
                x.0
            )));
        }
        let r = r - x.0 * dot;
        Ok(Self { x, r: r / r.norm() })
    }

    pub fn point(&self) -> &SpherePoint {
        &self.x
    }

    pub fn tangent(&self) -> &Vec3 {
        &self.r
    }

    /// The rotation mapping `e3 ↦ x` and `e1 ↦ r`.
    pub fn to_rotation(&self) -> Rotation {
        let x = self.x.0;
        let r = self.r;
        let s = x.cross(&r);
        Rotation(Matrix3::from_columns(&[r, s, x]))
    }
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

/// Euler angles of the z-y-z convention `R = R_z(α) R_y(β) R_z(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }
}

impl Rotation {
    /// Validates orthogonality and orientation to `1e-9`.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        if err > 1e-9 || (m.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("matrix is not a rotation: {m:?}")));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn about_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn about_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Counterclockwise rotation by `angle` about the unit `axis`
    /// (right-hand rule, thumb along the axis).
    pub fn about_axis(axis: &Vec3, angle: f64) -> Self {
        let k = axis / axis.norm();
        let (s, c) = angle.sin_cos();
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        Self(Matrix3::identity() + kx * s + kx * kx * (1.0 - c))
    }

    pub fn from_euler(e: EulerAngles) -> Self {
        Self(Self::about_z(e.alpha).0 * Self::about_y(e.beta).0 * Self::about_z(e.gamma).0)
    }

    /// Euler angles with `α, γ ∈ [0, 2π)` and `β ∈ [0, π]`.
    ///
    /// When `sin β < 1e-12` the decomposition is not unique; `γ` is then set
    /// to zero and `α` carries the whole in-plane angle.
    pub fn to_euler(&self) -> EulerAngles {
        let m = &self.0;
        let beta = m[(0, 2)].hypot(m[(1, 2)]).atan2(m[(2, 2)]);
        if beta.sin() < 1e-12 {
            let alpha = if m[(2, 2)] > 0.0 {
                m[(1, 0)].atan2(m[(0, 0)])
            } else {
                (-m[(1, 0)]).atan2(-m[(0, 0)])
            };
            return EulerAngles::new(wrap_angle(alpha), beta, 0.0);
        }
        let alpha = m[(1, 2)].atan2(m[(0, 2)]);
        let gamma = m[(2, 1)].atan2(-m[(2, 0)]);
        EulerAngles::new(wrap_angle(alpha), beta, wrap_angle(gamma))
    }

    pub fn to_frame(&self) -> TangentFrame {
        let x = SpherePoint(self.0.column(2).into_owned());
        let r = self.0.column(0).into_owned();
        TangentFrame { x, r }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        SpherePoint(self.0 * p.0)
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

/// Angle `a ∈ [0, 2π)` with `r = R_x(a) s`, where `R_x` rotates
/// counterclockwise about `x` (right-hand rule, viewed from outside the
/// sphere).
pub fn tangent_angle(x: &SpherePoint, r: &Vec3, s: &Vec3) -> Result<f64> {
    for v in [r, s] {
        if x.0.dot(v).abs() > FRAME_TOL || (v.norm() - 1.0).abs() > FRAME_TOL {
            return Err(Error::Validation(format!("{v:?} is not a unit tangent at {:?}", x.0)));
        }
    }
    let cos = r.dot(s);
    let sin = r.dot(&x.0.cross(s));
    Ok(wrap_angle(sin.atan2(cos)))
}

/// Open spherical cap `{y : d(y, center) < opening}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub center: SpherePoint,
    pub opening: f64,
}

impl Cap {
    pub fn new(center: SpherePoint, opening: f64) -> Result<Self> {
        if !(opening > 0.0 && opening < PI) {
            return Err(Error::Validation(format!("cap opening {opening} not in (0, π)")));
        }
        Ok(Self { center, opening })
    }

    pub fn contains(&self, y: &SpherePoint) -> bool {
        geodesic_distance(&self.center, y) < self.opening
    }

    /// Unit-speed boundary circle `u(t)` together with `u'` and `u''`, where
    /// `t ∈ [0, 2π sin φ)` and `u(0)` is the boundary point in the direction of
    /// `start` (a tangent at the center). Positively oriented: the cap lies to
    /// the left of `u'`.
    pub fn boundary_point(&self, start: &Vec3, t: f64) -> (Vec3, Vec3, Vec3) {
        let z = self.center.0;
        let e1 = start / start.norm();
        let e2 = z.cross(&e1);
        let (sp, cp) = self.opening.sin_cos();
        let w = t / sp;
        let (sw, cw) = w.sin_cos();
        let radial = e1 * cw + e2 * sw;
        let u = z * cp + radial * sp;
        let du = -e1 * sw + e2 * cw;
        let ddu = -radial / sp;
        (u, du, ddu)
    }
}
