//! Directional polynomial wavelet frames on the two-sphere and the analysis of
//! jump discontinuities along smooth curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, geodesic distances, caps, rotations and the
//!   unit-tangent-bundle / Euler-angle parameterisations of SO(3).
//! * [`sh`]: Legendre functions, spherical harmonics, Gauss-Legendre grids and
//!   forward/inverse spherical-harmonic transforms.
//! * [`wigner`]: Wigner d- and D-functions, rotation of harmonic expansions and
//!   synthesis of coefficient maps on SO(3).
//! * [`wavelet`]: the window function, the directionality component and the
//!   directional wavelets built from them.
//! * [`region`]: regions bounded by smooth curves, boundary curves, osculating
//!   caps and harmonic coefficients of indicator functions.
//! * [`edge`]: frame coefficients, their asymptotic leading terms, decay
//!   studies and peak extraction.
//!
//! With the default `parallel` feature the heavy loops run on rayon; without it
//! every routine falls back to sequential iteration with identical results.

pub mod edge;
pub mod error;
pub mod geometry;
pub mod io;
pub mod map;
pub mod par;
pub mod quad;
pub mod region;
pub mod sh;
pub mod wavelet;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
