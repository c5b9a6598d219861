//! Spherical harmonics, quadrature grids and harmonic transforms.

mod grid;
mod harmonics;
pub mod io;
pub mod legendre;
mod transform;

pub use grid::QuadratureGrid;
pub use harmonics::{order_sign, sph_harm, HarmonicCoeffs};
pub use legendre::{assoc_legendre, legendre, NormalizedLegendre};
pub use transform::{
    max_order, sht_forward, sht_forward_real, synthesize, synthesize_grid, synthesize_row,
};
