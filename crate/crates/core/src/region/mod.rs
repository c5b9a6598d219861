//! Regions bounded by smooth curves, their boundary curves, osculating caps
//! and spherical-harmonic coefficients of indicator functions.

mod cap;
mod coeffs;
mod curve;
mod graph;

pub use cap::{cap_area_difference, cap_harmonic_coeffs, osculating_cap, signed_opening, tangency_residuals};
pub use coeffs::{graph_region_coeffs, region_harmonic_coeffs, region_harmonic_coeffs_on, tail_energy_ratio, RegionCoeffs};
pub use curve::{
    boundary_curve, nearest_boundary_point, segment_validate, select_segment, subsegments, BoundaryCurve,
    CurvePoint, NearestPoint, SegmentReport,
};
pub use graph::{region_indicator, GraphRegion, RegionSpec};
