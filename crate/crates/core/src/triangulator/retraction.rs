//! Radial retraction onto the tube boundary along segments toward a fixed interior point.

use crate::error::{Error, Result};
use crate::hyperbolic::{geodesic_lerp, segment_cone_clip, Cone, HVec, PointUHS};
use crate::tube::TubeCone;

/// Entry point of the segment `[p, s]` into the cone. Points on the cone boundary are fixed.
pub fn retraction_point(p: &PointUHS, s: &PointUHS, cone: &Cone) -> Result<PointUHS> {
    if !cone.contains(s, 1e-12) {
        return Err(Error::InvalidParameter("retraction center lies outside the cone".into()));
    }
    if !cone.in_exterior(p, 1e-12) {
        return Err(Error::InvalidParameter("retracted point lies inside the open cone".into()));
    }
    if cone.contains(p, 1e-12) {
        return Ok(*p);
    }
    let (f0, _) = segment_cone_clip(p, s, cone).ok_or(Error::SegmentMissesCone)?;
    let x = geodesic_lerp(&p.to_hyperboloid(), &s.to_hyperboloid(), f0);
    Ok(PointUHS::from_hyperboloid(&x))
}

/// [`retraction_point`] for the tube around the vertical axis, in hyperboloid coordinates.
pub fn retract_to_tube(p: &HVec, s: &HVec, cone: &TubeCone) -> Result<HVec> {
    if !cone.contains(s) {
        return Err(Error::InvalidParameter("retraction center lies outside the tube".into()));
    }
    let level = cone.level(p);
    if level.abs() < 1e-14 {
        return Ok(*p);
    }
    if level < 0.0 {
        return Err(Error::InvalidParameter("retracted point lies inside the open tube".into()));
    }
    let l = *cone.crossings(p, s).first().ok_or(Error::SegmentMissesCone)?;
    Ok((*p * (1.0 - l) + *s * l).to_point())
}
