use crate::geom::P2;
use serde::{Deserialize, Serialize};

/// WGS84 equatorial radius.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoOrigin {
    pub lat: f64,
    pub lon: f64,
}

/// Equirectangular projection onto the tangent plane at `origin`:
/// x points east, y points north, both in meters.
pub fn project_geodetic(lat: f64, lon: f64, origin: GeoOrigin) -> P2 {
    let x = EARTH_RADIUS_M * origin.lat.to_radians().cos() * (lon - origin.lon).to_radians();
    let y = EARTH_RADIUS_M * (lat - origin.lat).to_radians();
    P2::new(x, y)
}

/// Inverse of [`project_geodetic`], returning `(lat, lon)` in degrees.
pub fn unproject(p: P2, origin: GeoOrigin) -> (f64, f64) {
    let lat = origin.lat + (p.y / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon + (p.x / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    (lat, lon)
}
