//! Small-area geodesy on a local planar (equirectangular) projection with
//! cos-latitude correction. Adequate for radii up to a few tens of km,
//! which is far tighter than the Friis model's own sensitivity.

/// Mean Earth radius, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Planar distance in meters between two (latitude, longitude) points in
/// degrees, using the equirectangular projection about their mean latitude.
pub fn planar_distance_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    let mean_lat = ((a.0 + b.0) / 2.0).to_radians();
    let dx = (b.1 - a.1).to_radians() * mean_lat.cos() * EARTH_RADIUS_M;
    let dy = (b.0 - a.0).to_radians() * EARTH_RADIUS_M;
    (dx * dx + dy * dy).sqrt()
}

/// Point at the given bearing (degrees clockwise from north) and planar
/// distance from `origin` (latitude, longitude in degrees).
pub fn destination(origin: (f64, f64), bearing_deg: f64, distance_m: f64) -> (f64, f64) {
    let b = bearing_deg.to_radians();
    let dlat = distance_m * b.cos() / EARTH_RADIUS_M;
    let dlon = distance_m * b.sin() / (EARTH_RADIUS_M * origin.0.to_radians().cos());
    (
        origin.0 + dlat.to_degrees(),
        origin.1 + dlon.to_degrees(),
    )
}
