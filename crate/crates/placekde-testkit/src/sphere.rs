//! Great-circle distance along the atan2 route.

/// Distance between two lat/lon points (degrees) on a sphere of the
/// given radius, using the full-quadrant arctangent form of the
/// haversine central angle.
pub fn sphere_distance_km(
    lat1: f64,
    lon1: f64,
    lat2: f64,
    lon2: f64,
    radius_km: f64,
) -> f64 {
    let to_rad = std::f64::consts::PI / 180.0;
    let phi1 = lat1 * to_rad;
    let phi2 = lat2 * to_rad;
    let half_dphi = (lat2 - lat1) * to_rad / 2.0;
    let half_dlam = (lon2 - lon1) * to_rad / 2.0;
    let a = half_dphi.sin().powi(2) + phi1.cos() * phi2.cos() * half_dlam.sin().powi(2);
    let central = 2.0 * a.max(0.0).sqrt().atan2((1.0 - a).max(0.0).sqrt());
    radius_km * central
}
