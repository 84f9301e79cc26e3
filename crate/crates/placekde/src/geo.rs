//! Coordinate validation and great-circle distance.
//!
//! Coordinates are decimal degrees at every public boundary; conversion to
//! radians happens inside the distance computation. Distances are kilometers
//! of arc on a sphere whose radius defaults to [`EARTH_RADIUS_KM`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sphere radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6372.8;

/// A validated latitude/longitude pair in decimal degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeoPoint", into = "RawGeoPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    /// Build a point, rejecting out-of-range or non-finite coordinates.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::LatitudeRange(lat));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::LongitudeRange(lon));
        }
        Ok(GeoPoint { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

#[derive(Serialize, Deserialize)]
struct RawGeoPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawGeoPoint> for GeoPoint {
    type Error = Error;

    fn try_from(raw: RawGeoPoint) -> Result<Self> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl From<GeoPoint> for RawGeoPoint {
    fn from(p: GeoPoint) -> Self {
        RawGeoPoint { lat: p.lat, lon: p.lon }
    }
}

/// Sphere radius in kilometers; strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EarthRadius(f64);

impl EarthRadius {
    pub fn new(km: f64) -> Result<Self> {
        if !km.is_finite() || km <= 0.0 {
            return Err(Error::Parameter(format!("earth radius {km} must be positive")));
        }
        Ok(EarthRadius(km))
    }

    pub fn km(&self) -> f64 {
        self.0
    }
}

impl Default for EarthRadius {
    fn default() -> Self {
        EarthRadius(EARTH_RADIUS_KM)
    }
}

impl TryFrom<f64> for EarthRadius {
    type Error = Error;

    fn try_from(km: f64) -> Result<Self> {
        EarthRadius::new(km)
    }
}

impl From<EarthRadius> for f64 {
    fn from(r: EarthRadius) -> f64 {
        r.0
    }
}

/// Great-circle distance between two points, in kilometers.
///
/// Haversine formula evaluated on absolute coordinate differences, which
/// makes the result bitwise symmetric in its two arguments. The arcsine
/// argument is clamped to `[0, 1]` so floating-point drift near antipodal
/// points cannot leave the domain.
pub fn haversine_km(a: GeoPoint, b: GeoPoint, radius: EarthRadius) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let half_dlat = (lat_b - lat_a).abs() / 2.0;
    let half_dlon = (b.lon.to_radians() - a.lon.to_radians()).abs() / 2.0;

    let sin_lat = half_dlat.sin();
    let sin_lon = half_dlon.sin();
    let h = (sin_lat * sin_lat + lat_a.cos() * lat_b.cos() * sin_lon * sin_lon).clamp(0.0, 1.0);

    2.0 * radius.km() * h.sqrt().asin()
}

/// Full symmetric distance matrix over `points`, in kilometers.
///
/// `matrix[i][j] == haversine_km(points[i], points[j])`; the diagonal is
/// exactly zero.
pub fn pairwise_distances_km(points: &[GeoPoint], radius: EarthRadius) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("pairwise_distances_km requires at least one point"));
    }
    let n = points.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = haversine_km(points[i], points[j], radius);
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }
    Ok(matrix)
}
