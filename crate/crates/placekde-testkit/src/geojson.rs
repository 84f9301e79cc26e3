//! Structural validation of exported grid GeoJSON, on top of the
//! `geojson` parser rather than the code that wrote the file.

use std::collections::BTreeMap;
use std::str::FromStr;

pub const CANONICAL_LABELS: [&str; 10] = [
    "bar_restaurant",
    "outdoor_sports",
    "indoor_sports",
    "home",
    "home_of_friend",
    "transport",
    "work",
    "shop",
    "holiday_resort",
    "work_of_friend",
];

pub struct GridFeature {
    pub row: u64,
    pub col: u64,
    pub label: String,
    pub scores: BTreeMap<String, f64>,
    /// The outer ring without the closing repeat, as (lon, lat).
    pub ring: Vec<(f64, f64)>,
}

impl GridFeature {
    /// Ring centroid as (lat, lon), handy for re-probing the model.
    pub fn center(&self) -> (f64, f64) {
        let n = self.ring.len() as f64;
        let (lon, lat) = self
            .ring
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
        (lat / n, lon / n)
    }
}

/// Parse and check an exported FeatureCollection: rectangular closed
/// counter-clockwise rings, in-range coordinates, canonical label, and a
/// non-negative score for every label. Returns per-feature summaries.
pub fn validate_grid_geojson(text: &str) -> Result<Vec<GridFeature>, String> {
    let parsed =
        geojson::GeoJson::from_str(text).map_err(|e| format!("not parseable GeoJSON: {e}"))?;
    let collection = match parsed {
        geojson::GeoJson::FeatureCollection(fc) => fc,
        other => return Err(format!("expected a FeatureCollection, got {other:?}")),
    };

    let mut out = Vec::new();
    for (i, feature) in collection.features.iter().enumerate() {
        let geometry =
            feature.geometry.as_ref().ok_or_else(|| format!("feature {i} has no geometry"))?;
        let rings = match &geometry.value {
            geojson::Value::Polygon(rings) => rings,
            other => return Err(format!("feature {i}: expected Polygon, got {other:?}")),
        };
        if rings.len() != 1 {
            return Err(format!("feature {i}: expected 1 ring, got {}", rings.len()));
        }
        let ring = &rings[0];
        if ring.len() != 5 {
            return Err(format!("feature {i}: expected 5 positions, got {}", ring.len()));
        }
        if ring[0] != ring[4] {
            return Err(format!("feature {i}: ring is not closed"));
        }
        let mut shoelace = 0.0;
        let mut points = Vec::new();
        for w in ring.windows(2) {
            let (x0, y0) = (w[0][0], w[0][1]);
            let (x1, y1) = (w[1][0], w[1][1]);
            shoelace += x0 * y1 - x1 * y0;
        }
        for pos in &ring[..4] {
            if pos.len() != 2 {
                return Err(format!("feature {i}: position arity {}", pos.len()));
            }
            let (lon, lat) = (pos[0], pos[1]);
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(format!("feature {i}: coordinate ({lon}, {lat}) out of range"));
            }
            points.push((lon, lat));
        }
        if shoelace <= 0.0 {
            return Err(format!("feature {i}: ring winds clockwise"));
        }

        let props =
            feature.properties.as_ref().ok_or_else(|| format!("feature {i} has no properties"))?;
        let row = props
            .get("row")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| format!("feature {i}: missing integer `row`"))?;
        let col = props
            .get("col")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| format!("feature {i}: missing integer `col`"))?;
        let label = props
            .get("label")
            .and_then(|v| v.as_str())
            .ok_or_else(|| format!("feature {i}: missing string `label`"))?;
        if !CANONICAL_LABELS.contains(&label) {
            return Err(format!("feature {i}: unknown label `{label}`"));
        }
        let mut scores = BTreeMap::new();
        for name in CANONICAL_LABELS {
            let key = format!("score_{name}");
            let value = props
                .get(&key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| format!("feature {i}: missing numeric `{key}`"))?;
            if !value.is_finite() || value < 0.0 {
                return Err(format!("feature {i}: bad score {value} for `{key}`"));
            }
            scores.insert(name.to_string(), value);
        }

        out.push(GridFeature {
            row,
            col,
            label: label.to_string(),
            scores,
            ring: points,
        });
    }
    Ok(out)
}
