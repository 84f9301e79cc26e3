//! Rasterized map annotation: probe a classifier on a regular lat/lon grid
//! and export the result as GeoJSON.
//!
//! Cell counts come from the box's physical extents: north-south from the
//! latitude span, east-west from the longitude span scaled by the cosine of
//! the mid-latitude. Row 0 is the northernmost band, column 0 the
//! westernmost; cells partition the box exactly in degree space.

use std::io::Write;

use crate::classify::{ClassScores, ClassifierModel, SemanticLabel};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Largest allowed number of grid cells.
pub const CELL_BUDGET: u64 = 10_000_000;

/// An axis-aligned lat/lon rectangle; no antimeridian crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    min_lat: f64,
    min_lon: f64,
    max_lat: f64,
    max_lon: f64,
}

impl BoundingBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        // Corner validation also covers the coordinate ranges.
        GeoPoint::new(min_lat, min_lon)?;
        GeoPoint::new(max_lat, max_lon)?;
        if min_lat >= max_lat {
            return Err(Error::Parameter(format!(
                "bounding box needs min_lat < max_lat, got {min_lat} and {max_lat}"
            )));
        }
        if min_lon >= max_lon {
            return Err(Error::Parameter(format!(
                "bounding box needs min_lon < max_lon, got {min_lon} and {max_lon}"
            )));
        }
        Ok(BoundingBox { min_lat, min_lon, max_lat, max_lon })
    }

    pub fn min_lat(&self) -> f64 {
        self.min_lat
    }

    pub fn min_lon(&self) -> f64 {
        self.min_lon
    }

    pub fn max_lat(&self) -> f64 {
        self.max_lat
    }

    pub fn max_lon(&self) -> f64 {
        self.max_lon
    }
}

impl std::str::FromStr for BoundingBox {
    type Err = Error;

    /// Parses `minLat,minLon,maxLat,maxLon`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parameter(format!(
                "bounding box `{s}` must be minLat,minLon,maxLat,maxLon"
            )));
        }
        let mut values = [0.0; 4];
        for (v, part) in values.iter_mut().zip(&parts) {
            *v = part
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid bounding box number `{part}`")))?;
        }
        BoundingBox::new(values[0], values[1], values[2], values[3])
    }
}

/// One annotated grid cell.
#[derive(Clone, Debug)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub center: GeoPoint,
    pub predicted: SemanticLabel,
    pub scores: ClassScores,
}

/// A fully annotated grid, cells in row-major order.
#[derive(Clone, Debug)]
pub struct AnnotatedGrid {
    bbox: BoundingBox,
    cell_m: f64,
    rows: usize,
    cols: usize,
    cells: Vec<GridCell>,
}

impl AnnotatedGrid {
    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn cell_m(&self) -> f64 {
        self.cell_m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }
}

/// Probe `model` at every cell center of a `cell_m`-meter grid over `bbox`.
///
/// Each cell's label equals a standalone `predict` call at its center. The
/// grid may not exceed [`CELL_BUDGET`] cells.
pub fn annotate_grid(
    model: &ClassifierModel,
    bbox: BoundingBox,
    cell_m: f64,
) -> Result<AnnotatedGrid> {
    if !cell_m.is_finite() || cell_m <= 0.0 {
        return Err(Error::Parameter(format!("cell size {cell_m} m must be positive")));
    }
    let meters_per_degree = model.config().radius.km() * std::f64::consts::PI / 180.0 * 1000.0;
    let ns_extent_m = (bbox.max_lat - bbox.min_lat) * meters_per_degree;
    let mid_lat = ((bbox.min_lat + bbox.max_lat) / 2.0).to_radians();
    let ew_extent_m = (bbox.max_lon - bbox.min_lon) * meters_per_degree * mid_lat.cos();

    // The epsilon keeps an extent that is an exact multiple of the cell
    // size from spilling into an extra row of slivers.
    let count = |extent_m: f64| ((extent_m / cell_m - 1e-9).ceil().max(1.0)) as u64;
    let rows = count(ns_extent_m);
    let cols = count(ew_extent_m);
    let total = rows * cols;
    if total > CELL_BUDGET {
        return Err(Error::CellBudget { cells: total, budget: CELL_BUDGET });
    }
    let rows = rows as usize;
    let cols = cols as usize;

    let dlat = (bbox.max_lat - bbox.min_lat) / rows as f64;
    let dlon = (bbox.max_lon - bbox.min_lon) / cols as f64;
    let mut cells = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        let lat = bbox.max_lat - (row as f64 + 0.5) * dlat;
        for col in 0..cols {
            let lon = bbox.min_lon + (col as f64 + 0.5) * dlon;
            let center = GeoPoint::new(lat, lon).expect("cell center is inside the box");
            let scores = model.class_scores(center);
            let predicted = model.predict_from(&scores);
            cells.push(GridCell { row, col, center, predicted, scores });
        }
    }
    Ok(AnnotatedGrid { bbox, cell_m, rows, cols, cells })
}

/// Write `grid` as a GeoJSON FeatureCollection: one counter-clockwise
/// rectangle per cell with `row`, `col`, `label`, and per-label
/// `score_<label>` properties. Fixed decimal formatting (6 decimals for
/// coordinates, 9 significant digits for scores) keeps the bytes
/// reproducible.
pub fn emit_geojson(grid: &AnnotatedGrid, w: &mut impl Write) -> std::io::Result<()> {
    let bbox = grid.bbox;
    let dlat = (bbox.max_lat - bbox.min_lat) / grid.rows as f64;
    let dlon = (bbox.max_lon - bbox.min_lon) / grid.cols as f64;

    writeln!(w, "{{\"type\":\"FeatureCollection\",\"features\":[")?;
    for (i, cell) in grid.cells.iter().enumerate() {
        let north = bbox.max_lat - cell.row as f64 * dlat;
        let south = bbox.max_lat - (cell.row + 1) as f64 * dlat;
        let west = bbox.min_lon + cell.col as f64 * dlon;
        let east = bbox.min_lon + (cell.col + 1) as f64 * dlon;

        write!(
            w,
            "{{\"type\":\"Feature\",\"geometry\":{{\"type\":\"Polygon\",\"coordinates\":\
             [[[{west:.6},{south:.6}],[{east:.6},{south:.6}],[{east:.6},{north:.6}],\
             [{west:.6},{north:.6}],[{west:.6},{south:.6}]]]}},\"properties\":{{\
             \"row\":{},\"col\":{},\"label\":\"{}\"",
            cell.row, cell.col, cell.predicted
        )?;
        for label in SemanticLabel::ALL {
            write!(w, ",\"score_{label}\":{:.8e}", cell.scores.get(label))?;
        }
        let separator = if i + 1 < grid.cells.len() { "," } else { "" };
        writeln!(w, "}}}}{separator}")?;
    }
    writeln!(w, "]}}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{ClassifierConfig, LabeledPlace};
    use crate::geo::EARTH_RADIUS_KM;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn single_label_model() -> ClassifierModel {
        let training: Vec<LabeledPlace> = (0..5)
            .map(|i| LabeledPlace {
                place_id: format!("h{i}"),
                location: p(0.001, 0.001 + 0.0001 * i as f64),
                label: SemanticLabel::Home,
            })
            .collect();
        ClassifierModel::fit(&training, ClassifierConfig::default()).unwrap()
    }

    /// Degrees of latitude spanning `km` kilometers on the default sphere.
    fn deg_for_km(km: f64) -> f64 {
        km / (EARTH_RADIUS_KM * std::f64::consts::PI / 180.0)
    }

    #[test]
    fn bbox_parses_and_validates() {
        let b: BoundingBox = "46.1,6.1,46.3,6.4".parse().unwrap();
        assert_eq!(b.min_lat(), 46.1);
        assert_eq!(b.max_lon(), 6.4);
        assert!("46.1,6.1,46.3".parse::<BoundingBox>().is_err());
        assert!("46.3,6.1,46.1,6.4".parse::<BoundingBox>().is_err());
        assert!("46.1,6.4,46.3,6.1".parse::<BoundingBox>().is_err());
        assert!("91,6.1,92,6.4".parse::<BoundingBox>().is_err());
        assert!("a,b,c,d".parse::<BoundingBox>().is_err());
    }

    #[test]
    fn square_kilometer_at_half_kilometer_cells_is_two_by_two() {
        let side = deg_for_km(1.0);
        let bbox = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let grid = annotate_grid(&single_label_model(), bbox, 500.0).unwrap();
        assert_eq!((grid.rows(), grid.cols()), (2, 2));
        assert_eq!(grid.cells().len(), 4);
    }

    #[test]
    fn single_label_model_annotates_every_cell_with_it() {
        let side = deg_for_km(1.0);
        let bbox = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let grid = annotate_grid(&single_label_model(), bbox, 250.0).unwrap();
        assert!(grid.cells().iter().all(|c| c.predicted == SemanticLabel::Home));
    }

    #[test]
    fn cell_centers_match_standalone_predictions() {
        let model = single_label_model();
        let side = deg_for_km(2.0);
        let bbox = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let grid = annotate_grid(&model, bbox, 500.0).unwrap();
        for cell in grid.cells() {
            assert_eq!(cell.predicted, model.predict(cell.center));
            assert_eq!(cell.scores, model.class_scores(cell.center));
        }
    }

    #[test]
    fn east_west_cell_count_shrinks_with_latitude() {
        // The same degree span covers half the meters at 60N.
        let side = deg_for_km(4.0);
        let equator = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let north = BoundingBox::new(60.0 - side / 2.0, 0.0, 60.0 + side / 2.0, side).unwrap();
        let model = single_label_model();
        let at_equator = annotate_grid(&model, equator, 1000.0).unwrap();
        let at_60n = annotate_grid(&model, north, 1000.0).unwrap();
        assert_eq!(at_equator.cols(), 4);
        assert_eq!(at_60n.cols(), 2);
        assert_eq!(at_60n.rows(), 4);
    }

    #[test]
    fn oversized_grid_is_rejected_before_allocation() {
        let bbox = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        match annotate_grid(&single_label_model(), bbox, 1.0) {
            Err(Error::CellBudget { cells, budget }) => {
                assert!(cells > budget);
                assert_eq!(budget, CELL_BUDGET);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_cell_size_is_rejected() {
        let bbox = BoundingBox::new(0.0, 0.0, 0.01, 0.01).unwrap();
        assert!(annotate_grid(&single_label_model(), bbox, 0.0).is_err());
        assert!(annotate_grid(&single_label_model(), bbox, -5.0).is_err());
    }

    fn emit_to_string(grid: &AnnotatedGrid) -> String {
        let mut buf = Vec::new();
        emit_geojson(grid, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn one_cell_grid_emits_a_closed_ccw_ring() {
        let side = deg_for_km(0.4);
        let bbox = BoundingBox::new(10.0, 20.0, 10.0 + side, 20.0 + side).unwrap();
        let grid = annotate_grid(&single_label_model(), bbox, 500.0).unwrap();
        assert_eq!(grid.cells().len(), 1);

        let text = emit_to_string(&grid);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["type"], "FeatureCollection");
        let features = parsed["features"].as_array().unwrap();
        assert_eq!(features.len(), 1);

        let ring = features[0]["geometry"]["coordinates"][0].as_array().unwrap();
        assert_eq!(ring.len(), 5);
        assert_eq!(ring[0], ring[4]);
        // Shoelace sum positive means counter-clockwise.
        let shoelace: f64 = (0..4)
            .map(|i| {
                let (x0, y0) =
                    (ring[i][0].as_f64().unwrap(), ring[i][1].as_f64().unwrap());
                let (x1, y1) =
                    (ring[i + 1][0].as_f64().unwrap(), ring[i + 1][1].as_f64().unwrap());
                x0 * y1 - x1 * y0
            })
            .sum();
        assert!(shoelace > 0.0);
    }

    #[test]
    fn two_by_two_grid_emits_four_features_with_indices() {
        let side = deg_for_km(1.0);
        let bbox = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let grid = annotate_grid(&single_label_model(), bbox, 500.0).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&emit_to_string(&grid)).unwrap();
        let features = parsed["features"].as_array().unwrap();
        assert_eq!(features.len(), 4);
        for f in features {
            let row = f["properties"]["row"].as_u64().unwrap();
            let col = f["properties"]["col"].as_u64().unwrap();
            assert!(row < 2 && col < 2);
            assert_eq!(f["properties"]["label"], "home");
            for label in SemanticLabel::ALL {
                assert!(f["properties"][format!("score_{label}")].is_number());
            }
        }
    }

    #[test]
    fn emission_is_deterministic() {
        let side = deg_for_km(1.0);
        let bbox = BoundingBox::new(46.0, 6.0, 46.0 + side, 6.0 + side).unwrap();
        let grid = annotate_grid(&single_label_model(), bbox, 300.0).unwrap();
        assert_eq!(emit_to_string(&grid), emit_to_string(&grid));
    }

    #[test]
    fn emitted_scores_round_trip_to_formatted_precision() {
        let side = deg_for_km(0.4);
        let bbox = BoundingBox::new(0.0, 0.0, side, side).unwrap();
        let model = single_label_model();
        let grid = annotate_grid(&model, bbox, 500.0).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&emit_to_string(&grid)).unwrap();
        let props = &parsed["features"][0]["properties"];
        for cell in grid.cells() {
            for label in SemanticLabel::ALL {
                let stored = props[format!("score_{label}")].as_f64().unwrap();
                let expected = cell.scores.get(label);
                let tolerance = (expected.abs() * 1e-8).max(1e-300);
                assert!((stored - expected).abs() <= tolerance, "{label}: {stored} vs {expected}");
            }
        }
    }
}
