//! Raw-log loading and per-place location inference.
//!
//! A place's coordinate is the arithmetic mean of the WiFi observations
//! recorded during its visits; only when no visit window contains a WiFi
//! observation do GPS samples get the same treatment, and places with
//! neither are excluded. CSV loaders report malformed input with 1-based
//! line numbers (the header is line 1).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::classify::{LabeledPlace, SemanticLabel, LABEL_COUNT};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// One visit to a place, bounded by inclusive unix-second timestamps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitRecord {
    pub place_id: String,
    pub visit_id: String,
    pub start_ts: i64,
    pub end_ts: i64,
}

impl VisitRecord {
    fn contains(&self, ts: i64) -> bool {
        self.start_ts <= ts && ts <= self.end_ts
    }
}

/// A WiFi hotspot sighting: access-point id, position, timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct WifiObservation {
    pub ap_id: String,
    pub location: GeoPoint,
    pub ts: i64,
}

/// A timestamped GPS fix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpsSample {
    pub location: GeoPoint,
    pub ts: i64,
}

/// The coordinate inferred for a place, tagged with its evidence source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InferredLocation {
    Wifi { location: GeoPoint, sample_count: usize },
    Gps { location: GeoPoint, sample_count: usize },
    /// No in-window observation of either kind; the place is excluded.
    Unresolved,
}

impl InferredLocation {
    pub fn location(&self) -> Option<GeoPoint> {
        match self {
            InferredLocation::Wifi { location, .. } | InferredLocation::Gps { location, .. } => {
                Some(*location)
            }
            InferredLocation::Unresolved => None,
        }
    }

    pub fn sample_count(&self) -> usize {
        match self {
            InferredLocation::Wifi { sample_count, .. }
            | InferredLocation::Gps { sample_count, .. } => *sample_count,
            InferredLocation::Unresolved => 0,
        }
    }

    pub fn source_name(&self) -> &'static str {
        match self {
            InferredLocation::Wifi { .. } => "wifi",
            InferredLocation::Gps { .. } => "gps",
            InferredLocation::Unresolved => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocationInferenceResult {
    pub place_id: String,
    pub inferred: InferredLocation,
}

/// Knobs for sensitivity analysis; defaults reproduce the plain pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InferenceOptions {
    /// Average on the unit sphere instead of over raw degrees.
    pub spherical_centroid: bool,
    /// Count each access point at most once per place instead of once per
    /// sighting.
    pub dedup_aps: bool,
}

/// Mean of latitudes and of longitudes in degrees. Summing shifted
/// differences keeps the mean of identical points bitwise exact.
fn arithmetic_mean(points: &[GeoPoint]) -> GeoPoint {
    let n = points.len() as f64;
    let (lat0, lon0) = (points[0].lat(), points[0].lon());
    let (mut dlat, mut dlon) = (0.0, 0.0);
    for p in points {
        dlat += p.lat() - lat0;
        dlon += p.lon() - lon0;
    }
    GeoPoint::new(lat0 + dlat / n, lon0 + dlon / n)
        .expect("mean of valid coordinates stays in range")
}

/// Normalized mean of unit vectors; falls back to the arithmetic mean when
/// the vectors cancel out.
fn spherical_centroid(points: &[GeoPoint]) -> GeoPoint {
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for p in points {
        let lat = p.lat().to_radians();
        let lon = p.lon().to_radians();
        x += lat.cos() * lon.cos();
        y += lat.cos() * lon.sin();
        z += lat.sin();
    }
    let horizontal = x.hypot(y);
    if horizontal == 0.0 && z == 0.0 {
        return arithmetic_mean(points);
    }
    let lat = z.atan2(horizontal).to_degrees();
    let lon = y.atan2(x).to_degrees();
    GeoPoint::new(lat, lon).expect("centroid of valid coordinates stays in range")
}

fn mean_location(points: &[GeoPoint], options: InferenceOptions) -> GeoPoint {
    if options.spherical_centroid {
        spherical_centroid(points)
    } else {
        arithmetic_mean(points)
    }
}

/// Infer one place's coordinate from the observations inside its visit
/// windows. Any in-window WiFi observation suppresses GPS entirely.
pub fn infer_place_location(
    place_id: &str,
    visits: &[VisitRecord],
    wifi: &[WifiObservation],
    gps: &[GpsSample],
    options: InferenceOptions,
) -> Result<LocationInferenceResult> {
    for v in visits {
        if v.place_id != place_id {
            return Err(Error::Mismatch(format!(
                "visit {} belongs to place {}, not {place_id}",
                v.visit_id, v.place_id
            )));
        }
    }
    let in_window = |ts: i64| visits.iter().any(|v| v.contains(ts));

    let mut wifi_points = Vec::new();
    let mut seen_aps = BTreeSet::new();
    for obs in wifi {
        if !in_window(obs.ts) {
            continue;
        }
        if options.dedup_aps && !seen_aps.insert(obs.ap_id.as_str()) {
            continue;
        }
        wifi_points.push(obs.location);
    }
    if !wifi_points.is_empty() {
        return Ok(LocationInferenceResult {
            place_id: place_id.to_string(),
            inferred: InferredLocation::Wifi {
                location: mean_location(&wifi_points, options),
                sample_count: wifi_points.len(),
            },
        });
    }

    let gps_points: Vec<GeoPoint> =
        gps.iter().filter(|s| in_window(s.ts)).map(|s| s.location).collect();
    let inferred = if gps_points.is_empty() {
        InferredLocation::Unresolved
    } else {
        InferredLocation::Gps {
            location: mean_location(&gps_points, options),
            sample_count: gps_points.len(),
        }
    };
    Ok(LocationInferenceResult { place_id: place_id.to_string(), inferred })
}

/// Run [`infer_place_location`] for every place appearing in `visits`, in
/// first-appearance order.
pub fn infer_all_locations(
    visits: &[VisitRecord],
    wifi: &[WifiObservation],
    gps: &[GpsSample],
    options: InferenceOptions,
) -> Result<Vec<LocationInferenceResult>> {
    let mut order: Vec<&str> = Vec::new();
    let mut grouped: BTreeMap<&str, Vec<VisitRecord>> = BTreeMap::new();
    for v in visits {
        let slot = grouped.entry(v.place_id.as_str()).or_default();
        if slot.is_empty() {
            order.push(v.place_id.as_str());
        }
        slot.push(v.clone());
    }
    order
        .into_iter()
        .map(|id| infer_place_location(id, &grouped[id], wifi, gps, options))
        .collect()
}

// --- CSV input/output ---------------------------------------------------

fn from_csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

fn open_csv(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(from_csv_error)?;
    let header = rdr.headers().map_err(from_csv_error)?;
    if header.iter().ne(expected_header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected_header.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(rdr)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn check_fields(record: &csv::StringRecord, expected: usize) -> Result<u64> {
    let line = record_line(record);
    if record.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} fields, found {}", record.len()),
        });
    }
    Ok(line)
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} `{field}`"),
    })
}

fn parse_i64(field: &str, name: &str, line: u64) -> Result<i64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} `{field}`"),
    })
}

fn parse_point(lat: &str, lon: &str, line: u64) -> Result<GeoPoint> {
    let lat = parse_f64(lat, "lat", line)?;
    let lon = parse_f64(lon, "lon", line)?;
    GeoPoint::new(lat, lon).map_err(|e| Error::Parse { line, message: e.to_string() })
}

fn non_empty(field: &str, name: &str, line: u64) -> Result<String> {
    if field.is_empty() {
        return Err(Error::Parse { line, message: format!("empty {name}") });
    }
    Ok(field.to_string())
}

/// Load `place_id,label,lat,lon` rows; place ids must be unique.
pub fn load_places(path: &Path) -> Result<Vec<LabeledPlace>> {
    let mut rdr = open_csv(path, &["place_id", "label", "lat", "lon"])?;
    let mut places = Vec::new();
    let mut seen = BTreeSet::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 4)?;
        let place_id = non_empty(&record[0], "place_id", line)?;
        if !seen.insert(place_id.clone()) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate place_id `{place_id}`"),
            });
        }
        let label: SemanticLabel = record[1]
            .parse()
            .map_err(|e: Error| Error::Parse { line, message: e.to_string() })?;
        let location = parse_point(&record[2], &record[3], line)?;
        places.push(LabeledPlace { place_id, location, label });
    }
    Ok(places)
}

/// Write places in the `load_places` format; floats use the shortest
/// representation that round-trips.
pub fn write_places(path: &Path, places: &[LabeledPlace]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(from_csv_error)?;
    wtr.write_record(["place_id", "label", "lat", "lon"]).map_err(from_csv_error)?;
    for p in places {
        wtr.write_record([
            p.place_id.as_str(),
            p.label.name(),
            &p.location.lat().to_string(),
            &p.location.lon().to_string(),
        ])
        .map_err(from_csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Load `place_id,visit_id,start_ts,end_ts` rows.
pub fn load_visits(path: &Path) -> Result<Vec<VisitRecord>> {
    let mut rdr = open_csv(path, &["place_id", "visit_id", "start_ts", "end_ts"])?;
    let mut visits = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 4)?;
        let place_id = non_empty(&record[0], "place_id", line)?;
        let visit_id = non_empty(&record[1], "visit_id", line)?;
        let start_ts = parse_i64(&record[2], "start_ts", line)?;
        let end_ts = parse_i64(&record[3], "end_ts", line)?;
        if start_ts > end_ts {
            return Err(Error::Parse {
                line,
                message: format!("start_ts {start_ts} after end_ts {end_ts}"),
            });
        }
        visits.push(VisitRecord { place_id, visit_id, start_ts, end_ts });
    }
    Ok(visits)
}

/// Load `ap_id,lat,lon,ts` rows.
pub fn load_wifi(path: &Path) -> Result<Vec<WifiObservation>> {
    let mut rdr = open_csv(path, &["ap_id", "lat", "lon", "ts"])?;
    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 4)?;
        let ap_id = non_empty(&record[0], "ap_id", line)?;
        let location = parse_point(&record[1], &record[2], line)?;
        let ts = parse_i64(&record[3], "ts", line)?;
        observations.push(WifiObservation { ap_id, location, ts });
    }
    Ok(observations)
}

/// Load `lat,lon,ts` rows.
pub fn load_gps(path: &Path) -> Result<Vec<GpsSample>> {
    let mut rdr = open_csv(path, &["lat", "lon", "ts"])?;
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 3)?;
        let location = parse_point(&record[0], &record[1], line)?;
        let ts = parse_i64(&record[2], "ts", line)?;
        samples.push(GpsSample { location, ts });
    }
    Ok(samples)
}

/// Load a `place_id,label` mapping.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, SemanticLabel>> {
    let mut rdr = open_csv(path, &["place_id", "label"])?;
    let mut labels = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 2)?;
        let place_id = non_empty(&record[0], "place_id", line)?;
        let label: SemanticLabel = record[1]
            .parse()
            .map_err(|e: Error| Error::Parse { line, message: e.to_string() })?;
        if labels.insert(place_id.clone(), label).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate place_id `{place_id}`"),
            });
        }
    }
    Ok(labels)
}

/// Load external per-place class scores: header `place_id` followed by the
/// ten label names in their fixed order; scores non-negative.
pub fn load_external_scores(path: &Path) -> Result<BTreeMap<String, [f64; LABEL_COUNT]>> {
    let mut expected = vec!["place_id"];
    expected.extend(SemanticLabel::ALL.iter().map(|l| l.name()));
    let mut rdr = open_csv(path, &expected)?;
    let mut scores = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(from_csv_error)?;
        let line = check_fields(&record, 1 + LABEL_COUNT)?;
        let place_id = non_empty(&record[0], "place_id", line)?;
        let mut row = [0.0; LABEL_COUNT];
        for (i, slot) in row.iter_mut().enumerate() {
            let s = parse_f64(&record[1 + i], SemanticLabel::ALL[i].name(), line)?;
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "score {s} for {} must be finite and >= 0",
                        SemanticLabel::ALL[i]
                    ),
                });
            }
            *slot = s;
        }
        if scores.insert(place_id.clone(), row).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate place_id `{place_id}`"),
            });
        }
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn visit(place: &str, id: &str, start: i64, end: i64) -> VisitRecord {
        VisitRecord {
            place_id: place.to_string(),
            visit_id: id.to_string(),
            start_ts: start,
            end_ts: end,
        }
    }

    fn wifi(ap: &str, lat: f64, lon: f64, ts: i64) -> WifiObservation {
        WifiObservation { ap_id: ap.to_string(), location: p(lat, lon), ts }
    }

    fn gps(lat: f64, lon: f64, ts: i64) -> GpsSample {
        GpsSample { location: p(lat, lon), ts }
    }

    fn infer(
        visits: &[VisitRecord],
        wifi: &[WifiObservation],
        gps: &[GpsSample],
    ) -> LocationInferenceResult {
        infer_place_location("p1", visits, wifi, gps, InferenceOptions::default()).unwrap()
    }

    #[test]
    fn single_in_window_wifi_is_used_verbatim() {
        let r = infer(&[visit("p1", "v1", 100, 200)], &[wifi("ap1", 46.5, 6.6, 150)], &[]);
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: p(46.5, 6.6), sample_count: 1 }
        );
    }

    #[test]
    fn wifi_mean_is_arithmetic_over_degrees() {
        let r = infer(
            &[visit("p1", "v1", 100, 200)],
            &[wifi("a", 46.0, 6.0, 120), wifi("b", 47.0, 7.0, 130)],
            &[],
        );
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: p(46.5, 6.5), sample_count: 2 }
        );
    }

    #[test]
    fn gps_is_used_only_without_in_window_wifi() {
        let r = infer(
            &[visit("p1", "v1", 100, 200)],
            // Outside the window: must not suppress GPS.
            &[wifi("a", 40.0, 5.0, 99)],
            &[gps(10.0, 10.0, 150), gps(12.0, 14.0, 160)],
        );
        assert_eq!(
            r.inferred,
            InferredLocation::Gps { location: p(11.0, 12.0), sample_count: 2 }
        );
    }

    #[test]
    fn any_in_window_wifi_suppresses_gps() {
        let r = infer(
            &[visit("p1", "v1", 100, 200)],
            &[wifi("a", 46.0, 6.0, 200)],
            &[gps(10.0, 10.0, 150), gps(12.0, 14.0, 160)],
        );
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: p(46.0, 6.0), sample_count: 1 }
        );
    }

    #[test]
    fn place_without_observations_is_unresolved() {
        let r = infer(&[visit("p1", "v1", 100, 200)], &[wifi("a", 46.0, 6.0, 300)], &[]);
        assert_eq!(r.inferred, InferredLocation::Unresolved);
        assert_eq!(r.inferred.location(), None);
        assert_eq!(r.inferred.sample_count(), 0);
        assert_eq!(r.inferred.source_name(), "none");
    }

    #[test]
    fn window_bounds_are_inclusive() {
        let visits = [visit("p1", "v1", 100, 200)];
        let r = infer(&visits, &[wifi("a", 46.0, 6.0, 100), wifi("b", 47.0, 7.0, 200)], &[]);
        assert_eq!(r.inferred.sample_count(), 2);
        let r = infer(&visits, &[wifi("a", 46.0, 6.0, 99)], &[]);
        assert_eq!(r.inferred, InferredLocation::Unresolved);
        let r = infer(&visits, &[wifi("a", 46.0, 6.0, 201)], &[]);
        assert_eq!(r.inferred, InferredLocation::Unresolved);
    }

    #[test]
    fn observations_from_any_visit_window_count() {
        let visits = [visit("p1", "v1", 100, 200), visit("p1", "v2", 500, 600)];
        let r = infer(&visits, &[wifi("a", 46.0, 6.0, 150), wifi("b", 48.0, 8.0, 550)], &[]);
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: p(47.0, 7.0), sample_count: 2 }
        );
    }

    #[test]
    fn repeated_ap_sightings_each_contribute_by_default() {
        let visits = [visit("p1", "v1", 100, 200)];
        let observations =
            [wifi("a", 46.0, 6.0, 110), wifi("a", 46.0, 6.0, 120), wifi("b", 49.0, 9.0, 130)];
        let r = infer(&visits, &observations, &[]);
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: p(47.0, 7.0), sample_count: 3 }
        );

        let deduped = infer_place_location(
            "p1",
            &visits,
            &observations,
            &[],
            InferenceOptions { dedup_aps: true, ..InferenceOptions::default() },
        )
        .unwrap();
        assert_eq!(
            deduped.inferred,
            InferredLocation::Wifi { location: p(47.5, 7.5), sample_count: 2 }
        );
    }

    #[test]
    fn mean_of_identical_points_is_bitwise_exact() {
        let exact = p(46.123456789, 6.987654321);
        let visits = [visit("p1", "v1", 0, 10)];
        let observations = [
            WifiObservation { ap_id: "a".into(), location: exact, ts: 1 },
            WifiObservation { ap_id: "b".into(), location: exact, ts: 2 },
            WifiObservation { ap_id: "c".into(), location: exact, ts: 3 },
        ];
        let r = infer(&visits, &observations, &[]);
        assert_eq!(
            r.inferred,
            InferredLocation::Wifi { location: exact, sample_count: 3 }
        );
    }

    #[test]
    fn spherical_centroid_differs_at_high_latitude() {
        let visits = [visit("p1", "v1", 0, 10)];
        let observations = [wifi("a", 60.0, 0.0, 1), wifi("b", 60.0, 90.0, 2)];
        let arithmetic = infer(&visits, &observations, &[]);
        let spherical = infer_place_location(
            "p1",
            &visits,
            &observations,
            &[],
            InferenceOptions { spherical_centroid: true, ..InferenceOptions::default() },
        )
        .unwrap();

        let a = arithmetic.inferred.location().unwrap();
        let s = spherical.inferred.location().unwrap();
        assert_eq!(a, p(60.0, 45.0));
        assert!((s.lon() - 45.0).abs() < 1e-9);
        // The great-circle midpoint of two 60N points sits poleward of 60N.
        assert!(s.lat() > 65.0);
    }

    #[test]
    fn mixed_place_ids_are_rejected() {
        let visits = [visit("p1", "v1", 0, 10), visit("p2", "v2", 20, 30)];
        let err = infer_place_location("p1", &visits, &[], &[], InferenceOptions::default());
        assert!(matches!(err, Err(Error::Mismatch(_))));
    }

    #[test]
    fn batch_inference_preserves_first_appearance_order() {
        let visits = [
            visit("zebra", "v1", 0, 10),
            visit("alpha", "v2", 0, 10),
            visit("zebra", "v3", 20, 30),
        ];
        let results =
            infer_all_locations(&visits, &[], &[], InferenceOptions::default()).unwrap();
        let ids: Vec<&str> = results.iter().map(|r| r.place_id.as_str()).collect();
        assert_eq!(ids, ["zebra", "alpha"]);
    }

    fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn places_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let places = vec![
            LabeledPlace {
                place_id: "a".into(),
                location: p(46.51923456, 6.63211234),
                label: SemanticLabel::Home,
            },
            LabeledPlace {
                place_id: "b".into(),
                location: p(-12.000001, 179.9999),
                label: SemanticLabel::HolidayResort,
            },
        ];
        let path = dir.path().join("places.csv");
        write_places(&path, &places).unwrap();
        assert_eq!(load_places(&path).unwrap(), places);
    }

    #[test]
    fn empty_places_file_with_header_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "places.csv", "place_id,label,lat,lon\n");
        assert!(load_places(&path).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_latitude_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path =
            write_file(&dir, "places.csv", "place_id,label,lat,lon\na,home,91.0,6.6\n");
        match load_places(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_and_bad_float_name_their_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "places.csv",
            "place_id,label,lat,lon\na,home,46.5,6.6\nb,castle,46.5,6.6\n",
        );
        match load_places(&path) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("castle"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let path =
            write_file(&dir, "bad_float.csv", "place_id,label,lat,lon\na,home,46.5,east\n");
        match load_places(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_place_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "places.csv",
            "place_id,label,lat,lon\na,home,46.5,6.6\na,work,46.6,6.7\n",
        );
        match load_places(&path) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_reported_as_line_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "places.csv", "id,category,lat,lon\n");
        match load_places(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn visits_validate_timestamp_order() {
        let dir = tempfile::tempdir().unwrap();
        let good = write_file(
            &dir,
            "visits.csv",
            "place_id,visit_id,start_ts,end_ts\np1,v1,100,200\n",
        );
        assert_eq!(load_visits(&good).unwrap(), vec![visit("p1", "v1", 100, 200)]);

        let bad = write_file(
            &dir,
            "bad_visits.csv",
            "place_id,visit_id,start_ts,end_ts\np1,v1,200,100\n",
        );
        match load_visits(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wifi_and_gps_files_load() {
        let dir = tempfile::tempdir().unwrap();
        let wifi_path =
            write_file(&dir, "wifi.csv", "ap_id,lat,lon,ts\nap1,46.5,6.6,100\n");
        assert_eq!(load_wifi(&wifi_path).unwrap(), vec![wifi("ap1", 46.5, 6.6, 100)]);

        let gps_path = write_file(&dir, "gps.csv", "lat,lon,ts\n46.5,6.6,100\n");
        assert_eq!(load_gps(&gps_path).unwrap(), vec![gps(46.5, 6.6, 100)]);
    }

    #[test]
    fn labels_file_maps_ids_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "labels.csv", "place_id,label\np1,home\np2,work\n");
        let labels = load_labels(&path).unwrap();
        assert_eq!(labels["p1"], SemanticLabel::Home);
        assert_eq!(labels["p2"], SemanticLabel::Work);

        let dup = write_file(&dir, "dup.csv", "place_id,label\np1,home\np1,work\n");
        assert!(load_labels(&dup).is_err());
    }

    #[test]
    fn external_scores_enforce_header_and_sign() {
        let dir = tempfile::tempdir().unwrap();
        let header = format!(
            "place_id,{}",
            SemanticLabel::ALL.map(|l| l.name()).join(",")
        );
        let path = write_file(
            &dir,
            "scores.csv",
            &format!("{header}\np1,0.1,0,0,0.5,0,0,0.4,0,0,0\n"),
        );
        let scores = load_external_scores(&path).unwrap();
        assert_eq!(scores["p1"][3], 0.5);

        let bad = write_file(
            &dir,
            "neg.csv",
            &format!("{header}\np1,0.1,0,0,-0.5,0,0,0.4,0,0,0\n"),
        );
        assert!(load_external_scores(&bad).is_err());

        let reordered = write_file(
            &dir,
            "reordered.csv",
            "place_id,home,work,shop,bar_restaurant,outdoor_sports,indoor_sports,home_of_friend,transport,holiday_resort,work_of_friend\n",
        );
        match load_external_scores(&reordered) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
