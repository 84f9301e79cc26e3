//! Clustering equivalence against the naive depth-first reference.

use std::time::Instant;

use placekde::cluster::{dbscan, DbscanParams, PointLabel};
use placekde::geo::{EarthRadius, GeoPoint, EARTH_RADIUS_KM};
use placekde_testkit::dbscan::{naive_dbscan, naive_region_of};
use placekde_testkit::scenario;
use rand::Rng;

/// Mixed-density instances: town-sized point clouds with a few tight
/// pockets so all of core, border, and noise points occur.
fn random_instance(rng: &mut rand_chacha::ChaCha8Rng) -> Vec<(f64, f64)> {
    let n = rng.random_range(1..=300);
    let center = (rng.random_range(-60.0..60.0), rng.random_range(-170.0..170.0));
    let spread_km = rng.random_range(0.3..6.0);
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let (dx, dy) = scenario::standard_normal_pair(rng);
        // Half the points collapse toward one of three pocket centers.
        let pocket = rng.random_range(0..6);
        let (sigma, anchor) = if pocket < 3 {
            (spread_km / 20.0, scenario::offset_km(center, pocket as f64 * 2.0, 0.0))
        } else {
            (spread_km, center)
        };
        pts.push(scenario::offset_km(anchor, dx * sigma, dy * sigma));
    }
    pts
}

#[test]
fn two_hundred_random_instances_match_the_reference_partition() {
    let started = Instant::now();
    let mut rng = scenario::rng(0xdb5ca);
    for case in 0..200 {
        let raw = random_instance(&mut rng);
        let eps_km = rng.random_range(0.05..1.5);
        let min_pts = rng.random_range(1..=8);

        let points: Vec<GeoPoint> =
            raw.iter().map(|&(lat, lon)| GeoPoint::new(lat, lon).unwrap()).collect();
        let params = DbscanParams::new(eps_km, min_pts).unwrap();
        let ours = dbscan(&points, &params, EarthRadius::default()).unwrap();
        let reference = naive_dbscan(&raw, eps_km, min_pts, EARTH_RADIUS_KM);

        assert_eq!(
            ours.num_clusters(),
            reference.num_clusters,
            "case {case}: cluster counts diverge"
        );
        for i in 0..raw.len() {
            let ours_label = match ours.labels()[i] {
                PointLabel::Cluster(id) => Some(id),
                PointLabel::Noise => None,
            };
            assert_eq!(
                ours_label, reference.labels[i],
                "case {case}, point {i}: labels diverge (eps {eps_km}, min_pts {min_pts})"
            );
            assert_eq!(
                ours.is_core(i),
                reference.core[i],
                "case {case}, point {i}: core flags diverge"
            );
        }
    }
    assert!(started.elapsed().as_secs_f64() < 30.0, "took {:?}", started.elapsed());
}

#[test]
fn region_lookup_matches_the_reference() {
    let mut rng = scenario::rng(0x4e9107);
    for case in 0..50 {
        let raw = random_instance(&mut rng);
        let eps_km = rng.random_range(0.1..1.0);
        let min_pts = rng.random_range(2..=6);
        let points: Vec<GeoPoint> =
            raw.iter().map(|&(lat, lon)| GeoPoint::new(lat, lon).unwrap()).collect();
        let params = DbscanParams::new(eps_km, min_pts).unwrap();
        let ours = dbscan(&points, &params, EarthRadius::default()).unwrap();
        let reference = naive_dbscan(&raw, eps_km, min_pts, EARTH_RADIUS_KM);

        for probe_case in 0..20 {
            let base = raw[rng.random_range(0..raw.len())];
            let (dx, dy) = scenario::standard_normal_pair(&mut rng);
            let probe_raw = scenario::offset_km(base, dx * eps_km, dy * eps_km);
            let probe = GeoPoint::new(probe_raw.0, probe_raw.1).unwrap();
            assert_eq!(
                ours.region_of(probe),
                naive_region_of(&raw, &reference, probe_raw, eps_km, EARTH_RADIUS_KM),
                "case {case}, probe {probe_case}"
            );
        }
    }
}
