//! Classifier predictions against the brute-force reference, across
//! gating, priors, and bandwidth modes.

use placekde::classify::{ClassifierConfig, ClassifierModel, LabeledPlace, SemanticLabel};
use placekde::cluster::DbscanParams;
use placekde::density::BandwidthSpec;
use placekde::geo::{EarthRadius, GeoPoint, EARTH_RADIUS_KM};
use placekde_testkit::kde::{ref_class_scores, ref_predict, RefBandwidth, RefClassifier};
use placekde_testkit::scenario;
use rand::Rng;

struct Instance {
    places: Vec<LabeledPlace>,
    raw: Vec<(f64, f64, usize)>,
    config: ClassifierConfig,
    reference: RefClassifier,
    center: (f64, f64),
    spread: f64,
}

fn random_instance(rng: &mut rand_chacha::ChaCha8Rng, case: usize) -> Instance {
    let n = rng.random_range(1..=30);
    let label_pool = rng.random_range(1..=10);
    let center = (rng.random_range(-60.0..60.0), rng.random_range(-170.0..170.0));
    let spread = rng.random_range(0.1..3.0);

    let mut coords: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        // Every fourth instance duplicates coordinates across places to
        // force exact score ties.
        let location = if case.is_multiple_of(4) && i > 0 && rng.random_range(0..3) == 0 {
            coords[rng.random_range(0..i)]
        } else {
            let (dx, dy) = scenario::standard_normal_pair(rng);
            scenario::offset_km(center, dx * spread, dy * spread)
        };
        coords.push(location);
    }
    let raw: Vec<(f64, f64, usize)> = coords
        .iter()
        .enumerate()
        .map(|(i, &(lat, lon))| {
            let label = SemanticLabel::ALL[(i * 7 + case) % label_pool];
            (lat, lon, label.index())
        })
        .collect();
    let places: Vec<LabeledPlace> = raw
        .iter()
        .enumerate()
        .map(|(i, &(lat, lon, label))| LabeledPlace {
            place_id: format!("p{i}"),
            location: GeoPoint::new(lat, lon).unwrap(),
            label: SemanticLabel::ALL[label],
        })
        .collect();

    let kernel_name = placekde_testkit::kde::REF_KERNELS[case % 7];
    let (bandwidth, ref_bandwidth) = if case.is_multiple_of(2) {
        let h = rng.random_range(0.02..2.0);
        (BandwidthSpec::fixed(h).unwrap(), RefBandwidth::Fixed(h))
    } else {
        let k = rng.random_range(1..=20);
        (BandwidthSpec::balloon(k, 0.001).unwrap(), RefBandwidth::Balloon { k, floor_km: 0.001 })
    };
    let gating = if case.is_multiple_of(3) {
        let eps_km = rng.random_range(0.1..1.0);
        let min_pts = rng.random_range(2..=5);
        Some((eps_km, min_pts))
    } else {
        None
    };
    let use_priors = case.is_multiple_of(5);
    let pooled_balloon = case.is_multiple_of(6);

    let config = ClassifierConfig {
        kernel: kernel_name.name().parse().unwrap(),
        bandwidth,
        gating: gating.map(|(eps, mp)| DbscanParams::new(eps, mp).unwrap()),
        use_priors,
        pooled_balloon,
        radius: EarthRadius::default(),
    };
    let reference = RefClassifier {
        kernel: kernel_name,
        bandwidth: ref_bandwidth,
        gating,
        use_priors,
        pooled_balloon,
        radius_km: EARTH_RADIUS_KM,
    };
    Instance { places, raw, config, reference, center, spread }
}

#[test]
fn five_hundred_instances_predict_identically_to_the_oracle() {
    let mut rng = scenario::rng(0xc1a55);
    let mut tie_instances = 0;
    for case in 0..500 {
        let instance = random_instance(&mut rng, case);
        let model = ClassifierModel::fit(&instance.places, instance.config).unwrap();
        if case.is_multiple_of(4) {
            tie_instances += 1;
        }

        for probe_case in 0..4 {
            let probe_raw = if probe_case == 0 {
                // Probe on top of a training point: the sharpest tie case.
                let (lat, lon, _) = instance.raw[0];
                (lat, lon)
            } else {
                let (dx, dy) = scenario::standard_normal_pair(&mut rng);
                scenario::offset_km(
                    instance.center,
                    dx * instance.spread * 1.5,
                    dy * instance.spread * 1.5,
                )
            };
            let probe = GeoPoint::new(probe_raw.0, probe_raw.1).unwrap();

            let ours = model.predict(probe);
            let expected = ref_predict(&instance.raw, probe_raw, &instance.reference);
            assert_eq!(
                ours.index(),
                expected,
                "case {case}, probe {probe_case}: {ours} vs index {expected}"
            );
        }
    }
    assert!(tie_instances > 100);
}

#[test]
fn class_scores_track_the_oracle_numerically() {
    let mut rng = scenario::rng(0x5c07e5);
    for case in 0..100 {
        let instance = random_instance(&mut rng, case);
        let model = ClassifierModel::fit(&instance.places, instance.config).unwrap();
        let (dx, dy) = scenario::standard_normal_pair(&mut rng);
        let probe_raw = scenario::offset_km(instance.center, dx * instance.spread, dy);
        let probe = GeoPoint::new(probe_raw.0, probe_raw.1).unwrap();

        let ours = model.class_scores(probe);
        let expected = ref_class_scores(&instance.raw, probe_raw, &instance.reference);
        for label in SemanticLabel::ALL {
            let a = ours.get(label);
            let b = expected[label.index()];
            assert!(
                (a - b).abs() <= 1e-9 * b.abs().max(1e-12),
                "case {case}, {label}: {a} vs {b}"
            );
        }
    }
}
