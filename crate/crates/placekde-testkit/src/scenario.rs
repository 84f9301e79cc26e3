//! Seeded synthetic datasets for the benchmark and oracle suites.
//!
//! Geometry is planar-in-kilometers around an anchor latitude and
//! converted to degrees on the same sphere radius the library defaults
//! to, so stated distances survive the round trip to coordinates.

use placekde::classify::{LabeledPlace, SemanticLabel};
use placekde::geo::{EARTH_RADIUS_KM, GeoPoint};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn km_per_lat_degree() -> f64 {
    EARTH_RADIUS_KM * std::f64::consts::PI / 180.0
}

/// Offset `base` by kilometers east and north.
pub fn offset_km(base: (f64, f64), east_km: f64, north_km: f64) -> (f64, f64) {
    let lat = base.0 + north_km / km_per_lat_degree();
    let lon = base.1 + east_km / (km_per_lat_degree() * base.0.to_radians().cos());
    (lat, lon)
}

/// A standard normal pair via the Box-Muller transform.
pub fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// `n` points drawn uniformly from a lat/lon box.
pub fn uniform_points(
    n: usize,
    lat_range: (f64, f64),
    lon_range: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            (
                rng.random_range(lat_range.0..lat_range.1),
                rng.random_range(lon_range.0..lon_range.1),
            )
        })
        .collect()
}

/// One isotropic Gaussian clump of labeled places.
#[derive(Clone, Copy, Debug)]
pub struct ClumpSpec {
    pub label: SemanticLabel,
    pub center: (f64, f64),
    pub sigma_km: f64,
    pub count: usize,
}

/// Draw every clump, then shuffle so file order carries no label signal.
/// Place ids are `p0, p1, ...` in the shuffled order.
pub fn clumped_places(clumps: &[ClumpSpec], rng: &mut ChaCha8Rng) -> Vec<LabeledPlace> {
    let mut drawn: Vec<(SemanticLabel, (f64, f64))> = Vec::new();
    for clump in clumps {
        for _ in 0..clump.count {
            let (dx, dy) = standard_normal_pair(rng);
            let pos = offset_km(clump.center, dx * clump.sigma_km, dy * clump.sigma_km);
            drawn.push((clump.label, pos));
        }
    }
    drawn.shuffle(rng);
    drawn
        .into_iter()
        .enumerate()
        .map(|(i, (label, (lat, lon)))| LabeledPlace {
            place_id: format!("p{i}"),
            location: GeoPoint::new(lat, lon).expect("generated points stay in range"),
            label,
        })
        .collect()
}

/// `(lat, lon, label index)` triples for the raw-tuple oracles.
pub fn to_raw(places: &[LabeledPlace]) -> Vec<(f64, f64, usize)> {
    places
        .iter()
        .map(|p| (p.location.lat(), p.location.lon(), p.label.index()))
        .collect()
}

pub fn label_counts(places: &[LabeledPlace]) -> [usize; 10] {
    let mut counts = [0; 10];
    for p in places {
        counts[p.label.index()] += 1;
    }
    counts
}

/// Standard normal CDF, accurate to about 1e-7 (rational tail
/// approximation). Good enough for benchmark targets, nowhere near the
/// exact-enumeration comparisons.
pub fn phi(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - phi(-x);
    }
    let t = 1.0 / (1.0 + 0.2316419 * x);
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - pdf * poly
}

/// Two equal-prior isotropic Gaussian classes at this separation share
/// the midline as the optimal decision boundary; the error rate is the
/// mass each class puts past it.
pub fn bayes_error_rate(separation_km: f64, sigma_km: f64) -> f64 {
    phi(-separation_km / (2.0 * sigma_km))
}

/// Two same-spread clumps (`home` west, `work` east) centered
/// `separation_km` apart.
pub fn two_class_places(
    center: (f64, f64),
    separation_km: f64,
    sigma_km: f64,
    per_class: usize,
    seed: u64,
) -> Vec<LabeledPlace> {
    let mut r = rng(seed);
    let clumps = [
        ClumpSpec {
            label: SemanticLabel::Home,
            center: offset_km(center, -separation_km / 2.0, 0.0),
            sigma_km,
            count: per_class,
        },
        ClumpSpec {
            label: SemanticLabel::Work,
            center: offset_km(center, separation_km / 2.0, 0.0),
            sigma_km,
            count: per_class,
        },
    ];
    clumped_places(&clumps, &mut r)
}

/// The heterogeneous-density town benchmark.
///
/// Three towns roughly 20 km apart, each with tight single-label
/// districts (homes, workplaces, a mixed downtown of bars and shops, a
/// small gym block, a spread-out transport belt), plus rural wide-spread
/// classes: outdoor sports grounds, lakeside resorts, and friends' homes
/// scattered across the whole map. District spreads range from 50 m to
/// 1.5 km, so no single bandwidth fits all classes, and the small gym
/// blocks sit isolated so that regioned models shield them from the
/// transport belt's mass.
pub fn town_benchmark_places(seed: u64) -> Vec<LabeledPlace> {
    let mut r = rng(seed);
    let towns = [(46.20, 6.80), (46.38, 6.62), (46.47, 6.98)];
    let mut clumps = Vec::new();
    for &town in &towns {
        let at = |east: f64, north: f64| offset_km(town, east, north);
        clumps.extend([
            ClumpSpec { label: SemanticLabel::Home, center: at(0.6, -0.5), sigma_km: 0.06, count: 12 },
            ClumpSpec { label: SemanticLabel::Work, center: at(-0.8, 0.7), sigma_km: 0.05, count: 8 },
            ClumpSpec {
                label: SemanticLabel::BarRestaurant,
                center: at(0.05, 0.05),
                sigma_km: 0.12,
                count: 7,
            },
            ClumpSpec { label: SemanticLabel::Shop, center: at(-0.1, -0.1), sigma_km: 0.10, count: 7 },
            ClumpSpec {
                label: SemanticLabel::Transport,
                center: at(0.0, 1.6),
                sigma_km: 0.45,
                count: 10,
            },
            ClumpSpec {
                label: SemanticLabel::IndoorSports,
                center: at(1.9, 1.2),
                sigma_km: 0.07,
                count: 5,
            },
        ]);
    }
    let mid = (46.35, 6.80);
    clumps.extend([
        ClumpSpec {
            label: SemanticLabel::OutdoorSports,
            center: offset_km(mid, -4.0, 3.0),
            sigma_km: 1.5,
            count: 12,
        },
        ClumpSpec {
            label: SemanticLabel::HolidayResort,
            center: offset_km(mid, 7.0, -5.0),
            sigma_km: 0.9,
            count: 7,
        },
        ClumpSpec {
            label: SemanticLabel::HomeOfFriend,
            center: offset_km(mid, 2.0, 6.0),
            sigma_km: 2.0,
            count: 8,
        },
        ClumpSpec {
            label: SemanticLabel::WorkOfFriend,
            center: offset_km(mid, -6.0, -4.0),
            sigma_km: 1.2,
            count: 6,
        },
    ]);
    clumped_places(&clumps, &mut r)
}
