//! Brute-force density estimation and classification reference.
//!
//! Direct summation with its own kernel formulas, its own sorted-scan
//! nearest-neighbor bandwidths, and the naive clustering from
//! [`crate::dbscan`] for region gating.

use crate::dbscan::{naive_dbscan, naive_region_of};
use crate::sphere::sphere_distance_km;

pub const LABELS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefKernel {
    Gaussian,
    Uniform,
    Triangular,
    Epanechnikov,
    Biweight,
    Triweight,
    Exponential,
}

pub const REF_KERNELS: [RefKernel; 7] = [
    RefKernel::Gaussian,
    RefKernel::Uniform,
    RefKernel::Triangular,
    RefKernel::Epanechnikov,
    RefKernel::Biweight,
    RefKernel::Triweight,
    RefKernel::Exponential,
];

impl RefKernel {
    pub fn value(self, u: f64) -> f64 {
        let a = u.abs();
        match self {
            RefKernel::Gaussian => (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            RefKernel::Exponential => 0.5 * (-a).exp(),
            _ if a >= 1.0 => 0.0,
            RefKernel::Uniform => 0.5,
            RefKernel::Triangular => 1.0 - a,
            RefKernel::Epanechnikov => 0.75 * (1.0 - a * a),
            RefKernel::Biweight => 15.0 / 16.0 * (1.0 - a * a).powi(2),
            RefKernel::Triweight => 35.0 / 32.0 * (1.0 - a * a).powi(3),
        }
    }

    /// The matching kernel name as the main crate spells it.
    pub fn name(self) -> &'static str {
        match self {
            RefKernel::Gaussian => "gaussian",
            RefKernel::Uniform => "uniform",
            RefKernel::Triangular => "triangular",
            RefKernel::Epanechnikov => "epanechnikov",
            RefKernel::Biweight => "biweight",
            RefKernel::Triweight => "triweight",
            RefKernel::Exponential => "exponential",
        }
    }
}

/// Direct evaluation of the density sum `1/(n h) * sum K(d_i / h)` from
/// precomputed probe-to-sample distances. Callers choose the distance
/// route; distance correctness has its own oracle.
pub fn brute_density_from_distances(dists_km: &[f64], kernel: RefKernel, h_km: f64) -> f64 {
    let sum: f64 = dists_km.iter().map(|&d| kernel.value(d / h_km)).sum();
    sum / (dists_km.len() as f64 * h_km)
}

/// The k-th smallest of precomputed distances (k past the end falls back
/// to the largest), floored at `floor_km`.
pub fn balloon_h_from_distances(dists_km: &[f64], k: usize, floor_km: f64) -> f64 {
    let mut sorted = dists_km.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[k.min(sorted.len()) - 1].max(floor_km)
}

/// Direct evaluation of the density sum `1/(n h) * sum K(d_i / h)`.
pub fn brute_density(
    samples: &[(f64, f64)],
    probe: (f64, f64),
    kernel: RefKernel,
    h_km: f64,
    radius_km: f64,
) -> f64 {
    let dists: Vec<f64> = samples
        .iter()
        .map(|&(lat, lon)| sphere_distance_km(probe.0, probe.1, lat, lon, radius_km))
        .collect();
    brute_density_from_distances(&dists, kernel, h_km)
}

/// Distance from `probe` to its k-th nearest sample (k past the end
/// falls back to the farthest sample), floored at `floor_km`.
pub fn balloon_h(
    samples: &[(f64, f64)],
    probe: (f64, f64),
    k: usize,
    floor_km: f64,
    radius_km: f64,
) -> f64 {
    let mut dists: Vec<f64> = samples
        .iter()
        .map(|&(lat, lon)| sphere_distance_km(probe.0, probe.1, lat, lon, radius_km))
        .collect();
    dists.sort_by(f64::total_cmp);
    dists[k.min(dists.len()) - 1].max(floor_km)
}

/// Leave-one-out log pseudo-likelihood bandwidth pick; zero held-out
/// densities are penalized, ties go to the smaller candidate.
pub fn ref_select_bandwidth(
    samples: &[(f64, f64)],
    candidates: &[f64],
    kernel: RefKernel,
    radius_km: f64,
) -> f64 {
    let n = samples.len();
    let mut best: Option<(f64, f64)> = None;
    for &h in candidates {
        let mut total = 0.0;
        for i in 0..n {
            let held_out: Vec<(f64, f64)> = samples
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| p)
                .collect();
            let f = brute_density(&held_out, samples[i], kernel, h, radius_km);
            total += if f > 0.0 { f.ln() } else { -1e12 };
        }
        let better = match best {
            None => true,
            Some((bt, bh)) => total > bt || (total == bt && h < bh),
        };
        if better {
            best = Some((total, h));
        }
    }
    best.expect("candidate list is non-empty").1
}

#[derive(Clone, Copy, Debug)]
pub enum RefBandwidth {
    Fixed(f64),
    Balloon { k: usize, floor_km: f64 },
}

/// Mirror of the classifier configuration, on plain values.
#[derive(Clone, Copy, Debug)]
pub struct RefClassifier {
    pub kernel: RefKernel,
    pub bandwidth: RefBandwidth,
    /// `(eps_km, min_pts)` when region gating is on.
    pub gating: Option<(f64, usize)>,
    pub use_priors: bool,
    pub pooled_balloon: bool,
    pub radius_km: f64,
}

/// Per-label scores at `probe` for training points `(lat, lon, label)`.
pub fn ref_class_scores(
    train: &[(f64, f64, usize)],
    probe: (f64, f64),
    spec: &RefClassifier,
) -> [f64; LABELS] {
    let coords: Vec<(f64, f64)> = train.iter().map(|&(lat, lon, _)| (lat, lon)).collect();

    // Region gating picks the model subset; everything else falls back to
    // the full training set.
    let subset: Vec<usize> = match spec.gating {
        Some((eps_km, min_pts)) => {
            let clustering = naive_dbscan(&coords, eps_km, min_pts, spec.radius_km);
            match naive_region_of(&coords, &clustering, probe, eps_km, spec.radius_km) {
                Some(region) => (0..train.len())
                    .filter(|&i| clustering.labels[i] == Some(region))
                    .collect(),
                None => (0..train.len()).collect(),
            }
        }
        None => (0..train.len()).collect(),
    };

    let pool: Vec<(f64, f64)> = subset.iter().map(|&i| coords[i]).collect();
    let shared_h = match (spec.bandwidth, spec.pooled_balloon) {
        (RefBandwidth::Balloon { k, floor_km }, true) => {
            Some(balloon_h(&pool, probe, k, floor_km, spec.radius_km))
        }
        _ => None,
    };

    let mut counts = [0usize; LABELS];
    for &(_, _, label) in train {
        counts[label] += 1;
    }

    let mut scores = [0.0; LABELS];
    for label in 0..LABELS {
        let class: Vec<(f64, f64)> = subset
            .iter()
            .filter(|&&i| train[i].2 == label)
            .map(|&i| coords[i])
            .collect();
        if class.is_empty() {
            continue;
        }
        let h = match (spec.bandwidth, shared_h) {
            (_, Some(h)) => h,
            (RefBandwidth::Fixed(h), None) => h,
            (RefBandwidth::Balloon { k, floor_km }, None) => {
                balloon_h(&class, probe, k, floor_km, spec.radius_km)
            }
        };
        let mut s = brute_density(&class, probe, spec.kernel, h, spec.radius_km);
        if spec.use_priors {
            s *= counts[label] as f64 / train.len() as f64;
        }
        scores[label] = s;
    }
    scores
}

/// Argmax over labels present anywhere in training; ties, including the
/// all-zero case, go to the smallest label index.
pub fn ref_predict(
    train: &[(f64, f64, usize)],
    probe: (f64, f64),
    spec: &RefClassifier,
) -> usize {
    let scores = ref_class_scores(train, probe, spec);
    let mut trained = [false; LABELS];
    for &(_, _, label) in train {
        trained[label] = true;
    }
    let mut best: Option<usize> = None;
    for (label, &present) in trained.iter().enumerate() {
        if !present {
            continue;
        }
        best = match best {
            Some(b) if scores[label] <= scores[b] => Some(b),
            _ => Some(label),
        };
    }
    best.expect("training set is non-empty")
}
