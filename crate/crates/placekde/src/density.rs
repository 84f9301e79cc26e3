//! Kernel density scoring over geographic points.
//!
//! Densities follow the univariate form f(x) = (1/(n*h)) * sum K(d(x, xi)/h)
//! with d the great-circle distance in kilometers, so scores have unit 1/km
//! and are comparable between models, not calibrated 2-D densities. The
//! balloon variant replaces h with a probe-dependent h(x) equal to the
//! distance to the k-th nearest sample, floored to keep it positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_km, pairwise_distances_km, EarthRadius, GeoPoint};

/// Default neighbor count for the balloon bandwidth.
pub const DEFAULT_BALLOON_K: usize = 15;

/// Default minimum balloon bandwidth in kilometers (1 m, below GPS noise).
pub const DEFAULT_BANDWIDTH_FLOOR_KM: f64 = 0.001;

/// Penalty replacing `ln 0` terms in the leave-one-out likelihood, so that
/// candidate totals stay finite and totally ordered.
const LOG_ZERO_PENALTY: f64 = -1e12;

/// Univariate kernel profile: non-negative, symmetric, unit integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Gaussian,
    Uniform,
    Triangular,
    Biweight,
    Triweight,
    Epanechnikov,
    Exponential,
}

impl Kernel {
    pub const ALL: [Kernel; 7] = [
        Kernel::Gaussian,
        Kernel::Uniform,
        Kernel::Triangular,
        Kernel::Biweight,
        Kernel::Triweight,
        Kernel::Epanechnikov,
        Kernel::Exponential,
    ];

    /// Evaluate the profile at `u`; rejects non-finite arguments.
    pub fn eval(self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("kernel argument {u} is not finite")));
        }
        Ok(self.profile(u))
    }

    /// Profile value for finite `u`. Compact-support kernels are zero for
    /// |u| >= 1.
    fn profile(self, u: f64) -> f64 {
        let u = u.abs();
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Kernel::Exponential => 0.5 * (-u).exp(),
            _ if u >= 1.0 => 0.0,
            Kernel::Uniform => 0.5,
            Kernel::Triangular => 1.0 - u,
            Kernel::Epanechnikov => 0.75 * (1.0 - u * u),
            Kernel::Biweight => {
                let s = 1.0 - u * u;
                15.0 / 16.0 * s * s
            }
            Kernel::Triweight => {
                let s = 1.0 - u * u;
                35.0 / 32.0 * s * s * s
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Uniform => "uniform",
            Kernel::Triangular => "triangular",
            Kernel::Biweight => "biweight",
            Kernel::Triweight => "triweight",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Exponential => "exponential",
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown kernel `{s}`")))
    }
}

/// How a density model picks its smoothing scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBandwidthSpec", into = "RawBandwidthSpec")]
pub enum BandwidthSpec {
    /// One bandwidth for every probe.
    Fixed { h_km: f64 },
    /// Probe-dependent bandwidth: distance to the k-th nearest sample,
    /// never below `floor_km`.
    Balloon { k: usize, floor_km: f64 },
}

impl BandwidthSpec {
    pub fn fixed(h_km: f64) -> Result<Self> {
        if !h_km.is_finite() || h_km <= 0.0 {
            return Err(Error::Parameter(format!("bandwidth {h_km} km must be positive")));
        }
        Ok(BandwidthSpec::Fixed { h_km })
    }

    pub fn balloon(k: usize, floor_km: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("balloon neighbor count must be at least 1".into()));
        }
        if !floor_km.is_finite() || floor_km <= 0.0 {
            return Err(Error::Parameter(format!("bandwidth floor {floor_km} km must be positive")));
        }
        Ok(BandwidthSpec::Balloon { k, floor_km })
    }
}

impl Default for BandwidthSpec {
    fn default() -> Self {
        BandwidthSpec::Balloon { k: DEFAULT_BALLOON_K, floor_km: DEFAULT_BANDWIDTH_FLOOR_KM }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawBandwidthSpec {
    Fixed { h_km: f64 },
    Balloon { k: usize, floor_km: f64 },
}

impl TryFrom<RawBandwidthSpec> for BandwidthSpec {
    type Error = Error;

    fn try_from(raw: RawBandwidthSpec) -> Result<Self> {
        match raw {
            RawBandwidthSpec::Fixed { h_km } => BandwidthSpec::fixed(h_km),
            RawBandwidthSpec::Balloon { k, floor_km } => BandwidthSpec::balloon(k, floor_km),
        }
    }
}

impl From<BandwidthSpec> for RawBandwidthSpec {
    fn from(spec: BandwidthSpec) -> Self {
        match spec {
            BandwidthSpec::Fixed { h_km } => RawBandwidthSpec::Fixed { h_km },
            BandwidthSpec::Balloon { k, floor_km } => RawBandwidthSpec::Balloon { k, floor_km },
        }
    }
}

/// Distance from `probe` to its k-th nearest point in `samples` (1-based).
///
/// With fewer than `k` samples the largest distance is returned. Duplicates
/// each count, so the result can be 0; flooring is the caller's concern.
pub fn knn_distance_km(
    samples: &[GeoPoint],
    probe: GeoPoint,
    k: usize,
    radius: EarthRadius,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("knn_distance_km requires at least one sample"));
    }
    if k == 0 {
        return Err(Error::Parameter("neighbor count must be at least 1".into()));
    }
    Ok(kth_nearest(samples, probe, k, radius))
}

/// Infallible core of [`knn_distance_km`]; `samples` non-empty, `k >= 1`.
fn kth_nearest(samples: &[GeoPoint], probe: GeoPoint, k: usize, radius: EarthRadius) -> f64 {
    let mut distances: Vec<f64> =
        samples.iter().map(|s| haversine_km(probe, *s, radius)).collect();
    // Haversine output is finite, so total ordering holds.
    distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    distances[k.min(distances.len()) - 1]
}

/// A fitted single-class density: samples plus kernel and bandwidth choice.
/// Immutable after construction; scoring is pure.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawDensityModel", into = "RawDensityModel")]
pub struct DensityModel {
    samples: Vec<GeoPoint>,
    kernel: Kernel,
    bandwidth: BandwidthSpec,
    radius: EarthRadius,
}

impl DensityModel {
    pub fn new(
        samples: Vec<GeoPoint>,
        kernel: Kernel,
        bandwidth: BandwidthSpec,
        radius: EarthRadius,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("density model requires at least one sample"));
        }
        Ok(DensityModel { samples, kernel, bandwidth, radius })
    }

    pub fn samples(&self) -> &[GeoPoint] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> BandwidthSpec {
        self.bandwidth
    }

    /// Effective bandwidth at `probe`: the fixed h, or the floored k-th
    /// neighbor distance for the balloon variant.
    pub fn bandwidth_at(&self, probe: GeoPoint) -> f64 {
        match self.bandwidth {
            BandwidthSpec::Fixed { h_km } => h_km,
            BandwidthSpec::Balloon { k, floor_km } => {
                kth_nearest(&self.samples, probe, k, self.radius).max(floor_km)
            }
        }
    }

    /// Density score at `probe`, in 1/km.
    pub fn score(&self, probe: GeoPoint) -> f64 {
        self.score_with_bandwidth(probe, self.bandwidth_at(probe))
    }

    /// Score at `probe` with an externally chosen bandwidth, used when the
    /// balloon neighborhood is taken from a pooled sample set rather than
    /// this model's own.
    pub fn score_with_bandwidth(&self, probe: GeoPoint, h_km: f64) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|s| self.kernel.profile(haversine_km(probe, *s, self.radius) / h_km))
            .sum();
        sum / (self.samples.len() as f64 * h_km)
    }
}

#[derive(Serialize, Deserialize)]
struct RawDensityModel {
    samples: Vec<GeoPoint>,
    kernel: Kernel,
    bandwidth: BandwidthSpec,
    radius: EarthRadius,
}

impl TryFrom<RawDensityModel> for DensityModel {
    type Error = Error;

    fn try_from(raw: RawDensityModel) -> Result<Self> {
        DensityModel::new(raw.samples, raw.kernel, raw.bandwidth, raw.radius)
    }
}

impl From<DensityModel> for RawDensityModel {
    fn from(m: DensityModel) -> Self {
        RawDensityModel {
            samples: m.samples,
            kernel: m.kernel,
            bandwidth: m.bandwidth,
            radius: m.radius,
        }
    }
}

/// Default fixed-bandwidth candidate grid: 16 log-spaced values covering
/// 0.01 km to 10 km.
pub fn default_bandwidth_grid() -> Vec<f64> {
    (0..16).map(|i| 10f64.powf(-2.0 + i as f64 * 0.2)).collect()
}

/// Pick the fixed bandwidth maximizing the leave-one-out log
/// pseudo-likelihood over `candidates`.
///
/// Each held-out term log f(xi) computed from the other n-1 samples is
/// added; zero densities contribute a large negative penalty instead of
/// negative infinity. Ties go to the smaller candidate.
pub fn select_bandwidth_cv(
    samples: &[GeoPoint],
    candidates: &[f64],
    kernel: Kernel,
    radius: EarthRadius,
) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bandwidth cross-validation needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::EmptyInput("bandwidth cross-validation needs at least one candidate"));
    }
    for &h in candidates {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Parameter(format!("bandwidth candidate {h} km must be positive")));
        }
    }

    let distances = pairwise_distances_km(samples, radius)?;
    let n = samples.len();
    let mut best: Option<(f64, f64)> = None; // (total, h)
    for &h in candidates {
        let mut total = 0.0;
        for (i, row) in distances.iter().enumerate() {
            let sum: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| kernel.profile(row[j] / h))
                .sum();
            let f = sum / ((n - 1) as f64 * h);
            total += if f > 0.0 { f.ln() } else { LOG_ZERO_PENALTY };
        }
        let better = match best {
            None => true,
            Some((bt, bh)) => total > bt || (total == bt && h < bh),
        };
        if better {
            best = Some((total, h));
        }
    }
    Ok(best.expect("at least one candidate").1)
}
