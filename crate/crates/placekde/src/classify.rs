//! Kernel discriminant classification over semantic place labels.
//!
//! One density model per label; prediction is the argmax of per-label
//! density scores at the probe point. Optional extras: DBSCAN region gating
//! (score within the probe's spatial cluster, falling back to the global
//! models), empirical class priors, and geometric fusion with an external
//! classifier's per-label scores.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{dbscan, ClusterAssignment, DbscanParams};
use crate::density::{knn_distance_km, BandwidthSpec, DensityModel, Kernel};
use crate::error::{Error, Result};
use crate::geo::{EarthRadius, GeoPoint};

/// Number of semantic place categories.
pub const LABEL_COUNT: usize = 10;

/// Smoothing floor applied to normalized score vectors before geometric
/// fusion, so zero entries cannot annihilate a class.
const FUSION_FLOOR: f64 = 1e-9;

/// The ten place categories, in their fixed tie-breaking order.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum SemanticLabel {
    BarRestaurant,
    OutdoorSports,
    IndoorSports,
    Home,
    HomeOfFriend,
    Transport,
    Work,
    Shop,
    HolidayResort,
    WorkOfFriend,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; LABEL_COUNT] = [
        SemanticLabel::BarRestaurant,
        SemanticLabel::OutdoorSports,
        SemanticLabel::IndoorSports,
        SemanticLabel::Home,
        SemanticLabel::HomeOfFriend,
        SemanticLabel::Transport,
        SemanticLabel::Work,
        SemanticLabel::Shop,
        SemanticLabel::HolidayResort,
        SemanticLabel::WorkOfFriend,
    ];

    /// Position in the fixed order; inverse of indexing into [`Self::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticLabel::BarRestaurant => "bar_restaurant",
            SemanticLabel::OutdoorSports => "outdoor_sports",
            SemanticLabel::IndoorSports => "indoor_sports",
            SemanticLabel::Home => "home",
            SemanticLabel::HomeOfFriend => "home_of_friend",
            SemanticLabel::Transport => "transport",
            SemanticLabel::Work => "work",
            SemanticLabel::Shop => "shop",
            SemanticLabel::HolidayResort => "holiday_resort",
            SemanticLabel::WorkOfFriend => "work_of_friend",
        }
    }
}

impl std::fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SemanticLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SemanticLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// A place with a known category: the classifier's training currency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPlace {
    pub place_id: String,
    pub location: GeoPoint,
    pub label: SemanticLabel,
}

/// Where a score vector came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Scored against the global per-label models.
    Global,
    /// Scored against the models of this DBSCAN region.
    Region(usize),
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Global => f.write_str("global"),
            Provenance::Region(id) => write!(f, "region {id}"),
        }
    }
}

/// Per-label scores at one probe point. Labels absent from training score 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    scores: [f64; LABEL_COUNT],
    provenance: Provenance,
}

impl ClassScores {
    /// Wrap a raw score vector; every entry must be finite and non-negative.
    pub fn new(scores: [f64; LABEL_COUNT]) -> Result<Self> {
        Self::with_provenance(scores, Provenance::Global)
    }

    fn with_provenance(scores: [f64; LABEL_COUNT], provenance: Provenance) -> Result<Self> {
        for (label, s) in SemanticLabel::ALL.iter().zip(scores) {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Domain(format!("score {s} for {label} must be finite and >= 0")));
            }
        }
        Ok(ClassScores { scores, provenance })
    }

    pub fn get(&self, label: SemanticLabel) -> f64 {
        self.scores[label.index()]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (SemanticLabel, f64)> + '_ {
        SemanticLabel::ALL.into_iter().map(|l| (l, self.scores[l.index()]))
    }

    /// Highest-scoring label over all ten categories; ties go to the
    /// earlier label in the fixed order.
    pub fn argmax(&self) -> SemanticLabel {
        let mut best = SemanticLabel::ALL[0];
        for label in SemanticLabel::ALL {
            if self.get(label) > self.get(best) {
                best = label;
            }
        }
        best
    }
}

/// Everything `fit` needs besides the data. Defaults mirror the CLI:
/// Gaussian kernel, per-class balloon bandwidth, no gating, no priors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kernel: Kernel,
    pub bandwidth: BandwidthSpec,
    /// DBSCAN parameters for region gating; `None` disables gating.
    pub gating: Option<DbscanParams>,
    /// Multiply scores by empirical class priors.
    pub use_priors: bool,
    /// Take balloon neighborhoods from the pooled training points instead
    /// of each label's own samples.
    pub pooled_balloon: bool,
    pub radius: EarthRadius,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kernel: Kernel::Gaussian,
            bandwidth: BandwidthSpec::default(),
            gating: None,
            use_priors: false,
            pooled_balloon: false,
            radius: EarthRadius::default(),
        }
    }
}

/// One optional density model per label.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct LabelModels {
    models: [Option<DensityModel>; LABEL_COUNT],
}

impl LabelModels {
    fn fit(
        points_by_label: &[Vec<GeoPoint>; LABEL_COUNT],
        config: &ClassifierConfig,
    ) -> Result<Self> {
        let mut models: [Option<DensityModel>; LABEL_COUNT] = Default::default();
        for (slot, points) in models.iter_mut().zip(points_by_label) {
            if !points.is_empty() {
                *slot = Some(DensityModel::new(
                    points.clone(),
                    config.kernel,
                    config.bandwidth,
                    config.radius,
                )?);
            }
        }
        Ok(LabelModels { models })
    }

    fn get(&self, label: SemanticLabel) -> Option<&DensityModel> {
        self.models[label.index()].as_ref()
    }
}

/// Per-region models built from a DBSCAN pass over the pooled training
/// points. NOISE points belong only to the global models.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RegionGating {
    assignment: ClusterAssignment,
    regions: Vec<LabelModels>,
    region_points: Vec<Vec<GeoPoint>>,
}

/// A fitted classifier; immutable, scoring and prediction are pure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifierModel {
    config: ClassifierConfig,
    priors: [f64; LABEL_COUNT],
    global: LabelModels,
    gating: Option<RegionGating>,
    pooled: Vec<GeoPoint>,
}

impl ClassifierModel {
    /// Fit per-label density models (and per-region models when gating is
    /// configured) from labeled training places.
    pub fn fit(training: &[LabeledPlace], config: ClassifierConfig) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::InsufficientData("classifier training set is empty".into()));
        }

        let mut points_by_label: [Vec<GeoPoint>; LABEL_COUNT] = Default::default();
        for place in training {
            points_by_label[place.label.index()].push(place.location);
        }
        let total = training.len() as f64;
        let mut priors = [0.0; LABEL_COUNT];
        for (prior, points) in priors.iter_mut().zip(&points_by_label) {
            *prior = points.len() as f64 / total;
        }
        let global = LabelModels::fit(&points_by_label, &config)?;
        let pooled: Vec<GeoPoint> = training.iter().map(|p| p.location).collect();

        let gating = match config.gating {
            None => None,
            Some(params) => {
                let assignment = dbscan(&pooled, &params, config.radius)?;
                let mut regions = Vec::with_capacity(assignment.num_clusters());
                let mut region_points = Vec::with_capacity(assignment.num_clusters());
                for id in 0..assignment.num_clusters() {
                    let members = assignment.members_of(id);
                    let mut by_label: [Vec<GeoPoint>; LABEL_COUNT] = Default::default();
                    for &i in &members {
                        by_label[training[i].label.index()].push(training[i].location);
                    }
                    regions.push(LabelModels::fit(&by_label, &config)?);
                    region_points.push(members.iter().map(|&i| training[i].location).collect());
                }
                Some(RegionGating { assignment, regions, region_points })
            }
        };

        Ok(ClassifierModel { config, priors, global, gating, pooled })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn prior(&self, label: SemanticLabel) -> f64 {
        self.priors[label.index()]
    }

    /// Labels with at least one training sample, in the fixed order.
    pub fn trained_labels(&self) -> Vec<SemanticLabel> {
        SemanticLabel::ALL
            .into_iter()
            .filter(|l| self.global.get(*l).is_some())
            .collect()
    }

    /// Number of DBSCAN regions, when gating is configured.
    pub fn region_count(&self) -> Option<usize> {
        self.gating.as_ref().map(|g| g.regions.len())
    }

    /// Per-label density scores at `probe`.
    ///
    /// With gating, the probe's region supplies the models and the
    /// provenance records which one; probes outside every region fall back
    /// to the global models.
    pub fn class_scores(&self, probe: GeoPoint) -> ClassScores {
        let (models, pool, provenance) = match &self.gating {
            Some(g) => match g.assignment.region_of(probe) {
                Some(id) => (&g.regions[id], &g.region_points[id], Provenance::Region(id)),
                None => (&self.global, &self.pooled, Provenance::Global),
            },
            None => (&self.global, &self.pooled, Provenance::Global),
        };

        // With the pooled-balloon flag the neighborhood that sets h(x) is
        // the pool backing the chosen models, not each label's samples.
        let shared_h = match self.config.bandwidth {
            BandwidthSpec::Balloon { k, floor_km } if self.config.pooled_balloon => {
                let d = knn_distance_km(pool, probe, k, self.config.radius)
                    .expect("pool is non-empty and k >= 1");
                Some(d.max(floor_km))
            }
            _ => None,
        };

        let mut scores = [0.0; LABEL_COUNT];
        for label in SemanticLabel::ALL {
            let mut s = match (models.get(label), shared_h) {
                (None, _) => 0.0,
                (Some(m), Some(h)) => m.score_with_bandwidth(probe, h),
                (Some(m), None) => m.score(probe),
            };
            if self.config.use_priors {
                s *= self.priors[label.index()];
            }
            scores[label.index()] = s;
        }
        ClassScores { scores, provenance }
    }

    /// Predicted label at `probe`: argmax of [`Self::class_scores`] over the
    /// labels seen in training. Ties, including an all-zero vector under a
    /// compact-support kernel, resolve to the earliest label in the fixed
    /// order; labels absent from training are never predicted.
    pub fn predict(&self, probe: GeoPoint) -> SemanticLabel {
        self.predict_from(&self.class_scores(probe))
    }

    /// The argmax step of [`Self::predict`], reusing already-computed scores.
    pub fn predict_from(&self, scores: &ClassScores) -> SemanticLabel {
        let mut best: Option<SemanticLabel> = None;
        for label in SemanticLabel::ALL {
            if self.global.get(label).is_none() {
                continue;
            }
            match best {
                Some(b) if scores.get(label) <= scores.get(b) => {}
                _ => best = Some(label),
            }
        }
        best.expect("fit guarantees at least one trained label")
    }
}

/// Geometrically fuse KDE scores with an external classifier's scores.
///
/// Both vectors are sum-normalized (an all-zero vector becomes uniform),
/// floored at 1e-9, combined as external^(1-lambda) * kde^lambda per label,
/// and renormalized. `lambda` = 0 reproduces the external ranking, 1 the
/// KDE ranking.
pub fn fuse_scores(
    kde: &ClassScores,
    external: &[f64; LABEL_COUNT],
    lambda: f64,
) -> Result<ClassScores> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("fusion weight {lambda} outside [0, 1]")));
    }
    for (label, s) in SemanticLabel::ALL.iter().zip(external) {
        if !s.is_finite() || *s < 0.0 {
            return Err(Error::Domain(format!(
                "external score {s} for {label} must be finite and >= 0"
            )));
        }
    }

    let normalize = |v: &[f64; LABEL_COUNT]| -> [f64; LABEL_COUNT] {
        let sum: f64 = v.iter().sum();
        if sum == 0.0 {
            return [1.0 / LABEL_COUNT as f64; LABEL_COUNT];
        }
        let mut out = [0.0; LABEL_COUNT];
        for (o, x) in out.iter_mut().zip(v) {
            *o = x / sum;
        }
        out
    };

    let ext = normalize(external);
    let kde_norm = normalize(&kde.scores);
    let mut fused = [0.0; LABEL_COUNT];
    for i in 0..LABEL_COUNT {
        let e = ext[i].max(FUSION_FLOOR);
        let k = kde_norm[i].max(FUSION_FLOOR);
        fused[i] = e.powf(1.0 - lambda) * k.powf(lambda);
    }
    let total: f64 = fused.iter().sum();
    for f in fused.iter_mut() {
        *f /= total;
    }
    ClassScores::with_provenance(fused, kde.provenance)
}

/// Baseline predicting uniformly at random over a fixed label set.
#[derive(Clone, Debug)]
pub struct RandomBaseline {
    labels: Vec<SemanticLabel>,
    rng: ChaCha8Rng,
}

impl RandomBaseline {
    pub fn new(labels: &[SemanticLabel], seed: u64) -> Result<Self> {
        // Dedupe into the fixed label order so the draw distribution does
        // not depend on input ordering.
        let labels: Vec<SemanticLabel> =
            labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if labels.is_empty() {
            return Err(Error::EmptyInput("random baseline needs a non-empty label set"));
        }
        Ok(RandomBaseline { labels, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// Next prediction in the seeded sequence.
    pub fn draw(&mut self) -> SemanticLabel {
        self.labels[self.rng.random_range(0..self.labels.len())]
    }
}

/// Baseline always predicting the most frequent training label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DominantBaseline {
    label: SemanticLabel,
}

impl DominantBaseline {
    pub fn fit(training_labels: &[SemanticLabel]) -> Result<Self> {
        if training_labels.is_empty() {
            return Err(Error::InsufficientData("dominant baseline training set is empty".into()));
        }
        let mut counts = [0usize; LABEL_COUNT];
        for l in training_labels {
            counts[l.index()] += 1;
        }
        // Frequency ties go to the earlier label.
        let mut best = SemanticLabel::ALL[0];
        for label in SemanticLabel::ALL {
            if counts[label.index()] > counts[best.index()] {
                best = label;
            }
        }
        Ok(DominantBaseline { label: best })
    }

    pub fn predict(&self) -> SemanticLabel {
        self.label
    }
}
