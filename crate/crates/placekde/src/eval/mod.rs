//! Stratified cross-validation of classification methods.
//!
//! A [`FoldPlan`] deals places into k folds label by label; `cross_validate`
//! trains on k-1 folds and scores the held-out fold, accumulating per-fold
//! accuracies and a pooled confusion matrix. The trained-on-fold data never
//! includes the fold being scored.

mod report;
mod wilcoxon;

pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::{
    fuse_scores, ClassifierConfig, ClassifierModel, DominantBaseline, LabeledPlace,
    RandomBaseline, SemanticLabel, LABEL_COUNT,
};
use crate::cluster::DbscanParams;
use crate::density::{select_bandwidth_cv, BandwidthSpec, Kernel};
use crate::error::{Error, Result};
use crate::geo::{EarthRadius, GeoPoint};

/// Assignment of every place to one of `k` folds, stratified by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index per place, aligned with the input order.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// Deal places into `k` folds: within each label (taken in the fixed label
/// order) the places are shuffled with a seeded generator and assigned
/// round-robin, so per-label fold sizes differ by at most one.
pub fn stratified_kfold(places: &[LabeledPlace], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Parameter(format!("fold count {k} must be at least 2")));
    }
    if places.is_empty() {
        return Err(Error::EmptyInput("cannot build a fold plan over zero places"));
    }

    let mut by_label: [Vec<usize>; LABEL_COUNT] = Default::default();
    for (i, place) in places.iter().enumerate() {
        by_label[place.label.index()].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; places.len()];
    for indices in by_label.iter_mut() {
        indices.shuffle(&mut rng);
        for (pos, &place_idx) in indices.iter().enumerate() {
            assignments[place_idx] = pos % k;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// How the KDE bandwidth is obtained for each training split.
#[derive(Clone, Debug, PartialEq)]
pub enum BandwidthChoice {
    /// Use this spec as-is.
    Spec(BandwidthSpec),
    /// Select one fixed bandwidth per split by leave-one-out
    /// cross-validation over the pooled training points.
    FixedCv { candidates: Vec<f64> },
}

/// KDE method configuration for the evaluation harness.
#[derive(Clone, Debug, PartialEq)]
pub struct KdeMethodConfig {
    pub kernel: Kernel,
    pub bandwidth: BandwidthChoice,
    pub gating: Option<DbscanParams>,
    pub use_priors: bool,
    pub pooled_balloon: bool,
    pub radius: EarthRadius,
}

impl Default for KdeMethodConfig {
    fn default() -> Self {
        KdeMethodConfig {
            kernel: Kernel::Gaussian,
            bandwidth: BandwidthChoice::Spec(BandwidthSpec::default()),
            gating: None,
            use_priors: false,
            pooled_balloon: false,
            radius: EarthRadius::default(),
        }
    }
}

impl KdeMethodConfig {
    /// Resolve to a concrete classifier config for one training split.
    fn resolve(&self, train: &[LabeledPlace]) -> Result<ClassifierConfig> {
        let bandwidth = match &self.bandwidth {
            BandwidthChoice::Spec(spec) => *spec,
            BandwidthChoice::FixedCv { candidates } => {
                let points: Vec<GeoPoint> = train.iter().map(|p| p.location).collect();
                let h = select_bandwidth_cv(&points, candidates, self.kernel, self.radius)?;
                BandwidthSpec::fixed(h)?
            }
        };
        Ok(ClassifierConfig {
            kernel: self.kernel,
            bandwidth,
            gating: self.gating,
            use_priors: self.use_priors,
            pooled_balloon: self.pooled_balloon,
            radius: self.radius,
        })
    }

    fn id(&self) -> String {
        let base = match self.bandwidth {
            BandwidthChoice::Spec(BandwidthSpec::Balloon { .. }) => "kde-a",
            BandwidthChoice::Spec(BandwidthSpec::Fixed { .. })
            | BandwidthChoice::FixedCv { .. } => "kde-f",
        };
        match self.gating {
            Some(_) => format!("{base}-dbscan"),
            None => base.to_string(),
        }
    }

    fn echo(&self) -> Vec<(String, String)> {
        let bandwidth = match &self.bandwidth {
            BandwidthChoice::Spec(BandwidthSpec::Fixed { h_km }) => format!("fixed(h_km={h_km})"),
            BandwidthChoice::Spec(BandwidthSpec::Balloon { k, floor_km }) => {
                format!("balloon(k={k}, floor_km={floor_km})")
            }
            BandwidthChoice::FixedCv { candidates } => {
                let lo = candidates.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = candidates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                format!("cv({} candidates in [{lo}, {hi}] km)", candidates.len())
            }
        };
        let gate = match self.gating {
            Some(p) => format!("dbscan(eps_km={}, min_pts={})", p.eps_km(), p.min_pts()),
            None => "off".to_string(),
        };
        vec![
            ("kernel".into(), self.kernel.to_string()),
            ("bandwidth".into(), bandwidth),
            ("gate".into(), gate),
            ("use_priors".into(), self.use_priors.to_string()),
            ("pooled_balloon".into(), self.pooled_balloon.to_string()),
            ("radius_km".into(), self.radius.km().to_string()),
        ]
    }
}

/// A classification method under evaluation.
#[derive(Clone, Debug)]
pub enum Method {
    /// Uniform draw over all ten labels, seeded per fold.
    Random,
    /// Constant prediction of the modal training label.
    Dominant,
    Kde(KdeMethodConfig),
    /// KDE scores fused with an external classifier's per-place scores.
    Fused {
        kde: KdeMethodConfig,
        lambda: f64,
        external: BTreeMap<String, [f64; LABEL_COUNT]>,
    },
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::Random => "random".into(),
            Method::Dominant => "dominant".into(),
            Method::Kde(cfg) => cfg.id(),
            Method::Fused { .. } => "fuse".into(),
        }
    }

    fn echo(&self) -> Vec<(String, String)> {
        match self {
            Method::Random | Method::Dominant => Vec::new(),
            Method::Kde(cfg) => cfg.echo(),
            Method::Fused { kde, lambda, .. } => {
                let mut echo = kde.echo();
                echo.push(("lambda".into(), lambda.to_string()));
                echo
            }
        }
    }
}

/// Outcome of one cross-validation run.
///
/// `fold_accuracies` lists the folds that actually held test places, in
/// fold order. The confusion matrix pools every held-out prediction; its
/// trace over its total is the overall (micro-averaged) accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub(crate) method_id: String,
    pub(crate) folds: usize,
    pub(crate) seed: u64,
    pub(crate) place_count: usize,
    pub(crate) config_echo: Vec<(String, String)>,
    pub(crate) fold_accuracies: Vec<f64>,
    pub(crate) confusion: [[u64; LABEL_COUNT]; LABEL_COUNT],
}

impl EvalReport {
    pub fn method_id(&self) -> &str {
        &self.method_id
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn place_count(&self) -> usize {
        self.place_count
    }

    pub fn config_echo(&self) -> &[(String, String)] {
        &self.config_echo
    }

    pub fn fold_accuracies(&self) -> &[f64] {
        &self.fold_accuracies
    }

    /// Rows are truth, columns prediction, both in the fixed label order.
    pub fn confusion(&self) -> &[[u64; LABEL_COUNT]; LABEL_COUNT] {
        &self.confusion
    }

    /// Fraction of all held-out predictions that were correct.
    pub fn overall_accuracy(&self) -> f64 {
        let trace: u64 = (0..LABEL_COUNT).map(|i| self.confusion[i][i]).sum();
        let total: u64 = self.confusion.iter().flatten().sum();
        trace as f64 / total as f64
    }

    /// Unweighted mean of the per-fold accuracies.
    pub fn mean_fold_accuracy(&self) -> f64 {
        let sum: f64 = self.fold_accuracies.iter().sum();
        sum / self.fold_accuracies.len() as f64
    }
}

/// Train and score `method` under `plan`.
///
/// Folds without test places are skipped; a fold whose training split is
/// empty is an error. Every prediction appears once in the confusion
/// matrix.
pub fn cross_validate(
    places: &[LabeledPlace],
    method: &Method,
    plan: &FoldPlan,
) -> Result<EvalReport> {
    if places.is_empty() {
        return Err(Error::EmptyInput("cannot evaluate over zero places"));
    }
    if plan.assignments.len() != places.len() {
        return Err(Error::Mismatch(format!(
            "fold plan covers {} places but {} were given",
            plan.assignments.len(),
            places.len()
        )));
    }

    let mut fold_accuracies = Vec::new();
    let mut confusion = [[0u64; LABEL_COUNT]; LABEL_COUNT];

    for fold in 0..plan.k {
        let test_idx = plan.test_indices(fold);
        if test_idx.is_empty() {
            continue;
        }
        let train_idx = plan.train_indices(fold);
        if train_idx.is_empty() {
            return Err(Error::EmptyTrainingSplit { fold });
        }
        let train: Vec<LabeledPlace> = train_idx.iter().map(|&i| places[i].clone()).collect();

        let predictions = predict_fold(method, &train, &test_idx, places, plan, fold)?;

        let mut correct = 0usize;
        for (&i, predicted) in test_idx.iter().zip(&predictions) {
            let truth = places[i].label;
            confusion[truth.index()][predicted.index()] += 1;
            if truth == *predicted {
                correct += 1;
            }
        }
        fold_accuracies.push(correct as f64 / test_idx.len() as f64);
    }

    Ok(EvalReport {
        method_id: method.id(),
        folds: plan.k,
        seed: plan.seed,
        place_count: places.len(),
        config_echo: method.echo(),
        fold_accuracies,
        confusion,
    })
}

fn predict_fold(
    method: &Method,
    train: &[LabeledPlace],
    test_idx: &[usize],
    places: &[LabeledPlace],
    plan: &FoldPlan,
    fold: usize,
) -> Result<Vec<SemanticLabel>> {
    match method {
        Method::Random => {
            let mut baseline =
                RandomBaseline::new(&SemanticLabel::ALL, plan.seed.wrapping_add(fold as u64))?;
            Ok(test_idx.iter().map(|_| baseline.draw()).collect())
        }
        Method::Dominant => {
            let labels: Vec<SemanticLabel> = train.iter().map(|p| p.label).collect();
            let baseline = DominantBaseline::fit(&labels)?;
            Ok(test_idx.iter().map(|_| baseline.predict()).collect())
        }
        Method::Kde(cfg) => {
            let model = ClassifierModel::fit(train, cfg.resolve(train)?)?;
            Ok(test_idx.iter().map(|&i| model.predict(places[i].location)).collect())
        }
        Method::Fused { kde, lambda, external } => {
            let model = ClassifierModel::fit(train, kde.resolve(train)?)?;
            test_idx
                .iter()
                .map(|&i| {
                    let place = &places[i];
                    let ext = external.get(&place.place_id).ok_or_else(|| {
                        Error::Mismatch(format!(
                            "no external scores for place `{}`",
                            place.place_id
                        ))
                    })?;
                    let fused = fuse_scores(&model.class_scores(place.location), ext, *lambda)?;
                    Ok(fused.argmax())
                })
                .collect()
        }
    }
}
