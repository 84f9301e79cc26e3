//! Density-based spatial clustering (DBSCAN) over geographic points.
//!
//! Distances are great-circle kilometers. The epsilon-neighborhood of a
//! point is inclusive on both counts: it uses `d <= eps_km` and it contains
//! the point itself, so a point is core when at least `min_pts` points
//! (counting itself) lie within `eps_km`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_km, pairwise_distances_km, EarthRadius, GeoPoint};

/// DBSCAN parameters; `eps_km` is strictly positive, `min_pts` at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDbscanParams", into = "RawDbscanParams")]
pub struct DbscanParams {
    eps_km: f64,
    min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps_km: f64, min_pts: usize) -> Result<Self> {
        if !eps_km.is_finite() || eps_km <= 0.0 {
            return Err(Error::Parameter(format!("eps {eps_km} km must be positive")));
        }
        if min_pts == 0 {
            return Err(Error::Parameter("min_pts must be at least 1".into()));
        }
        Ok(DbscanParams { eps_km, min_pts })
    }

    pub fn eps_km(&self) -> f64 {
        self.eps_km
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

impl Default for DbscanParams {
    fn default() -> Self {
        DbscanParams { eps_km: 0.5, min_pts: 4 }
    }
}

#[derive(Serialize, Deserialize)]
struct RawDbscanParams {
    eps_km: f64,
    min_pts: usize,
}

impl TryFrom<RawDbscanParams> for DbscanParams {
    type Error = Error;

    fn try_from(raw: RawDbscanParams) -> Result<Self> {
        DbscanParams::new(raw.eps_km, raw.min_pts)
    }
}

impl From<DbscanParams> for RawDbscanParams {
    fn from(p: DbscanParams) -> Self {
        RawDbscanParams { eps_km: p.eps_km, min_pts: p.min_pts }
    }
}

/// Cluster membership of a single input point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    /// Member of the cluster with this id.
    Cluster(usize),
    /// Not density-reachable from any core point.
    Noise,
}

/// Result of clustering: per-point labels plus the inputs that produced them.
///
/// Cluster ids are contiguous from 0 in discovery order: the cluster whose
/// first core point has the lowest input index gets id 0, and so on. A
/// border point in reach of several clusters belongs to the one discovered
/// first.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterAssignment {
    points: Vec<GeoPoint>,
    labels: Vec<PointLabel>,
    core: Vec<bool>,
    num_clusters: usize,
    params: DbscanParams,
    radius: EarthRadius,
}

impl ClusterAssignment {
    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    /// Whether point `i` has at least `min_pts` neighbors within `eps_km`.
    pub fn is_core(&self, i: usize) -> bool {
        self.core[i]
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn params(&self) -> DbscanParams {
        self.params
    }

    /// Indices of the points assigned to cluster `id`.
    pub fn members_of(&self, id: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == PointLabel::Cluster(id))
            .map(|(i, _)| i)
            .collect()
    }

    /// Cluster owning `probe`, if any core point lies within `eps_km` of it.
    ///
    /// The owner is the cluster of the nearest such core point; when two
    /// core points are exactly equidistant the smaller cluster id wins.
    pub fn region_of(&self, probe: GeoPoint) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, point) in self.points.iter().enumerate() {
            if !self.core[i] {
                continue;
            }
            let d = haversine_km(probe, *point, self.radius);
            if d > self.params.eps_km {
                continue;
            }
            let id = match self.labels[i] {
                PointLabel::Cluster(id) => id,
                // A core point is always a cluster member.
                PointLabel::Noise => unreachable!("core point labeled noise"),
            };
            let better = match best {
                None => true,
                Some((bd, bid)) => d < bd || (d == bd && id < bid),
            };
            if better {
                best = Some((d, id));
            }
        }
        best.map(|(_, id)| id)
    }
}

/// Run DBSCAN over `points`.
///
/// Points are scanned in input order; each unvisited core point seeds a new
/// cluster that is grown breadth-first through the neighborhoods of its core
/// members. Membership does not depend on the expansion order inside a
/// cluster, only on which cluster is seeded first.
pub fn dbscan(
    points: &[GeoPoint],
    params: &DbscanParams,
    radius: EarthRadius,
) -> Result<ClusterAssignment> {
    let distances = pairwise_distances_km(points, radius)?;
    let n = points.len();

    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| distances[i][j] <= params.eps_km).collect())
        .collect();
    let core: Vec<bool> = neighborhoods.iter().map(|nb| nb.len() >= params.min_pts).collect();

    let mut labels: Vec<Option<PointLabel>> = vec![None; n];
    let mut num_clusters = 0;

    for start in 0..n {
        if labels[start].is_some() {
            continue;
        }
        if !core[start] {
            labels[start] = Some(PointLabel::Noise);
            continue;
        }
        let id = num_clusters;
        num_clusters += 1;
        labels[start] = Some(PointLabel::Cluster(id));
        let mut queue: VecDeque<usize> = neighborhoods[start].iter().copied().collect();
        while let Some(j) = queue.pop_front() {
            match labels[j] {
                Some(PointLabel::Cluster(_)) => {}
                Some(PointLabel::Noise) => {
                    // Reached from a core point after being passed over:
                    // a border point of this cluster.
                    labels[j] = Some(PointLabel::Cluster(id));
                }
                None => {
                    labels[j] = Some(PointLabel::Cluster(id));
                    if core[j] {
                        queue.extend(neighborhoods[j].iter().copied());
                    }
                }
            }
        }
    }

    let labels = labels.into_iter().map(|l| l.expect("every point is labeled")).collect();
    Ok(ClusterAssignment {
        points: points.to_vec(),
        labels,
        core,
        num_clusters,
        params: *params,
        radius,
    })
}
