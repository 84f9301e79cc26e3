//! Naive density-based clustering reference.
//!
//! Quadratic neighborhood scans and depth-first cluster growth; the main
//! crate expands breadth-first, so exact agreement of the label vectors
//! checks that cluster membership does not depend on expansion order.

use crate::sphere::sphere_distance_km;

pub struct NaiveClustering {
    /// Cluster id per point, `None` for noise.
    pub labels: Vec<Option<usize>>,
    /// Core flag per point (neighborhood of at least `min_pts`, counting
    /// the point itself).
    pub core: Vec<bool>,
    pub num_clusters: usize,
}

pub fn naive_dbscan(
    points: &[(f64, f64)],
    eps_km: f64,
    min_pts: usize,
    radius_km: f64,
) -> NaiveClustering {
    let n = points.len();
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    sphere_distance_km(
                        points[i].0,
                        points[i].1,
                        points[j].0,
                        points[j].1,
                        radius_km,
                    ) <= eps_km
                })
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighborhoods.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut num_clusters = 0;
    for i in 0..n {
        if labels[i].is_some() || !core[i] {
            continue;
        }
        let id = num_clusters;
        num_clusters += 1;
        labels[i] = Some(id);
        let mut stack = vec![i];
        while let Some(p) = stack.pop() {
            for &q in neighborhoods[p].iter().rev() {
                if labels[q].is_none() {
                    labels[q] = Some(id);
                    if core[q] {
                        stack.push(q);
                    }
                }
            }
        }
    }
    NaiveClustering { labels, core, num_clusters }
}

/// Nearest core point within `eps_km` of `probe`; ties on distance go to
/// the smaller cluster id.
pub fn naive_region_of(
    points: &[(f64, f64)],
    clustering: &NaiveClustering,
    probe: (f64, f64),
    eps_km: f64,
    radius_km: f64,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, &(lat, lon)) in points.iter().enumerate() {
        if !clustering.core[i] {
            continue;
        }
        let d = sphere_distance_km(probe.0, probe.1, lat, lon, radius_km);
        if d > eps_km {
            continue;
        }
        let id = clustering.labels[i].expect("core points are always clustered");
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
