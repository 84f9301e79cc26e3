//! Wilcoxon signed-rank test for paired per-fold accuracies.
//!
//! Zero differences are dropped, absolute differences are ranked with
//! midranks for ties, and the statistic is the smaller of the positive and
//! negative rank sums. Up to 20 effective pairs the two-sided p-value is
//! exact, from full enumeration of the 2^n sign assignments; beyond that a
//! normal approximation with tie-corrected variance and a continuity
//! correction is used.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest n for which the exact null distribution is enumerated.
const EXACT_LIMIT: usize = 20;

/// Significance threshold for the reported boolean.
const ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WilcoxonResult {
    /// min(positive-rank sum, negative-rank sum).
    pub w_statistic: f64,
    /// Number of non-zero differences.
    pub n_effective: usize,
    pub p_two_sided: f64,
    pub significant_at_0_05: bool,
}

/// Two-sided Wilcoxon signed-rank test of paired samples `a` and `b`.
///
/// With no non-zero differences the test is vacuous: W = 0, p = 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("signed-rank test needs at least one pair"));
    }
    for &x in a.iter().chain(b) {
        if !x.is_finite() {
            return Err(Error::Domain(format!("paired value {x} is not finite")));
        }
    }

    let diffs: Vec<f64> =
        a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_statistic: 0.0,
            n_effective: 0,
            p_two_sided: 1.0,
            significant_at_0_05: false,
        });
    }

    let (ranks, tie_groups) = midranks(&diffs);
    let w_plus: f64 =
        diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| *r).sum();
    let total: f64 = ranks.iter().sum();
    let w = w_plus.min(total - w_plus);

    let p = if n <= EXACT_LIMIT {
        exact_p(&ranks, w)
    } else {
        normal_p(n, &tie_groups, w)
    };
    Ok(WilcoxonResult {
        w_statistic: w,
        n_effective: n,
        p_two_sided: p,
        significant_at_0_05: p < ALPHA,
    })
}

/// Ranks of |diffs| in ascending order, ties sharing their average rank.
/// Also returns the size of each tie group for the variance correction.
fn midranks(diffs: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().partial_cmp(&diffs[j].abs()).expect("finite"));

    let mut ranks = vec![0.0; n];
    let mut tie_groups = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // Positions start..end (0-based) share ranks start+1 ..= end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        tie_groups.push(end - start);
        start = end;
    }
    (ranks, tie_groups)
}

/// Exact two-sided p: the fraction of the 2^n equally likely sign
/// assignments whose min(S+, S-) is at most the observed statistic.
/// Midrank sums are multiples of one half, so the comparisons are exact.
fn exact_p(ranks: &[f64], w_observed: f64) -> f64 {
    let n = ranks.len();
    let total: f64 = ranks.iter().sum();
    let assignments = 1u64 << n;
    let mut at_most = 0u64;
    for mask in 0..assignments {
        let s_plus: f64 = ranks
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, r)| *r)
            .sum();
        if s_plus.min(total - s_plus) <= w_observed {
            at_most += 1;
        }
    }
    at_most as f64 / assignments as f64
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
fn normal_p(n: usize, tie_groups: &[usize], w: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 =
        tie_groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if variance <= 0.0 {
        return 1.0;
    }
    let z = (w - mean + 0.5) / variance.sqrt();
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * standard.cdf(z)).clamp(0.0, 1.0)
}
