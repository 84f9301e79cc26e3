//! Exact signed-rank reference by subset counting.
//!
//! Instead of enumerating 2^n sign vectors, this builds the distribution
//! of the positive-rank sum with a counting table over doubled ranks
//! (midranks are multiples of one half, so doubling makes them integers
//! and every comparison exact).

pub struct RefWilcoxon {
    /// min(W+, W-) over the nonzero differences.
    pub w: f64,
    /// Number of nonzero differences.
    pub n: usize,
    /// Exact two-sided p: share of sign assignments whose min rank sum is
    /// at most the observed one.
    pub p: f64,
}

pub fn exact_wilcoxon(a: &[f64], b: &[f64]) -> RefWilcoxon {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return RefWilcoxon { w: 0.0, n: 0, p: 1.0 };
    }

    // Midranks over |d|, doubled to integers.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut doubled_ranks = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // Positions start..end (0-based) share the average 1-based rank;
        // doubled: (start+1) + end.
        let doubled = (start + 1 + end) as u64;
        for &idx in &order[start..end] {
            doubled_ranks[idx] = doubled;
        }
        start = end;
    }

    let total: u64 = doubled_ranks.iter().sum();
    let w_plus: u64 = diffs
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let w_doubled = w_plus.min(total - w_plus);

    // counts[s] = number of subsets of the doubled ranks summing to s.
    let mut counts = vec![0u128; total as usize + 1];
    counts[0] = 1;
    for &r in &doubled_ranks {
        for s in (r as usize..counts.len()).rev() {
            counts[s] += counts[s - r as usize];
        }
    }
    let favorable: u128 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (s as u64).min(total - s as u64) <= w_doubled)
        .map(|(_, c)| *c)
        .sum();

    RefWilcoxon {
        w: w_doubled as f64 / 2.0,
        n,
        p: favorable as f64 / (n as f64).exp2(),
    }
}
