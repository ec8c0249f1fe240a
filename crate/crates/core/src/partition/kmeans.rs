// SPDX-License-Identifier: Apache-2.0

//! One-dimensional k-means over sorted values.
//!
//! Groups of sorted data are contiguous, so an iteration only has to
//! recompute `k` centroids from prefix sums and slide each boundary between
//! two neighbouring groups. When that stalls in a local optimum, one
//! split-merge move (also linear in `n + k`) is tried before stopping.

use std::ops::Range;

use crate::error::{Error, Result};

/// Values closer than this must not be split across slices.
pub const CLUSTER_GAP: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans1d {
    /// Group start indices plus the final `n`; group `g` is
    /// `starts[g]..starts[g + 1]`.
    pub starts: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Operations (divisions, midpoints, comparisons) per iteration.
    pub ops_per_iter: Vec<usize>,
    /// Set when fewer nonempty groups than requested could be formed.
    pub degenerate: bool,
}

impl KMeans1d {
    pub fn k(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn group(&self, g: usize) -> Range<usize> {
        self.starts[g]..self.starts[g + 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.starts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Interior boundaries, each the midpoint of the gap between two
    /// neighbouring groups.
    pub fn boundaries(&self, values: &[f64]) -> Vec<f64> {
        self.starts[1..self.k()]
            .iter()
            .map(|&s| 0.5 * (values[s - 1] + values[s]))
            .collect()
    }
}

/// Start indices of the balanced contiguous split: the first `n mod k`
/// groups get one extra point.
pub fn balanced_starts(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    let mut starts = Vec::with_capacity(k + 1);
    let mut s = 0;
    starts.push(0);
    for g in 0..k {
        s += base + usize::from(g < extra);
        starts.push(s);
    }
    starts
}

/// Clusters sorted `values` into at most `k` contiguous groups.
///
/// Groups whose values sit closer than [`CLUSTER_GAP`] to a neighbouring
/// group are merged or their boundary moved, so the result may have fewer
/// than `k` groups; `degenerate` reports that case.
pub fn kmeans1d(values: &[f64], k: usize, max_iter: usize) -> Result<KMeans1d> {
    let n = values.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} groups from {n} values"
        )));
    }
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(
            "values must be sorted ascending".into(),
        ));
    }
    // shifted for accuracy of the squared sums
    let shift = values[n / 2];
    let mut prefix = Vec::with_capacity(n + 1);
    let mut prefix_sq = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    prefix_sq.push(0.0);
    for &v in values {
        let x = v - shift;
        prefix.push(prefix.last().unwrap() + x);
        prefix_sq.push(prefix_sq.last().unwrap() + x * x);
    }
    let sums = Sums {
        prefix,
        prefix_sq,
        shift,
    };

    let mut starts = balanced_starts(n, k);
    let mut ops_per_iter = Vec::new();
    let mut converged = false;
    while ops_per_iter.len() < max_iter {
        let (next, ops) = lloyd_step(values, &sums, &starts);
        ops_per_iter.push(ops);
        if next != starts {
            starts = next;
            continue;
        }
        if ops_per_iter.len() >= max_iter {
            converged = true;
            break;
        }
        let (jump, ops) = split_merge(&sums, &starts);
        ops_per_iter.push(ops);
        match jump {
            Some(next) => starts = next,
            None => {
                converged = true;
                break;
            }
        }
    }

    let distinct = 1 + values
        .windows(2)
        .filter(|w| w[1] - w[0] >= CLUSTER_GAP)
        .count();
    let starts = separate_clusters(values, &starts);
    let degenerate = starts.len() - 1 < k || distinct < k;
    Ok(KMeans1d {
        starts,
        iterations: ops_per_iter.len(),
        converged,
        ops_per_iter,
        degenerate,
    })
}

struct Sums {
    prefix: Vec<f64>,
    prefix_sq: Vec<f64>,
    shift: f64,
}

impl Sums {
    fn mean(&self, a: usize, b: usize) -> f64 {
        (self.prefix[b] - self.prefix[a]) / (b - a) as f64 + self.shift
    }

    /// Sum of squared deviations from the mean over `a..b`.
    fn sse(&self, a: usize, b: usize) -> f64 {
        if b - a < 2 {
            return 0.0;
        }
        let s = self.prefix[b] - self.prefix[a];
        (self.prefix_sq[b] - self.prefix_sq[a] - s * s / (b - a) as f64).max(0.0)
    }
}

/// One Lloyd update: centroids from prefix sums, then every cut slides to
/// the midpoint of its two neighbouring centroids.
fn lloyd_step(values: &[f64], sums: &Sums, starts: &[usize]) -> (Vec<usize>, usize) {
    let k = starts.len() - 1;
    let mut ops = 0;
    let centroids: Vec<f64> = (0..k)
        .map(|g| {
            ops += 1;
            sums.mean(starts[g], starts[g + 1])
        })
        .collect();
    let mut next = starts.to_vec();
    for g in 0..k - 1 {
        let mid = 0.5 * (centroids[g] + centroids[g + 1]);
        ops += 1;
        // keep both neighbours nonempty
        let lo = next[g] + 1;
        let hi = starts[g + 2] - 1;
        let mut s = lo;
        while s < hi && values[s] <= mid {
            s += 1;
            ops += 1;
        }
        ops += 1;
        next[g + 1] = s;
    }
    (next, ops)
}

/// Escape from a local optimum of the Lloyd iteration: merge the adjacent
/// pair that costs least and split the group that gains most, if that
/// lowers the total squared error.
fn split_merge(sums: &Sums, starts: &[usize]) -> (Option<Vec<usize>>, usize) {
    let k = starts.len() - 1;
    let mut ops = 0;
    if k < 3 {
        return (None, ops);
    }
    let sse: Vec<f64> = (0..k).map(|g| sums.sse(starts[g], starts[g + 1])).collect();
    ops += k;
    // best two-way split of every group: (gain, group, cut)
    let mut splits = Vec::with_capacity(k);
    for g in 0..k {
        let (a, b) = (starts[g], starts[g + 1]);
        let mut best: Option<(f64, usize)> = None;
        for t in a + 1..b {
            let e = sums.sse(a, t) + sums.sse(t, b);
            ops += 1;
            if best.is_none_or(|(be, _)| e < be) {
                best = Some((e, t));
            }
        }
        if let Some((e, t)) = best {
            splits.push((sse[g] - e, g, t));
        }
    }
    let mut merge: Option<(f64, usize)> = None;
    for g in 0..k - 1 {
        let cost = sums.sse(starts[g], starts[g + 2]) - sse[g] - sse[g + 1];
        ops += 1;
        if merge.is_none_or(|(c, _)| cost < c) {
            merge = Some((cost, g));
        }
    }
    let (cost, m) = merge.expect("k >= 3");
    // the split group must not be one of the merged pair
    let split = splits
        .iter()
        .filter(|&&(_, g, _)| g != m && g != m + 1)
        .max_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = sse.iter().sum();
    match split {
        Some(&(gain, _, cut)) if gain - cost > 1e-12 * total.max(f64::MIN_POSITIVE) => {
            let mut next: Vec<usize> = starts
                .iter()
                .copied()
                .filter(|&s| s != starts[m + 1])
                .collect();
            let pos = next.partition_point(|&s| s < cut);
            next.insert(pos, cut);
            (Some(next), ops)
        }
        _ => (None, ops),
    }
}

/// Moves every interior cut to the nearest position whose gap is at least
/// [`CLUSTER_GAP`]; cuts that collide are merged and cuts with no admissible
/// position are dropped.
fn separate_clusters(values: &[f64], starts: &[usize]) -> Vec<usize> {
    let n = values.len();
    let admissible: Vec<usize> = (1..n)
        .filter(|&t| values[t] - values[t - 1] >= CLUSTER_GAP)
        .collect();
    let mut out = vec![0];
    for &s in &starts[1..starts.len() - 1] {
        let snapped = match admissible.binary_search(&s) {
            Ok(i) => Some(admissible[i]),
            Err(i) => {
                let left = i.checked_sub(1).map(|j| admissible[j]);
                let right = admissible.get(i).copied();
                match (left, right) {
                    (Some(l), Some(r)) => Some(if s - l <= r - s { l } else { r }),
                    (l, r) => l.or(r),
                }
            }
        };
        if let Some(t) = snapped {
            if t > *out.last().unwrap() {
                out.push(t);
            }
        }
    }
    out.push(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_split() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let km = kmeans1d(&v, 2, 100).unwrap();
        assert_eq!(km.starts, vec![0, 3, 6]);
        assert_eq!(km.boundaries(&v), vec![3.5]);
        assert!(km.converged);
    }

    #[test]
    fn obvious_clusters() {
        let v = [0.0, 0.1, 0.2, 10.0, 10.1, 10.2];
        let km = kmeans1d(&v, 2, 100).unwrap();
        let b = km.boundaries(&v)[0];
        assert!(b > 0.2 && b < 10.0);
    }

    #[test]
    fn balanced_init_sizes() {
        let s = balanced_starts(10, 4);
        assert_eq!(s, vec![0, 3, 6, 8, 10]);
    }

    #[test]
    fn moves_boundary_off_tight_pair() {
        // balanced init cuts between 1.0 and 1.0 + 1e-9
        let v = [0.0, 1.0, 1.0 + 1e-9, 2.0];
        let km = kmeans1d(&v, 2, 0).unwrap();
        assert_eq!(km.k(), 2);
        assert!(km.starts[1] != 2);
    }

    #[test]
    fn too_few_distinct_values_is_flagged() {
        let v = [1.0, 1.0, 1.0, 2.0];
        let km = kmeans1d(&v, 3, 100).unwrap();
        assert!(km.degenerate);
        assert_eq!(km.k(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kmeans1d(&[1.0, 2.0], 3, 10).is_err());
        assert!(kmeans1d(&[2.0, 1.0], 1, 10).is_err());
        assert!(kmeans1d(&[1.0], 0, 10).is_err());
    }

    #[test]
    fn planted_clusters_land_in_largest_gaps() {
        let mut rng = bandslice_testkit::rng(8);
        use rand::Rng;
        let mut v = Vec::new();
        for c in 0..8 {
            for _ in 0..32 {
                v.push(c as f64 * 10.0 + rng.random::<f64>() * 0.5);
            }
        }
        v.sort_by(f64::total_cmp);
        let km = kmeans1d(&v, 8, 100).unwrap();
        let mut gaps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| b.total_cmp(a));
        let seventh = gaps[6];
        for &s in &km.starts[1..8] {
            assert!(v[s] - v[s - 1] >= seventh);
        }
    }

    #[test]
    fn escapes_split_cluster_local_optimum() {
        // balanced init merges the first two clusters and splits the last
        let sizes = [22, 24, 35, 38, 39];
        let gaps = [3.09, 5.81, 1.74, 6.5];
        let mut v = Vec::new();
        let mut base = 0.0;
        for (c, &m) in sizes.iter().enumerate() {
            v.extend((0..m).map(|i| base + 1e-2 * i as f64 / m as f64));
            base += 1e-2 + gaps.get(c).copied().unwrap_or(0.0);
        }
        let km = kmeans1d(&v, 5, 100).unwrap();
        assert!(km.converged);
        assert_eq!(km.sizes(), sizes);
        for &ops in &km.ops_per_iter {
            assert!(ops <= 3 * (v.len() + 5));
        }
    }

    proptest! {
        #[test]
        fn groups_are_contiguous_and_cluster_safe(
            mut v in prop::collection::vec(-5.0f64..5.0, 1..120),
            k in 1usize..10,
            dup in 0usize..5,
        ) {
            // sprinkle near-duplicates
            for i in 0..dup.min(v.len()) {
                let x = v[i];
                v.push(x + 1e-9);
            }
            v.sort_by(f64::total_cmp);
            let k = k.min(v.len());
            let km = kmeans1d(&v, k, 100).unwrap();
            prop_assert_eq!(km.starts[0], 0);
            prop_assert_eq!(*km.starts.last().unwrap(), v.len());
            prop_assert!(km.starts.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(km.k() <= k);
            for &s in &km.starts[1..km.k()] {
                prop_assert!(v[s] - v[s - 1] >= CLUSTER_GAP);
            }
            let b = km.boundaries(&v);
            for (g, &x) in b.iter().enumerate() {
                let s = km.starts[g + 1];
                prop_assert!(x > v[s - 1] && x < v[s]);
            }
            for &ops in &km.ops_per_iter {
                prop_assert!(ops <= 3 * (v.len() + k));
            }
        }
    }
}
