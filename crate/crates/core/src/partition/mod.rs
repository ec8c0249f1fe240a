// SPDX-License-Identifier: Apache-2.0

//! Spectrum partitioning into slices, outer bound selection and count
//! validation with recovery.

mod bounds;
mod kmeans;
mod validate;

pub use bounds::{
    bounds_by_inertia, compute_bounds, inertia_partition, BoundConfig, DEFAULT_ALPHA,
    DEFAULT_BOUND_ATTEMPTS,
};
pub use kmeans::{balanced_starts, kmeans1d, KMeans1d, CLUSTER_GAP, DEFAULT_MAX_ITER};
pub use validate::{
    merge_pairs, validate_counts, RecoveryConfig, ValidationOutcome, MAX_RECOVERY_ROUNDS,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionSource {
    KMeansFromPriors,
    InertiaBisection,
}

/// Slices `(b_i, b_{i+1}]` of an outer interval with expected counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPartition {
    pub boundaries: Vec<f64>,
    pub counts: Vec<usize>,
    pub source: PartitionSource,
}

impl SpectrumPartition {
    pub fn new(boundaries: Vec<f64>, counts: Vec<usize>, source: PartitionSource) -> Result<Self> {
        if boundaries.len() < 2 || counts.len() + 1 != boundaries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} boundaries do not describe {} slices",
                boundaries.len(),
                counts.len()
            )));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "slice boundaries must increase strictly".into(),
            ));
        }
        Ok(Self {
            boundaries,
            counts,
            source,
        })
    }

    /// Clusters the prior values inside `[b0, bk]` into at most `k` slices.
    pub fn from_priors(prior: &[f64], b0: f64, bk: f64, k: usize) -> Result<Self> {
        if !(b0 < bk) {
            return Err(Error::InvalidInterval {
                lower: b0,
                upper: bk,
            });
        }
        let inside: Vec<f64> = prior
            .iter()
            .copied()
            .filter(|&x| x >= b0 && x <= bk)
            .collect();
        if inside.is_empty() {
            return Self::new(vec![b0, bk], vec![0], PartitionSource::KMeansFromPriors);
        }
        let km = kmeans1d(&inside, k.min(inside.len()).max(1), DEFAULT_MAX_ITER)?;
        if km.degenerate {
            log::warn!(
                "only {} slices could be separated out of {k} requested",
                km.k()
            );
        }
        let mut boundaries = vec![b0];
        boundaries.extend(km.boundaries(&inside));
        boundaries.push(bk);
        Self::new(boundaries, km.sizes(), PartitionSource::KMeansFromPriors)
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn slice(&self, i: usize) -> (f64, f64) {
        (self.boundaries[i], self.boundaries[i + 1])
    }

    pub fn lower(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn upper(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn expected_total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_boundaries() {
        assert!(
            SpectrumPartition::new(vec![0.0, 0.0], vec![1], PartitionSource::InertiaBisection)
                .is_err()
        );
        assert!(SpectrumPartition::new(
            vec![0.0, 1.0],
            vec![1, 2],
            PartitionSource::InertiaBisection
        )
        .is_err());
    }

    #[test]
    fn from_priors_counts_values_inside() {
        let prior = [-10.0, 0.0, 0.1, 0.2, 5.0, 5.1, 20.0];
        let p = SpectrumPartition::from_priors(&prior, -1.0, 6.0, 2).unwrap();
        assert_eq!(p.counts, vec![3, 2]);
        assert_eq!(p.expected_total(), 5);
        let (_, mid) = p.slice(0);
        assert!(mid > 0.2 && mid < 5.0);
    }
}
