//! End-to-end runs: distances, sparse degrees, fusion into initial clusters,
//! evidential assignment and hardening.

use std::time::{Duration, Instant};

use crate::dataset::{pairwise_distances, standardize, Dataset, DistanceMatrix};
use crate::density::{default_k, sparse_degree_table, SparseDegreeTable};
use crate::error::{GfdcError, Result};
use crate::evidence::{assign_unstable, harden, ClusteringResult};
use crate::fusion::{build_initial_clusters, FusionOutcome};

/// Run parameters. There is no randomness anywhere, so no seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Gfdc {
    pub clusters: usize,
    /// Outlier threshold on `Ω` mass; `None` disables outlier detection.
    pub tau: Option<f64>,
    /// Neighbor count; defaults to `max(c, ceil(log2 n))`.
    pub k: Option<usize>,
    pub standardize: bool,
}

impl Gfdc {
    pub fn new(clusters: usize) -> Self {
        Gfdc { clusters, tau: None, k: None, standardize: false }
    }

    pub fn tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn standardize(mut self, on: bool) -> Self {
        self.standardize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(GfdcError::InvalidConfig("cluster count must be at least 1".into()));
        }
        if let Some(t) = self.tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(GfdcError::InvalidConfig(format!("tau must lie in [0, 1], got {t}")));
            }
        }
        if self.k == Some(0) {
            return Err(GfdcError::InvalidConfig("k must be at least 1".into()));
        }
        Ok(())
    }

    /// The neighbor count used for `n` samples. The default is capped at
    /// `n - 1`; an explicit `k` is not.
    pub fn neighbor_count(&self, n: usize) -> usize {
        match self.k {
            Some(k) => k,
            None => self.clusters.max(default_k(n)).min(n.saturating_sub(1)).max(1),
        }
    }

    pub fn fit(&self, data: &Dataset) -> Result<Fit> {
        self.validate()?;
        let mut timings = StageTimings::default();
        let start = now();
        let dm = if self.standardize { pairwise_distances(&standardize(data)) } else { pairwise_distances(data) };
        timings.distances = since(start);
        self.fit_distances(dm, timings)
    }

    /// Runs from a precomputed distance matrix.
    pub fn fit_matrix(&self, dm: DistanceMatrix) -> Result<Fit> {
        self.validate()?;
        self.fit_distances(dm, StageTimings::default())
    }

    fn fit_distances(&self, dm: DistanceMatrix, mut timings: StageTimings) -> Result<Fit> {
        let n = dm.n();
        let k = self.neighbor_count(n);

        let start = now();
        let table = sparse_degree_table(&dm, k)?;
        timings.density = since(start);

        let start = now();
        let fusion = build_initial_clusters(&dm, &table, self.clusters)?;
        timings.fusion = since(start);

        let start = now();
        let assignment = assign_unstable(&fusion.initial, &table, &dm)?;
        let labels = harden(&assignment.masses, self.tau);
        timings.evidence = since(start);

        let result = ClusteringResult {
            labels,
            masses: assignment.masses,
            outlier_threshold: self.tau,
            assignment_order: assignment.order,
        };
        Ok(Fit { k, table, fusion, result, timings })
    }
}

// wasm32-unknown-unknown has no clock; timings stay zero there
#[cfg(not(target_arch = "wasm32"))]
fn now() -> Option<Instant> {
    Some(Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn now() -> Option<Instant> {
    None
}

fn since(start: Option<Instant>) -> Duration {
    start.map_or(Duration::ZERO, |t| t.elapsed())
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub distances: Duration,
    pub density: Duration,
    pub fusion: Duration,
    pub evidence: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.distances + self.density + self.fusion + self.evidence
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct Fit {
    pub k: usize,
    pub table: SparseDegreeTable,
    pub fusion: FusionOutcome,
    pub result: ClusteringResult,
    pub timings: StageTimings,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::Label;

    fn micro() -> Dataset {
        Dataset::from_rows(&[[0.0], [1.0], [3.0]]).unwrap()
    }

    #[test]
    fn micro_end_to_end() {
        let fit = Gfdc::new(2).fit(&micro()).unwrap();
        assert_eq!(fit.k, 2);
        assert_eq!(fit.fusion.initial.clusters, vec![vec![0], vec![1]]);
        // sample 2 sees sample 1 (d 2, sd 3) and sample 0 (d 3, sd 4)
        let (a, b) = ((-5f64).exp(), (-7f64).exp());
        let k = a * b;
        let m = &fit.result.masses[2];
        approx::assert_abs_diff_eq!(m.singletons[0], b * (1.0 - a) / (1.0 - k), epsilon = 1e-15);
        approx::assert_abs_diff_eq!(m.singletons[1], a * (1.0 - b) / (1.0 - k), epsilon = 1e-15);
        assert_eq!(fit.result.labels, vec![Label::Cluster(0), Label::Cluster(1), Label::Cluster(1)]);
        assert_eq!(fit.result.assignment_order, vec![2]);
    }

    #[test]
    fn config_validation() {
        let ds = micro();
        assert!(matches!(Gfdc::new(0).fit(&ds), Err(GfdcError::InvalidConfig(_))));
        assert!(matches!(Gfdc::new(2).tau(1.5).fit(&ds), Err(GfdcError::InvalidConfig(_))));
        assert!(matches!(Gfdc::new(2).k(0).fit(&ds), Err(GfdcError::InvalidConfig(_))));
        assert!(matches!(Gfdc::new(2).k(3).fit(&ds), Err(GfdcError::KOutOfRange { .. })));
        assert!(matches!(Gfdc::new(4).fit(&ds), Err(GfdcError::Unsatisfiable { .. })));
    }

    #[test]
    fn as_many_clusters_as_samples() {
        let err = Gfdc::new(3).fit(&micro()).unwrap_err();
        assert!(matches!(err, GfdcError::Unsatisfiable { requested: 3, .. }));
    }

    #[test]
    fn neighbor_count_rules() {
        assert_eq!(Gfdc::new(2).neighbor_count(373), 9);
        assert_eq!(Gfdc::new(12).neighbor_count(373), 12);
        assert_eq!(Gfdc::new(2).neighbor_count(3), 2);
        assert_eq!(Gfdc::new(2).k(4).neighbor_count(3), 4);
    }
}
