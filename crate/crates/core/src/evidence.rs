//! Credal partition over singleton clusters plus the whole frame `Ω`.
//!
//! Stable samples carry crisp masses. Unstable samples are visited in order
//! of increasing sparse degree; each collects one piece of evidence from
//! each of its `k` nearest already-labelled samples, discounted by
//! `exp(-(distance + sparse degree))`, and the pieces are fused with
//! Dempster's rule. Mass left on `Ω` measures how little the neighborhood
//! says about the sample and drives outlier detection.

use serde::Serialize;

use crate::dataset::DistanceMatrix;
use crate::density::SparseDegreeTable;
use crate::error::{GfdcError, Result};
use crate::fusion::InitialClusters;

/// Basic belief assignment restricted to the singletons `{Cl_u}` and `Ω`.
/// Masses on other subsets are zero and not stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassVector {
    pub singletons: Vec<f64>,
    pub omega: f64,
}

impl MassVector {
    /// Checks ranges and that the masses sum to 1 within `1e-9`.
    pub fn new(singletons: Vec<f64>, omega: f64) -> Result<Self> {
        let m = MassVector { singletons, omega };
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        if !m.singletons.iter().copied().all(in_range) || !in_range(m.omega) || (m.total() - 1.0).abs() > 1e-9 {
            return Err(GfdcError::InvalidInput(format!("masses do not form a normalized assignment: {m:?}")));
        }
        Ok(m)
    }

    /// All belief on `Ω`: total ignorance.
    pub fn vacuous(c: usize) -> Self {
        MassVector { singletons: vec![0.0; c], omega: 1.0 }
    }

    /// All belief on cluster `u`.
    pub fn crisp(c: usize, u: usize) -> Self {
        let mut singletons = vec![0.0; c];
        singletons[u] = 1.0;
        MassVector { singletons, omega: 0.0 }
    }

    pub fn c(&self) -> usize {
        self.singletons.len()
    }

    pub fn total(&self) -> f64 {
        self.singletons.iter().sum::<f64>() + self.omega
    }

    /// Smallest index among the largest singleton masses.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (u, &m) in self.singletons.iter().enumerate() {
            if m > self.singletons[best] {
                best = u;
            }
        }
        best
    }
}

/// Evidence that neighbor `j` (with masses `m_j`, at distance `d_ij`, with
/// sparse degree `sd_j`) gives about a sample.
pub fn evidence_mass(m_j: &MassVector, d_ij: f64, sd_j: f64) -> MassVector {
    let factor = (-(d_ij + sd_j)).exp();
    let singletons: Vec<f64> = m_j.singletons.iter().map(|m| factor * m).collect();
    let omega = 1.0 - singletons.iter().sum::<f64>();
    MassVector { singletons, omega }
}

/// Mass of the empty intersection. With singleton and `Ω` focal sets only
/// distinct singletons conflict.
pub fn conflict(m1: &MassVector, m2: &MassVector) -> f64 {
    let s1: f64 = m1.singletons.iter().sum();
    let s2: f64 = m2.singletons.iter().sum();
    let agree: f64 = m1.singletons.iter().zip(&m2.singletons).map(|(a, b)| a * b).sum();
    (s1 * s2 - agree).max(0.0)
}

/// Unnormalized conjunctive combination restricted to non-empty focal sets.
fn conjunctive(m1: &MassVector, m2: &MassVector) -> MassVector {
    let singletons =
        m1.singletons.iter().zip(&m2.singletons).map(|(a, b)| a * b + a * m2.omega + m1.omega * b).collect();
    MassVector { singletons, omega: m1.omega * m2.omega }
}

fn normalized(mut m: MassVector) -> Result<MassVector> {
    let norm = m.total();
    if norm.is_nan() || norm <= 0.0 {
        return Err(GfdcError::TotalConflict);
    }
    m.singletons.iter_mut().for_each(|v| *v /= norm);
    m.omega /= norm;
    Ok(m)
}

/// Dempster's rule: conjunctive combination renormalized by `1 - K`.
pub fn dempster_combine(m1: &MassVector, m2: &MassVector) -> Result<MassVector> {
    if m1.c() != m2.c() {
        return Err(GfdcError::InvalidInput("mass vectors over different frames".into()));
    }
    normalized(conjunctive(m1, m2))
}

/// Left fold of [`dempster_combine`], starting from the vacuous mass.
pub fn combine_all(c: usize, masses: &[MassVector]) -> Result<MassVector> {
    masses.iter().try_fold(MassVector::vacuous(c), |acc, m| dempster_combine(&acc, m))
}

/// The same combination in closed form: before normalization the mass on
/// `Cl_u` is `prod(m[u] + Ω) - prod(Ω)` and the mass on `Ω` is `prod(Ω)`.
pub fn combine_closed_form(c: usize, masses: &[MassVector]) -> Result<MassVector> {
    let omega: f64 = masses.iter().map(|m| m.omega).product();
    let singletons =
        (0..c).map(|u| masses.iter().map(|m| m.singletons[u] + m.omega).product::<f64>() - omega).collect();
    normalized(MassVector { singletons, omega })
}

/// Crisp masses for every stable sample; `None` for unstable ones.
pub fn init_stable_masses(init: &InitialClusters, n: usize) -> Vec<Option<MassVector>> {
    let mut masses = vec![None; n];
    for (u, cluster) in init.clusters.iter().enumerate() {
        for &i in cluster {
            masses[i] = Some(MassVector::crisp(init.c, u));
        }
    }
    masses
}

#[derive(Debug, Clone)]
pub struct CredalAssignment {
    pub masses: Vec<MassVector>,
    /// Unstable samples in the order they were assigned.
    pub order: Vec<usize>,
}

/// Assigns every unstable sample in order of increasing sparse degree
/// (ties by index). Each step uses the `k` nearest samples already in the
/// labelled set, including previously assigned unstable samples with their
/// soft masses, then adds the sample to that set.
pub fn assign_unstable(
    init: &InitialClusters,
    table: &SparseDegreeTable,
    dm: &DistanceMatrix,
) -> Result<CredalAssignment> {
    let n = dm.n();
    let c = init.c;
    let mut masses = init_stable_masses(init, n);
    let mut order = init.unstable.clone();
    order.sort_by(|&a, &b| table.sd[a].total_cmp(&table.sd[b]).then(a.cmp(&b)));

    let mut evidence = Vec::with_capacity(table.k);
    for &i in &order {
        evidence.clear();
        for &j in &table.neighbor_order[i] {
            if let Some(m_j) = &masses[j] {
                evidence.push(evidence_mass(m_j, dm.get(i, j), table.sd[j]));
                if evidence.len() == table.k {
                    break;
                }
            }
        }
        masses[i] = Some(combine_all(c, &evidence)?);
    }
    let masses = masses.into_iter().map(|m| m.expect("every sample assigned")).collect();
    Ok(CredalAssignment { masses, order })
}

/// Hard decision for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// 0-based cluster index.
    Cluster(usize),
    Outlier,
}

impl Label {
    /// External integer form: clusters count from 1, outliers are `-1`.
    pub fn code(self) -> i64 {
        match self {
            Label::Cluster(u) => u as i64 + 1,
            Label::Outlier => -1,
        }
    }
}

/// Argmax over singleton masses, or an outlier when `Ω` mass exceeds `tau`.
pub fn harden(masses: &[MassVector], tau: Option<f64>) -> Vec<Label> {
    masses
        .iter()
        .map(|m| match tau {
            Some(t) if m.omega > t => Label::Outlier,
            _ => Label::Cluster(m.argmax()),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: Vec<Label>,
    pub masses: Vec<MassVector>,
    pub outlier_threshold: Option<f64>,
    pub assignment_order: Vec<usize>,
}

impl ClusteringResult {
    pub fn label_codes(&self) -> Vec<i64> {
        self.labels.iter().map(|l| l.code()).collect()
    }

    pub fn outliers(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == Label::Outlier).collect()
    }
}
