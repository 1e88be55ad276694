//! Granule fusion: intersecting granules become granule-clusters, sparse
//! granule-clusters flow into their denser nearest neighbor to form
//! granule-flocks, and single-linkage agglomeration (or recursive
//! re-granulation when there are too few flocks) yields exactly `c` initial
//! clusters.

use serde::{Deserialize, Serialize};

use crate::dataset::DistanceMatrix;
use crate::density::{default_k, sparse_degree_table, SparseDegreeTable};
use crate::error::{GfdcError, Result};
use crate::granulation::{generate_granules, ungranulated, Granule};

/// A set of samples produced by one fusion stage. `id` is the rank of the
/// group's smallest member among its siblings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleGroup {
    pub id: usize,
    /// Sorted ascending, nonempty.
    pub members: Vec<usize>,
}

/// Output of fusion by intersection.
pub type GranuleCluster = SampleGroup;
/// Output of fusion by density transmission.
pub type GranuleFlock = SampleGroup;

/// `c` disjoint stable sets plus every sample outside them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InitialClusters {
    pub c: usize,
    pub clusters: Vec<Vec<usize>>,
    pub unstable: Vec<usize>,
}

impl InitialClusters {
    /// Packages `c` disjoint member sets over `n` samples.
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for cl in &clusters {
            if cl.is_empty() {
                return Err(GfdcError::InvalidInput("empty initial cluster".into()));
            }
            for &i in cl {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(GfdcError::InvalidSampleSets);
                }
            }
        }
        let unstable = (0..n).filter(|&i| !seen[i]).collect();
        Ok(InitialClusters { c: clusters.len(), clusters, unstable })
    }

    pub fn stable_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Sorts each set, orders the sets by smallest member and assigns ids.
fn renumber(mut sets: Vec<Vec<usize>>) -> Vec<SampleGroup> {
    for s in &mut sets {
        s.sort_unstable();
    }
    sets.retain(|s| !s.is_empty());
    sets.sort_by_key(|s| s[0]);
    sets.into_iter().enumerate().map(|(id, members)| SampleGroup { id, members }).collect()
}

/// Groups the elements `0..m` by their root in `ds`, restricted to `keep`.
fn components(ds: &mut DisjointSets, keep: impl Iterator<Item = usize>) -> Vec<Vec<usize>> {
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for x in keep {
        by_root.entry(ds.find(x)).or_default().push(x);
    }
    by_root.into_values().collect()
}

/// Fusion by intersection: connected components of the graph whose edges
/// join granules sharing at least one sample.
pub fn fuse_intersecting(granules: &[Granule], n: usize) -> Vec<GranuleCluster> {
    let mut ds = DisjointSets::new(n);
    let mut covered = vec![false; n];
    for g in granules {
        for &m in &g.members {
            covered[m] = true;
            ds.union(g.center, m);
        }
    }
    renumber(components(&mut ds, (0..n).filter(|&i| covered[i])))
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(GfdcError::InvalidSampleSets);
    }
    let set: std::collections::HashSet<usize> = a.iter().copied().collect();
    if b.iter().any(|x| set.contains(x)) {
        return Err(GfdcError::InvalidSampleSets);
    }
    Ok(())
}

/// Single-linkage distance: the closest cross pair between two disjoint sets.
pub fn gc_distance(a: &[usize], b: &[usize], dm: &DistanceMatrix) -> Result<f64> {
    check_disjoint(a, b)?;
    Ok(a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| dm.get(i, j)).fold(f64::INFINITY, f64::min))
}

/// Mean sparse degree of a nonempty set.
pub fn gc_sparse_degree(a: &[usize], table: &SparseDegreeTable) -> Result<f64> {
    if a.is_empty() {
        return Err(GfdcError::InvalidSampleSets);
    }
    Ok(a.iter().map(|&i| table.sd[i]).sum::<f64>() / a.len() as f64)
}

/// Single-linkage distances between every pair of groups, `g x g` row-major.
fn group_distances(groups: &[SampleGroup], dm: &DistanceMatrix) -> Vec<f64> {
    let g = groups.len();
    let mut owner = vec![usize::MAX; dm.n()];
    let mut members = Vec::new();
    for grp in groups {
        for &m in &grp.members {
            owner[m] = grp.id;
            members.push(m);
        }
    }
    let mut out = vec![f64::INFINITY; g * g];
    for (pos, &i) in members.iter().enumerate() {
        let gi = owner[i];
        let row = dm.row(i);
        for &j in &members[pos + 1..] {
            let gj = owner[j];
            if gi != gj {
                let d = row[j];
                if d < out[gi * g + gj] {
                    out[gi * g + gj] = d;
                    out[gj * g + gi] = d;
                }
            }
        }
    }
    out
}

/// Fusion by density transmission. One pass over the clusters in id order:
/// each one links to its nearest cluster (ties to the smaller id) when that
/// neighbor is at least as dense. Distances and mean sparse degrees are
/// taken from the clusters as given; linked clusters merge transitively.
pub fn fuse_density_transmission(
    gcs: &[GranuleCluster],
    table: &SparseDegreeTable,
    dm: &DistanceMatrix,
) -> Vec<GranuleFlock> {
    let gcs = renumber(gcs.iter().map(|c| c.members.clone()).collect());
    let g = gcs.len();
    if g <= 1 {
        return gcs;
    }
    let dist = group_distances(&gcs, dm);
    let sd: Vec<f64> = gcs.iter().map(|c| gc_sparse_degree(&c.members, table).unwrap_or(f64::INFINITY)).collect();
    let mut ds = DisjointSets::new(g);
    for a in 0..g {
        let row = &dist[a * g..(a + 1) * g];
        let nearest = (0..g)
            .filter(|&b| b != a)
            .min_by(|&x, &y| row[x].total_cmp(&row[y]).then(x.cmp(&y)))
            .expect("at least two clusters");
        if sd[a] >= sd[nearest] {
            ds.union(a, nearest);
        }
    }
    let sets = components(&mut ds, 0..g)
        .into_iter()
        .map(|ids| ids.into_iter().flat_map(|id| gcs[id].members.iter().copied()).collect())
        .collect();
    renumber(sets)
}

/// Fusion by distance: merges the closest pair of flocks (single linkage,
/// ties to the lexicographically smallest pair of ids) until `c` remain.
pub fn fuse_by_distance(flocks: &[GranuleFlock], c: usize, dm: &DistanceMatrix) -> Result<InitialClusters> {
    let g = flocks.len();
    if c == 0 || g < c {
        return Err(GfdcError::InvalidInput(format!("cannot fuse {g} flocks into {c} clusters")));
    }
    // `flocks` may arrive in any order; ids must follow smallest member
    let flocks = renumber(flocks.iter().map(|f| f.members.clone()).collect());
    let mut sets: Vec<Option<Vec<usize>>> = flocks.iter().map(|f| Some(f.members.clone())).collect();
    if g > c {
        let mut dist = group_distances(&flocks, dm);
        let mut active = vec![true; g];
        // best[i]: closest active j > i as (distance, j)
        let row_best = |dist: &[f64], active: &[bool], i: usize| -> Option<(f64, usize)> {
            ((i + 1)..g)
                .filter(|&j| active[j])
                .map(|j| (dist[i * g + j], j))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        };
        let mut best: Vec<Option<(f64, usize)>> = (0..g).map(|i| row_best(&dist, &active, i)).collect();
        for _ in 0..(g - c) {
            let (a, (_, b)) = (0..g)
                .filter(|&i| active[i])
                .filter_map(|i| best[i].map(|bst| (i, bst)))
                .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0).then(x.0.cmp(&y.0)).then(x.1 .1.cmp(&y.1 .1)))
                .expect("more than c active flocks");
            // merge b into a (a < b); single-linkage update
            active[b] = false;
            let moved = sets[b].take().expect("active flock");
            sets[a].as_mut().expect("active flock").extend(moved);
            for x in 0..g {
                if active[x] && x != a {
                    let d = dist[a * g + x].min(dist[b * g + x]);
                    dist[a * g + x] = d;
                    dist[x * g + a] = d;
                }
            }
            best[b] = None;
            for x in 0..g {
                if !active[x] {
                    continue;
                }
                let stale = x == a || matches!(best[x], Some((_, j)) if j == a || j == b);
                if stale {
                    best[x] = row_best(&dist, &active, x);
                } else if x < a {
                    let cand = (dist[x * g + a], a);
                    if best[x].is_none_or(|cur| cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1)) {
                        best[x] = Some(cand);
                    }
                }
            }
        }
    }
    let clusters: Vec<Vec<usize>> =
        renumber(sets.into_iter().flatten().collect()).into_iter().map(|s| s.members).collect();
    InitialClusters::new(dm.n(), clusters)
}

/// Which branch produced the initial clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionPath {
    /// The granule-cluster count already equalled `c`.
    GranuleClusters,
    /// The flock count equalled `c`.
    Flocks,
    /// Flocks were agglomerated by distance.
    DistanceFusion,
}

/// Intermediate structures kept for diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FusionTrace {
    pub granules: Vec<Granule>,
    pub granule_clusters: Vec<GranuleCluster>,
    /// First-pass flocks; empty when the granule-cluster shortcut applied.
    pub granule_flocks: Vec<GranuleFlock>,
    /// Flock count after each re-granulation round.
    pub refinement_rounds: Vec<usize>,
    /// Whether non-progressing refinement forced singleton flocks.
    pub singleton_fallback: bool,
    /// The flocks that entered the final case split.
    pub final_flocks: Vec<GranuleFlock>,
    pub path: FusionPath,
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionOutcome {
    pub initial: InitialClusters,
    pub trace: FusionTrace,
}

/// Granulation and the three fusion strategies on a precomputed table.
/// When there are fewer flocks than `c`, every flock is re-granulated as its
/// own sub-dataset until the count reaches `c`; a round that changes nothing
/// splits all flock members into singletons.
pub fn build_initial_clusters(dm: &DistanceMatrix, table: &SparseDegreeTable, c: usize) -> Result<FusionOutcome> {
    let n = dm.n();
    if c == 0 {
        return Err(GfdcError::InvalidConfig("cluster count must be at least 1".into()));
    }
    if c >= n {
        return Err(GfdcError::Unsatisfiable { requested: c, available: n - 1 });
    }
    let granules = generate_granules(table);
    let gcs = fuse_intersecting(&granules, n);
    let mut trace = FusionTrace {
        granules,
        granule_clusters: gcs.clone(),
        granule_flocks: Vec::new(),
        refinement_rounds: Vec::new(),
        singleton_fallback: false,
        final_flocks: Vec::new(),
        path: FusionPath::GranuleClusters,
    };
    if gcs.len() == c {
        trace.final_flocks = gcs.clone();
        let initial = InitialClusters::new(n, gcs.into_iter().map(|g| g.members).collect())?;
        return Ok(FusionOutcome { initial, trace });
    }

    let mut flocks = fuse_density_transmission(&gcs, table, dm);
    trace.granule_flocks = flocks.clone();
    while flocks.len() < c {
        let refined = refine_flocks(&flocks, c, dm)?;
        if same_sets(&refined, &flocks) {
            let singletons = renumber(flocks.iter().flat_map(|f| f.members.iter().map(|&m| vec![m])).collect());
            if singletons.len() < c {
                return Err(GfdcError::Unsatisfiable { requested: c, available: singletons.len() });
            }
            trace.singleton_fallback = true;
            flocks = singletons;
        } else {
            flocks = refined;
        }
        trace.refinement_rounds.push(flocks.len());
    }
    trace.final_flocks = flocks.clone();
    trace.path = if flocks.len() == c { FusionPath::Flocks } else { FusionPath::DistanceFusion };
    let initial = fuse_by_distance(&flocks, c, dm)?;
    Ok(FusionOutcome { initial, trace })
}

fn same_sets(a: &[SampleGroup], b: &[SampleGroup]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.members == y.members)
}

/// Neighbor count for a sub-dataset of `n_sub` samples.
pub fn sub_dataset_k(c: usize, n_sub: usize) -> usize {
    let k = c.max(default_k(n_sub));
    if n_sub <= k {
        n_sub - 1
    } else {
        k
    }
}

/// One refinement round: each flock is granulated and fused (intersection,
/// then density transmission) on its own; members left outside every new
/// flock become singleton flocks.
fn refine_flocks(flocks: &[GranuleFlock], c: usize, dm: &DistanceMatrix) -> Result<Vec<GranuleFlock>> {
    let mut pooled: Vec<Vec<usize>> = Vec::new();
    for flock in flocks {
        let members = &flock.members;
        if members.len() < 2 {
            pooled.push(members.clone());
            continue;
        }
        let sub = dm.submatrix(members);
        let table = sparse_degree_table(&sub, sub_dataset_k(c, members.len()))?;
        let granules = generate_granules(&table);
        let gcs = fuse_intersecting(&granules, sub.n());
        let gfs = fuse_density_transmission(&gcs, &table, &sub);
        let to_global = |local: &[usize]| local.iter().map(|&l| members[l]).collect::<Vec<_>>();
        pooled.extend(gfs.iter().map(|gf| to_global(&gf.members)));
        pooled.extend(ungranulated(&granules, sub.n()).into_iter().map(|l| vec![members[l]]));
    }
    Ok(renumber(pooled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{pairwise_distances, Dataset};

    fn line(xs: &[f64]) -> DistanceMatrix {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        pairwise_distances(&Dataset::from_rows(&rows).unwrap())
    }

    fn granule(members: &[usize]) -> Granule {
        Granule { center: members[0], members: members.to_vec() }
    }

    fn group(id: usize, members: &[usize]) -> SampleGroup {
        SampleGroup { id, members: members.to_vec() }
    }

    fn sets(groups: &[SampleGroup]) -> Vec<Vec<usize>> {
        groups.iter().map(|g| g.members.clone()).collect()
    }

    #[test]
    fn intersection_fusion() {
        let gc = fuse_intersecting(&[granule(&[1, 2, 3]), granule(&[3, 4, 5])], 6);
        assert_eq!(sets(&gc), vec![vec![1, 2, 3, 4, 5]]);
        let gc = fuse_intersecting(&[granule(&[1, 2]), granule(&[3, 4])], 5);
        assert_eq!(sets(&gc), vec![vec![1, 2], vec![3, 4]]);
        let gc = fuse_intersecting(&[granule(&[1, 2]), granule(&[2, 3]), granule(&[3, 4]), granule(&[9, 10])], 11);
        assert_eq!(sets(&gc), vec![vec![1, 2, 3, 4], vec![9, 10]]);
        assert!(fuse_intersecting(&[], 4).is_empty());
    }

    #[test]
    fn set_distance_and_density() {
        let dm = line(&[0.0, 1.0, 5.0, 3.0, 10.0]);
        assert_eq!(gc_distance(&[0], &[2], &dm).unwrap(), 5.0);
        assert_eq!(gc_distance(&[0, 1], &[3, 4], &dm).unwrap(), 2.0);
        assert_eq!(gc_distance(&[3, 4], &[0, 1], &dm).unwrap(), 2.0);
        assert!(gc_distance(&[0, 1], &[1, 2], &dm).is_err());
        assert!(gc_distance(&[], &[1], &dm).is_err());

        let t = sparse_degree_table(&line(&[0.0, 1.0, 3.0]), 2).unwrap();
        assert_eq!(gc_sparse_degree(&[2], &t).unwrap(), 5.0);
        assert_eq!(gc_sparse_degree(&[0, 2], &t).unwrap(), 4.5);
        assert!(gc_sparse_degree(&[], &t).is_err());
    }

    fn sd_table(sd: &[f64]) -> SparseDegreeTable {
        SparseDegreeTable {
            k: 1,
            neighbor_order: Vec::new(),
            r_star: vec![0.0; sd.len()],
            knn_dist: sd.to_vec(),
            sd: sd.to_vec(),
            coincident: Vec::new(),
        }
    }

    #[test]
    fn transmission_with_equal_density_merges_both_ways() {
        let dm = line(&[0.0, 1.0, 3.0, 4.0]);
        let t = sd_table(&[2.0; 4]);
        let gf = fuse_density_transmission(&[group(0, &[0, 1]), group(1, &[2, 3])], &t, &dm);
        assert_eq!(sets(&gf), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn transmission_only_flows_toward_density() {
        // X sparse -> Y dense merges; Y's nearest is the sparser X, and the
        // far dense Z's nearest is the sparser Y: neither link fires
        let dm = line(&[0.0, 1.0, 3.0, 4.0, 20.0, 21.0]);
        let t = sd_table(&[3.0, 3.0, 1.0, 1.0, 0.5, 0.5]);
        let gcs = [group(0, &[0, 1]), group(1, &[2, 3]), group(2, &[4, 5])];
        let gf = fuse_density_transmission(&gcs, &t, &dm);
        assert_eq!(sets(&gf), vec![vec![0, 1, 2, 3], vec![4, 5]]);
    }

    #[test]
    fn transmission_chains_transitively() {
        let dm = line(&[0.0, 1.0, 4.0, 5.0, 6.5, 7.5]);
        let t = sd_table(&[5.0, 5.0, 3.0, 3.0, 1.0, 1.0]);
        let gcs = [group(0, &[0, 1]), group(1, &[2, 3]), group(2, &[4, 5])];
        let gf = fuse_density_transmission(&gcs, &t, &dm);
        assert_eq!(sets(&gf), vec![vec![0, 1, 2, 3, 4, 5]]);
        let single = fuse_density_transmission(&gcs[..1], &t, &dm);
        assert_eq!(sets(&single), vec![vec![0, 1]]);
    }

    #[test]
    fn distance_fusion_trace() {
        let dm = line(&[0.0, 1.0, 3.0, 10.0]);
        let flocks = vec![group(0, &[0, 1]), group(1, &[2]), group(2, &[3])];
        let init = fuse_by_distance(&flocks, 2, &dm).unwrap();
        assert_eq!(init.clusters, vec![vec![0, 1, 2], vec![3]]);
        assert!(init.unstable.is_empty());
        let same = fuse_by_distance(&flocks, 3, &dm).unwrap();
        assert_eq!(same.clusters.len(), 3);
        assert!(fuse_by_distance(&flocks, 4, &dm).is_err());
    }

    #[test]
    fn distance_fusion_breaks_ties_by_smallest_pair() {
        // gaps all equal to 1: the first pair (0,1) merges first, then
        // ({0,1},2) ties with (2,3) and the smaller pair wins
        let dm = line(&[0.0, 1.0, 2.0, 3.0]);
        let flocks: Vec<_> = (0..4).map(|i| group(i, &[i])).collect();
        let init = fuse_by_distance(&flocks, 2, &dm).unwrap();
        assert_eq!(init.clusters, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn micro_pipeline_uses_fallback() {
        let dm = line(&[0.0, 1.0, 3.0]);
        let t = sparse_degree_table(&dm, 2).unwrap();
        let out = build_initial_clusters(&dm, &t, 2).unwrap();
        assert_eq!(out.initial.clusters, vec![vec![0], vec![1]]);
        assert_eq!(out.initial.unstable, vec![2]);
        assert!(out.trace.singleton_fallback);
        assert_eq!(sets(&out.trace.granule_flocks), vec![vec![0, 1]]);
    }

    #[test]
    fn single_cluster_takes_all_granulated() {
        let dm = line(&[0.0, 1.0, 3.0]);
        let t = sparse_degree_table(&dm, 2).unwrap();
        let out = build_initial_clusters(&dm, &t, 1).unwrap();
        assert_eq!(out.initial.clusters, vec![vec![0, 1]]);
        assert_eq!(out.initial.unstable, vec![2]);
        assert!(build_initial_clusters(&dm, &t, 0).is_err());
        assert!(build_initial_clusters(&dm, &t, 3).is_err());
    }

    #[test]
    fn unsatisfiable_when_too_few_granulated() {
        let dm = line(&[0.0, 1.0, 3.0, 7.0, 15.0]);
        let t = sparse_degree_table(&dm, 1).unwrap();
        let granulated = dm.n() - ungranulated(&generate_granules(&t), dm.n()).len();
        match build_initial_clusters(&dm, &t, 4) {
            Ok(out) => assert_eq!(out.initial.clusters.len(), 4),
            Err(GfdcError::Unsatisfiable { available, .. }) => assert!(available < 4 && available == granulated),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn sub_k_is_capped() {
        assert_eq!(sub_dataset_k(2, 2), 1);
        assert_eq!(sub_dataset_k(9, 5), 4);
        assert_eq!(sub_dataset_k(2, 100), 7);
    }
}
