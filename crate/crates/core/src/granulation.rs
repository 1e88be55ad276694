//! Granules: `k`-sample neighborhoods whose center has the lowest sparse
//! degree among its members.

use serde::Serialize;

use crate::density::SparseDegreeTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Granule {
    pub center: usize,
    /// Sorted ascending; always contains `center`.
    pub members: Vec<usize>,
}

/// The candidate neighborhood of `center`: itself plus its `k - 1` nearest
/// samples. Distance ties at the boundary are cut by index, so the set has
/// exactly `k` members.
pub fn candidate_members(table: &SparseDegreeTable, center: usize) -> Vec<usize> {
    let mut members = Vec::with_capacity(table.k);
    members.push(center);
    members.extend_from_slice(table.nearest(center, table.k - 1));
    members.sort_unstable();
    members
}

/// Every sample whose candidate neighborhood has no member with a strictly
/// lower sparse degree, ordered by center index.
pub fn generate_granules(table: &SparseDegreeTable) -> Vec<Granule> {
    (0..table.len())
        .filter_map(|center| {
            let sd = table.sd[center];
            let is_min = table.nearest(center, table.k - 1).iter().all(|&j| table.sd[j] >= sd);
            is_min.then(|| Granule { center, members: candidate_members(table, center) })
        })
        .collect()
}

/// Samples that belong to no granule, ascending.
pub fn ungranulated(granules: &[Granule], n: usize) -> Vec<usize> {
    let mut covered = vec![false; n];
    for g in granules {
        for &m in &g.members {
            covered[m] = true;
        }
    }
    (0..n).filter(|&i| !covered[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{pairwise_distances, Dataset};
    use crate::density::sparse_degree_table;

    fn table(xs: &[f64], k: usize) -> SparseDegreeTable {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        sparse_degree_table(&pairwise_distances(&Dataset::from_rows(&rows).unwrap()), k).unwrap()
    }

    #[test]
    fn micro_has_one_granule() {
        let t = table(&[0.0, 1.0, 3.0], 2);
        let g = generate_granules(&t);
        assert_eq!(g, vec![Granule { center: 1, members: vec![0, 1] }]);
        assert_eq!(ungranulated(&g, 3), vec![2]);
    }

    #[test]
    fn equal_sd_gives_twin_granules() {
        let t = table(&[0.0, 1.0], 1);
        assert_eq!(generate_granules(&t).len(), 2);
        // k-NN distance is to the 2nd other sample, so the inner points win
        let t = table(&[0.0, 1.0, 10.0, 11.0], 2);
        let g = generate_granules(&t);
        assert_eq!(g.iter().map(|g| g.center).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn members_have_exact_size_on_ties() {
        // center 0 has two neighbors at distance 1; k = 2 takes the lower index
        let t = table(&[0.0, -1.0, 1.0, 5.0], 2);
        for i in 0..4 {
            assert_eq!(candidate_members(&t, i).len(), 2);
        }
        assert_eq!(candidate_members(&t, 0), vec![0, 1]);
    }
}
