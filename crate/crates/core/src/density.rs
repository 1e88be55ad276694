//! Sparse degree: the optimal-granularity radius `r*` plus the k-NN radius.
//! Lower values mean denser samples.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dataset::DistanceMatrix;
use crate::error::{GfdcError, Result};

/// `ceil(log2(n))`, the default neighbor count, never below 1.
pub fn default_k(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Per-sample density quantities for one neighbor count `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDegreeTable {
    pub k: usize,
    /// All other samples by ascending distance, ties by ascending index.
    pub neighbor_order: Vec<Vec<usize>>,
    pub r_star: Vec<f64>,
    pub knn_dist: Vec<f64>,
    pub sd: Vec<f64>,
    /// Samples whose peers all coincide with them; their `r_star` is 0.
    pub coincident: Vec<usize>,
}

impl SparseDegreeTable {
    pub fn len(&self) -> usize {
        self.sd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sd.is_empty()
    }

    /// The `m` nearest other samples of `i`.
    pub fn nearest(&self, i: usize, m: usize) -> &[usize] {
        &self.neighbor_order[i][..m]
    }
}

/// Number of samples within `radius` of `i`, counting `i` itself.
pub fn neighborhood_count(dm: &DistanceMatrix, i: usize, radius: f64) -> usize {
    dm.row(i).iter().filter(|&&d| d <= radius).count()
}

/// Log of `count / radius^w`. Only ever compared against itself, so the log
/// keeps high-dimensional radii from overflowing without changing the argmax.
pub fn relative_density(dm: &DistanceMatrix, i: usize, radius: f64) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(GfdcError::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    Ok(log_density(neighborhood_count(dm, i, radius), radius, dm.dim()))
}

#[inline]
fn log_density(count: usize, radius: f64, dim: usize) -> f64 {
    (count as f64).ln() - dim as f64 * radius.ln()
}

/// The candidate radius `d[i][j] > 0` maximizing relative density; ties go to
/// the smaller radius. `None` when every peer coincides with `i`.
pub fn optimal_radius(dm: &DistanceMatrix, i: usize) -> Option<f64> {
    let order = sorted_neighbors(dm, i);
    scan_optimal_radius(dm.row(i), &order, dm.dim())
}

fn sorted_neighbors(dm: &DistanceMatrix, i: usize) -> Vec<usize> {
    let row = dm.row(i);
    let mut order: Vec<usize> = (0..dm.n()).filter(|&j| j != i).collect();
    // stable: equal distances keep ascending index order
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    order
}

/// Relative gap below which two log densities count as tied. Exact ties
/// such as `2 / 1` against `4 / 2` do not survive the log transform bit for
/// bit.
const TIE_TOLERANCE: f64 = 1e-12;

/// One pass over the sorted neighbors: every group of equal distances is a
/// candidate radius whose neighborhood holds everything up to the group end.
fn scan_optimal_radius(row: &[f64], order: &[usize], dim: usize) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    let mut pos = 0;
    while pos < order.len() {
        let radius = row[order[pos]];
        let mut end = pos + 1;
        while end < order.len() && row[order[end]] == radius {
            end += 1;
        }
        if radius > 0.0 {
            let score = log_density(end + 1, radius, dim);
            if best.is_none_or(|(s, _)| score > s + TIE_TOLERANCE * s.abs().max(1.0)) {
                best = Some((score, radius));
            }
        }
        pos = end;
    }
    best.map(|(_, r)| r)
}

/// Computes neighbor order, `r*`, k-NN distance and sparse degree for every
/// sample. Requires `1 <= k <= n - 1`.
pub fn sparse_degree_table(dm: &DistanceMatrix, k: usize) -> Result<SparseDegreeTable> {
    let n = dm.n();
    if k == 0 || k >= n {
        return Err(GfdcError::KOutOfRange { k, n });
    }
    let per_sample = |i: usize| {
        let order = sorted_neighbors(dm, i);
        let row = dm.row(i);
        let r_star = scan_optimal_radius(row, &order, dm.dim());
        let knn = row[order[k - 1]];
        (order, r_star, knn)
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = (0..n).into_par_iter().map(per_sample).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = (0..n).map(per_sample).collect();

    let mut table = SparseDegreeTable {
        k,
        neighbor_order: Vec::with_capacity(n),
        r_star: Vec::with_capacity(n),
        knn_dist: Vec::with_capacity(n),
        sd: Vec::with_capacity(n),
        coincident: Vec::new(),
    };
    for (i, (order, r_star, knn)) in rows.into_iter().enumerate() {
        let r = r_star.unwrap_or_else(|| {
            table.coincident.push(i);
            0.0
        });
        table.neighbor_order.push(order);
        table.r_star.push(r);
        table.knn_dist.push(knn);
        table.sd.push(r + knn);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{pairwise_distances, Dataset};

    fn line(xs: &[f64]) -> DistanceMatrix {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        pairwise_distances(&Dataset::from_rows(&rows).unwrap())
    }

    #[test]
    fn default_k_is_ceil_log2() {
        assert_eq!(default_k(373), 9);
        assert_eq!(default_k(788), 10);
        assert_eq!(default_k(256), 8);
        assert_eq!(default_k(257), 9);
        assert_eq!(default_k(3), 2);
        assert_eq!(default_k(2), 1);
    }

    #[test]
    fn neighborhood_counts_include_self() {
        let dm = line(&[0.0, 1.0, 3.0]);
        assert_eq!(neighborhood_count(&dm, 0, 0.0), 1);
        assert_eq!(neighborhood_count(&dm, 0, 1.0), 2);
        assert_eq!(neighborhood_count(&dm, 0, 3.0), 3);
    }

    #[test]
    fn relative_density_values() {
        let dm = line(&[0.0, 1.0, 3.0]);
        approx::assert_abs_diff_eq!(relative_density(&dm, 0, 1.0).unwrap(), 2f64.ln(), epsilon = 1e-15);
        approx::assert_abs_diff_eq!(relative_density(&dm, 0, 3.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(relative_density(&dm, 0, 0.0).is_err());

        let two = pairwise_distances(&Dataset::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap());
        approx::assert_abs_diff_eq!(relative_density(&two, 0, 1.0).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_domain_survives_high_dimension() {
        // 10 / 2^60 is representable but 10 / 2^1100 is not; the log stays finite.
        let v = log_density(10, 2.0, 1100);
        assert!(v.is_finite());
        assert!(log_density(10, 2.0, 60) > log_density(10, 2.0, 61));
    }

    #[test]
    fn optimal_radius_micro() {
        let dm = line(&[0.0, 1.0, 3.0]);
        assert_eq!(optimal_radius(&dm, 0), Some(1.0));
        assert_eq!(optimal_radius(&dm, 1), Some(1.0));
        // radius 2 and radius 3 both give density 1; the smaller wins
        assert_eq!(optimal_radius(&dm, 2), Some(2.0));
    }

    #[test]
    fn table_micro_and_two_point() {
        let t = sparse_degree_table(&line(&[0.0, 1.0, 3.0]), 2).unwrap();
        assert_eq!(t.r_star, vec![1.0, 1.0, 2.0]);
        assert_eq!(t.knn_dist, vec![3.0, 2.0, 3.0]);
        assert_eq!(t.sd, vec![4.0, 3.0, 5.0]);
        assert_eq!(t.neighbor_order[1], vec![0, 2]);

        let t = sparse_degree_table(&line(&[2.0, 4.5]), 1).unwrap();
        assert_eq!(t.sd, vec![5.0, 5.0]);
    }

    #[test]
    fn coincident_peers_give_zero_radius() {
        let t = sparse_degree_table(&line(&[1.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!(t.r_star, vec![0.0; 3]);
        assert_eq!(t.coincident, vec![0, 1, 2]);
        // duplicates are skipped as candidates but still counted in the ball
        let t = sparse_degree_table(&line(&[0.0, 0.0, 1.0, 5.0]), 1).unwrap();
        assert_eq!(t.r_star[0], 1.0);
    }

    #[test]
    fn exact_ties_keep_the_smaller_radius() {
        // from 0: radius 1 holds 2 samples, radius 2 holds 4; 2/1 == 4/2
        let dm = line(&[0.0, 1.0, 2.0, -2.0, 9.0]);
        assert_eq!(optimal_radius(&dm, 0), Some(1.0));
    }

    #[test]
    fn rejects_bad_k() {
        let dm = line(&[0.0, 1.0, 3.0]);
        assert!(matches!(sparse_degree_table(&dm, 0), Err(GfdcError::KOutOfRange { .. })));
        assert!(matches!(sparse_degree_table(&dm, 3), Err(GfdcError::KOutOfRange { .. })));
    }

    #[test]
    fn ties_in_neighbor_order_use_index() {
        let dm = line(&[0.0, -1.0, 1.0, 2.0]);
        let t = sparse_degree_table(&dm, 2).unwrap();
        assert_eq!(t.neighbor_order[0], vec![1, 2, 3]);
    }
}
