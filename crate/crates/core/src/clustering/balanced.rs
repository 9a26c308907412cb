use std::cmp::Ordering;

use super::kmeans::kmeans;
use crate::error::{Error, Result};
use crate::linalg::{norm, normalized_mean, squared_distance};
use crate::seed::derive_seed;

/// Lloyd iteration cap used inside each balancing round.
pub const BALANCE_KMEANS_ITERS: usize = 25;

/// Partition of `m` vectors into at most `k` groups of exactly `capacity`
/// members, except the last group which holds between 1 and `capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPartition {
    pub k: usize,
    pub capacity: usize,
    /// Member indices of each cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    /// Unit-norm mean of each cluster's members.
    pub centroids: Vec<Vec<f32>>,
}

impl BalancedPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// Cluster id of every input vector.
    pub fn assignments(&self) -> Vec<usize> {
        let m = self.clusters.iter().map(Vec::len).sum();
        let mut out = vec![usize::MAX; m];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                out[i] = c;
            }
        }
        out
    }
}

/// Capacity of each group when splitting `count` items into `k` groups.
pub fn capacity(count: usize, k: usize) -> usize {
    count.div_ceil(k)
}

/// Renormalized mean of the members, falling back to the first member when
/// the mean cancels out (for example an atom and its negation).
pub(crate) fn cluster_centroid(vectors: &[&[f32]], members: &[usize]) -> Vec<f32> {
    let dim = vectors[members[0]].len();
    normalized_mean(members.iter().map(|&i| vectors[i]), dim).unwrap_or_else(|| {
        let v = vectors[members[0]];
        let nrm = norm(v);
        v.iter().map(|&x| (x as f64 / nrm) as f32).collect()
    })
}

fn by_distance(center: &[f32], vectors: &[&[f32]], mut idx: Vec<usize>) -> Vec<usize> {
    let mut keyed: Vec<(f32, usize)> = idx
        .drain(..)
        .map(|i| (squared_distance(vectors[i], center), i))
        .collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Balanced k-means: every round clusters the still-unassigned vectors into
/// the remaining group budget, finalizes each cluster that reached capacity
/// with its `capacity` members nearest the centroid, and recycles the rest.
/// When no cluster reaches capacity the largest one is finalized, topped up
/// with the unassigned vectors nearest its centroid. Once at most `capacity`
/// vectors remain they form the last group.
pub fn balanced_cluster(vectors: &[&[f32]], k: usize, seed: u64) -> Result<BalancedPartition> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if vectors.is_empty() {
        return Err(Error::invalid("nothing to cluster"));
    }
    let cap = capacity(vectors.len(), k);
    let mut remaining: Vec<usize> = (0..vectors.len()).collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut round = 0u64;
    while !remaining.is_empty() {
        let budget = k - clusters.len();
        if remaining.len() <= cap {
            clusters.push(std::mem::take(&mut remaining));
            break;
        }
        debug_assert!(budget >= 2, "remaining vectors always fit the budget");
        let subset: Vec<&[f32]> = remaining.iter().map(|&i| vectors[i]).collect();
        let kk = budget.min(subset.len());
        let km = kmeans(
            &subset,
            kk,
            derive_seed(seed, &[round]),
            BALANCE_KMEANS_ITERS,
        )?;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); kk];
        for (pos, &a) in km.assignments.iter().enumerate() {
            groups[a].push(remaining[pos]);
        }
        let mut finalized: Vec<Vec<usize>> = Vec::new();
        for (j, members) in groups.iter().enumerate() {
            if members.len() >= cap {
                let mut keep = by_distance(&km.centroids[j], vectors, members.clone());
                keep.truncate(cap);
                finalized.push(keep);
            }
        }
        if finalized.is_empty() {
            let j = (0..kk)
                .max_by(|&a, &b| groups[a].len().cmp(&groups[b].len()).then(b.cmp(&a)))
                .unwrap();
            let outside: Vec<usize> = remaining
                .iter()
                .enumerate()
                .filter(|&(pos, _)| km.assignments[pos] != j)
                .map(|(_, &i)| i)
                .collect();
            let mut keep = by_distance(&km.centroids[j], vectors, groups[j].clone());
            keep.extend(by_distance(&km.centroids[j], vectors, outside));
            keep.truncate(cap);
            finalized.push(keep);
        }
        for mut group in finalized {
            group.sort_unstable();
            clusters.push(group);
        }
        let mut taken = vec![false; vectors.len()];
        for g in clusters.iter() {
            for &i in g {
                taken[i] = true;
            }
        }
        remaining.retain(|&i| !taken[i]);
        round += 1;
    }
    debug_assert!(clusters.len() <= k);
    let centroids = clusters
        .iter()
        .map(|c| cluster_centroid(vectors, c))
        .collect();
    Ok(BalancedPartition {
        k,
        capacity: cap,
        clusters,
        centroids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<f32>) -> Vec<f32> {
        let n = norm(&v);
        v.into_iter().map(|x| (x as f64 / n) as f32).collect()
    }

    fn check_shape(p: &BalancedPartition, m: usize) {
        let sizes = p.sizes();
        assert!(sizes.len() <= p.k);
        let (last, full) = sizes.split_last().unwrap();
        assert!(full.iter().all(|&s| s == p.capacity), "{sizes:?}");
        assert!(*last >= 1 && *last <= p.capacity);
        let mut all: Vec<usize> = p.clusters.concat();
        all.sort_unstable();
        assert_eq!(all, (0..m).collect::<Vec<_>>());
        for c in &p.centroids {
            assert!((norm(c) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn ten_into_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec<f32>> = (0..10)
            .map(|_| unit((0..4).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
        let p = balanced_cluster(&refs, 3, 4).unwrap();
        assert_eq!(p.capacity, 4);
        let mut sizes = p.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 4, 4]);
        check_shape(&p, 10);
    }

    #[test]
    fn m_equal_k_gives_singletons() {
        let pts: Vec<Vec<f32>> = (0..5)
            .map(|i| unit((0..5).map(|j| if i == j { 1.0 } else { 0.1 }).collect()))
            .collect();
        let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
        let p = balanced_cluster(&refs, 5, 0).unwrap();
        assert_eq!(p.sizes(), vec![1; 5]);
        check_shape(&p, 5);
    }

    #[test]
    fn quadruplets_grouped_by_geometry() {
        // four tight groups of four around orthogonal axes; m=16, k=4, C=4.
        // the geometric grouping is the unique partition whose clusters each
        // live inside one tight group; enumerate membership to compare.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pts = Vec::new();
        for i in 0..16 {
            let axis = i % 4;
            let mut v: Vec<f32> = (0..4).map(|_| rng.random_range(-0.01..0.01)).collect();
            v[axis] += 1.0;
            pts.push(unit(v));
        }
        let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
        let p = balanced_cluster(&refs, 4, 3).unwrap();
        check_shape(&p, 16);
        for c in &p.clusters {
            let axis = c[0] % 4;
            assert!(c.iter().all(|i| i % 4 == axis), "{:?}", p.clusters);
        }
    }

    #[test]
    fn twelve_in_four_triples_from_quadruplet_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = Vec::new();
        for i in 0..12 {
            let axis = i / 3;
            let mut v: Vec<f32> = (0..4).map(|_| rng.random_range(-0.01..0.01)).collect();
            v[axis] += 1.0;
            pts.push(unit(v));
        }
        let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
        let p = balanced_cluster(&refs, 4, 7).unwrap();
        assert_eq!(p.capacity, 3);
        check_shape(&p, 12);
        for c in &p.clusters {
            assert!(c.iter().all(|i| i / 3 == c[0] / 3), "{:?}", p.clusters);
        }
    }

    #[test]
    fn random_inputs_always_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..30 {
            let m = rng.random_range(1..200);
            let k = rng.random_range(1..20);
            let pts: Vec<Vec<f32>> = (0..m)
                .map(|_| unit((0..6).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect();
            let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
            let p = balanced_cluster(&refs, k, trial).unwrap();
            check_shape(&p, m);
        }
    }

    #[test]
    fn duplicates_and_negations() {
        let mut pts = vec![vec![1.0f32, 0.0, 0.0]; 6];
        pts.extend(vec![vec![-1.0f32, 0.0, 0.0]; 6]);
        let refs: Vec<&[f32]> = pts.iter().map(Vec::as_slice).collect();
        let p = balanced_cluster(&refs, 3, 1).unwrap();
        check_shape(&p, 12);
    }
}
