use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::squared_distance;
use crate::seed::rng_for;

/// Result of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Vec<f32>>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

/// Index of the closest centroid; ties go to the lowest index.
pub(crate) fn nearest(v: &[f32], centroids: &[Vec<f32>]) -> (usize, f32) {
    let mut best = (0, f32::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(v, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(vectors: &[&[f32]], k: usize, seed: u64) -> Vec<Vec<f32>> {
    let mut rng = rng_for(seed, &[0x6b6d]);
    let first = rng.random_range(0..vectors.len());
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = vectors
        .iter()
        .map(|v| squared_distance(v, vectors[first]) as f64)
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `target` just past the final sum
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // every remaining point duplicates a chosen one
            (0..vectors.len()).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (d, v) in dist.iter_mut().zip(vectors) {
            *d = d.min(squared_distance(v, vectors[next]) as f64);
        }
    }
    chosen.iter().map(|&i| vectors[i].to_vec()).collect()
}

/// Seeded k-means++ initialization followed by Lloyd iterations under squared
/// Euclidean distance. Stops when assignments no longer change or after
/// `max_iters` rounds. Empty clusters take over the point farthest from its
/// current centroid.
pub fn kmeans(vectors: &[&[f32]], k: usize, seed: u64, max_iters: usize) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > vectors.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} available vectors",
            vectors.len()
        )));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("vectors must share one dimension"));
    }
    let mut centroids = plus_plus_init(vectors, k, seed);
    let mut assignments = vec![usize::MAX; vectors.len()];
    let mut iterations = 0;
    while iterations < max_iters.max(1) {
        iterations += 1;
        let next: Vec<(usize, f32)> = vectors.par_iter().map(|v| nearest(v, &centroids)).collect();
        let mut changed = false;
        for (a, &(j, _)) in assignments.iter_mut().zip(&next) {
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        for empty in 0..k {
            if sizes[empty] != 0 {
                continue;
            }
            let far = (0..vectors.len())
                .filter(|&i| sizes[assignments[i]] > 1)
                .map(|i| (i, squared_distance(vectors[i], &centroids[assignments[i]])))
                .fold(None::<(usize, f32)>, |best, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                });
            if let Some((i, _)) = far {
                sizes[assignments[i]] -= 1;
                assignments[i] = empty;
                sizes[empty] = 1;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0f64; dim]; k];
        for (v, &a) in vectors.iter().zip(&assignments) {
            for (s, &x) in sums[a].iter_mut().zip(v.iter()) {
                *s += x as f64;
            }
        }
        for (j, s) in sums.iter().enumerate() {
            if sizes[j] > 0 {
                centroids[j] = s.iter().map(|&x| (x / sizes[j] as f64) as f32).collect();
            }
        }
        if !changed {
            break;
        }
    }
    Ok(KMeans {
        centroids,
        assignments,
        iterations,
    })
}
