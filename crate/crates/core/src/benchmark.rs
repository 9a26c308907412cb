//! Inner-product scaling sweep: exact versus tree-guided selection over
//! synthetic dictionaries of growing size.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::build_tree;
use crate::dictionary::ScoreCounter;
use crate::error::{Error, Result};
use crate::pipelines::in_pool;
use crate::pursuit::{exact_select, stmp_select};
use crate::seed::derive_seed;
use crate::synthetic::{noisy_atom_queries, random_dictionary};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub dict_sizes: Vec<usize>,
    pub dim: usize,
    /// Leading levels used at every size.
    pub base_branching: Vec<usize>,
    /// Fan-out of the levels appended as the dictionary grows.
    pub extend_k: usize,
    /// Levels are appended while leaves keep at least this many atoms.
    pub leaf_size: usize,
    pub alphas: Vec<f64>,
    pub queries: usize,
    /// Relative noise added to the atoms that seed each query.
    pub noise: f32,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            dict_sizes: vec![1000, 4000, 16000],
            dim: 16,
            base_branching: vec![100],
            extend_k: 10,
            leaf_size: 10,
            alphas: vec![0.1, 1.0],
            queries: 200,
            noise: 0.1,
            seed: 0,
            threads: None,
        }
    }
}

/// One row per (dictionary size, alpha); counts are means per query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub m: usize,
    pub alpha: f64,
    /// Levels joined by `x`, e.g. `100x10`.
    pub branching: String,
    pub queries: usize,
    pub exact_inner_products: f64,
    pub stmp_centroid_products: f64,
    pub stmp_atom_products: f64,
    pub stmp_inner_products: f64,
    /// Fraction of queries where both selectors pick the same atom.
    pub agreement: f64,
}

/// `base` followed by `extend_k` levels for as long as every leaf would
/// still hold at least `leaf_size` atoms.
pub fn extended_branching(
    base: &[usize],
    m: usize,
    leaf_size: usize,
    extend_k: usize,
) -> Vec<usize> {
    let mut out = base.to_vec();
    let mut product: usize = base.iter().product();
    while extend_k >= 2 && product * extend_k * leaf_size <= m {
        out.push(extend_k);
        product *= extend_k;
    }
    out
}

pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    if cfg.dict_sizes.is_empty() || cfg.alphas.is_empty() || cfg.queries == 0 {
        return Err(Error::invalid(
            "benchmark needs sizes, alphas and at least one query",
        ));
    }
    if cfg.leaf_size == 0 {
        return Err(Error::invalid("leaf size must be positive"));
    }
    in_pool(cfg.threads, || {
        let mut rows = Vec::new();
        for &m in &cfg.dict_sizes {
            let tag = m as u64;
            let d = random_dictionary(cfg.dim, m, derive_seed(cfg.seed, &[tag, 0]));
            let branching = extended_branching(&cfg.base_branching, m, cfg.leaf_size, cfg.extend_k);
            let tree = build_tree(&d, &branching, derive_seed(cfg.seed, &[tag, 1]))?;
            let queries =
                noisy_atom_queries(&d, cfg.queries, cfg.noise, derive_seed(cfg.seed, &[tag, 2]));
            let exact: Vec<(usize, ScoreCounter)> = queries
                .par_iter()
                .map(|q| {
                    let mut c = ScoreCounter::new();
                    exact_select(&d, q, &mut c).map(|s| (s.index, c))
                })
                .collect::<Result<_>>()?;
            for &alpha in &cfg.alphas {
                let tree_picks: Vec<(usize, ScoreCounter)> = queries
                    .par_iter()
                    .map(|q| {
                        let mut c = ScoreCounter::new();
                        stmp_select(&tree, &d, q, alpha, &mut c).map(|s| (s.index, c))
                    })
                    .collect::<Result<_>>()?;
                let n = cfg.queries as f64;
                let mean = |f: &dyn Fn(&ScoreCounter) -> u64, v: &[(usize, ScoreCounter)]| {
                    v.iter().map(|(_, c)| f(c)).sum::<u64>() as f64 / n
                };
                let agree = exact
                    .iter()
                    .zip(&tree_picks)
                    .filter(|(a, b)| a.0 == b.0)
                    .count();
                rows.push(BenchmarkRow {
                    m,
                    alpha,
                    branching: branching
                        .iter()
                        .map(|k| k.to_string())
                        .collect::<Vec<_>>()
                        .join("x"),
                    queries: cfg.queries,
                    exact_inner_products: mean(&|c| c.inner_products(), &exact),
                    stmp_centroid_products: mean(&|c| c.centroid, &tree_picks),
                    stmp_atom_products: mean(&|c| c.atom, &tree_picks),
                    stmp_inner_products: mean(&|c| c.inner_products(), &tree_picks),
                    agreement: agree as f64 / n,
                });
            }
        }
        Ok(rows)
    })?
}

pub fn write_benchmark<W: Write>(out: W, rows: &[BenchmarkRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Internal(format!("csv encoding failed: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::Internal(format!("csv flush failed: {e}")))?;
    Ok(())
}
