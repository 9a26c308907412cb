//! Inner products per atom selection as the dictionary grows tenfold:
//! brute force grows with m, the tree descent by a constant per level.

use stmp::benchmark::{run_benchmark, BenchmarkConfig};

fn main() -> stmp::Result<()> {
    let cfg = BenchmarkConfig {
        dict_sizes: vec![1_000, 10_000, 100_000],
        alphas: vec![0.1, 0.2, 1.0],
        queries: 300,
        ..BenchmarkConfig::default()
    };
    println!(
        "{:>7} {:>5} {:>10} {:>9} {:>9} {:>7} {:>9}",
        "m", "alpha", "branching", "exact", "centroid", "atom", "agree"
    );
    for r in run_benchmark(&cfg)? {
        println!(
            "{:>7} {:>5} {:>10} {:>9} {:>9} {:>7} {:>9.3}",
            r.m,
            r.alpha,
            r.branching,
            r.exact_inner_products,
            r.stmp_centroid_products,
            r.stmp_atom_products,
            r.agreement
        );
    }
    Ok(())
}
