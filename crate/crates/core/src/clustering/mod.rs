//! Balanced k-means partitioning and the shallow cluster tree built from it.

mod balanced;
mod io;
mod kmeans;
mod tree;

pub use balanced::{balanced_cluster, capacity, BalancedPartition, BALANCE_KMEANS_ITERS};
pub use io::{load_tree, save_tree};
pub use kmeans::{kmeans, KMeans};
pub use tree::{
    build_tree, validate_tree, ClusterTree, InternalNode, TreeNode, ValidationReport, Violation,
    DEFAULT_BRANCHING,
};
