//! Greedy sparse coding.
//!
//! [`matching_pursuit`] drives any [`AtomSelector`]; the two selectors are the
//! brute-force [`ExactSelector`] and the tree-guided [`StmpSelector`], which
//! keeps only the `ceil(alpha * k)` best-scoring children at every level.

mod code;
mod cost;
mod mp;
mod omp;
mod select;

pub use code::{parse_code_text, reconstruct, SparseCode};
pub use cost::{predicted_ip_count, retained_children};
pub use mp::{matching_pursuit, matching_pursuit_with_residual, SearchParams};
pub use omp::omp_refit;
pub use select::{exact_select, stmp_select, AtomSelector, ExactSelector, Selection, StmpSelector};
