//! Sublinear-time sparse coding over large over-complete dictionaries.
//!
//! A [`Dictionary`] of unit-norm atoms is organized into a shallow, balanced
//! [`ClusterTree`] by recursive balanced k-means. Matching pursuit then
//! selects each atom by descending the tree and keeping only the best
//! `ceil(alpha * k)` children per level, so the number of inner products per
//! selection grows with tree depth instead of dictionary size.
//!
//! Around that core sit patch extraction and aggregation ([`tensor`]),
//! observation operators for coding in a measurement space ([`operators`]),
//! and complete restoration tasks ([`pipelines`]).

pub mod benchmark;
mod binio;
pub mod cli;
pub mod clustering;
pub mod dictionary;
pub mod error;
mod linalg;
pub mod operators;
pub mod pipelines;
pub mod pursuit;
pub mod seed;
pub mod synthetic;
pub mod tensor;

pub use clustering::{build_tree, load_tree, save_tree, validate_tree, ClusterTree};
pub use dictionary::{
    build_from_patches, load_dictionary, normalize_columns, save_dictionary, score_all, Dictionary,
    ScoreCounter,
};
pub use error::{Error, Result};
pub use linalg::{dot, norm};
pub use operators::{lift_code, project_dictionary, ObservationOperator, ProjectedDictionary};
pub use pursuit::{
    exact_select, matching_pursuit, predicted_ip_count, reconstruct, stmp_select, AtomSelector,
    ExactSelector, SearchParams, SparseCode, StmpSelector,
};
pub use tensor::{PatchLayout, Tensor};
