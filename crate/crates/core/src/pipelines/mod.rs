//! Patch-based restoration tasks: every patch is coded independently (in
//! parallel), synthesized in full space and averaged back into place.

mod metrics;
mod noise;
mod report;
mod tasks;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use metrics::{psnr, snr};
pub use noise::add_noise_to_snr;
pub use report::{save_reports, write_reports, TaskReport};
pub(crate) use tasks::in_pool;
pub use tasks::{
    coded_exposure_measure, compressive_recover, denoise, masked_recover, super_resolve,
};

use crate::clustering::DEFAULT_BRANCHING;
use crate::error::{Error, Result};
use crate::pursuit::SearchParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    Exact,
    Stmp,
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Stmp => "stmp",
        })
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "stmp" => Ok(Self::Stmp),
            other => Err(Error::invalid(format!("unknown selector {other:?}"))),
        }
    }
}

/// Settings for a restoration task. `patch_shape` and `stride` describe the
/// patches of the task's input (measurement patches for the projected tasks).
#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub patch_shape: Vec<usize>,
    pub stride: Vec<usize>,
    pub sparsity: usize,
    pub alpha: f64,
    pub selector: SelectorKind,
    /// Used when a tree has to be built for the coding dictionary.
    pub branching: Vec<usize>,
    pub seed: u64,
    pub residual_tolerance: Option<f32>,
    /// Worker threads for patch coding; `None` uses the global pool.
    /// Results do not depend on it.
    pub threads: Option<usize>,
}

impl TaskConfig {
    pub fn new(patch_shape: Vec<usize>, stride: Vec<usize>) -> Self {
        Self {
            patch_shape,
            stride,
            sparsity: 10,
            alpha: 0.1,
            selector: SelectorKind::Stmp,
            branching: DEFAULT_BRANCHING.to_vec(),
            seed: 0,
            residual_tolerance: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_shape.is_empty() || self.patch_shape.len() != self.stride.len() {
            return Err(Error::invalid(format!(
                "patch shape {:?} and stride {:?} must have the same positive rank",
                self.patch_shape, self.stride
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("thread count must be positive"));
        }
        self.search_params().validate()
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            alpha: self.alpha,
            sparsity: self.sparsity,
            residual_tolerance: self.residual_tolerance,
        }
    }
}
