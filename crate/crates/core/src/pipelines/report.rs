use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::metrics::{psnr, snr};
use super::SelectorKind;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Outcome of one restoration task. Serializes to one CSV row with columns
/// `task,m,n,K,alpha,selector,psnr_db,snr_db,inner_products,patches,seconds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub sparsity: usize,
    pub alpha: f64,
    pub selector: SelectorKind,
    /// Filled by [`TaskReport::score_against`]; empty in CSV until then.
    pub psnr_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub inner_products: u64,
    pub patches: usize,
    pub seconds: f64,
    #[serde(skip)]
    pub centroid_products: u64,
    #[serde(skip)]
    pub atom_products: u64,
}

impl TaskReport {
    /// Records PSNR (peak 1) and SNR of `estimate` against `reference`.
    pub fn score_against(&mut self, reference: &Tensor, estimate: &Tensor) -> Result<()> {
        self.psnr_db = Some(psnr(reference, estimate, 1.0)?);
        self.snr_db = Some(snr(reference, estimate)?);
        Ok(())
    }
}

pub fn write_reports<W: Write>(out: W, reports: &[TaskReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)
            .map_err(|e| Error::Internal(format!("csv encoding failed: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::Internal(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn save_reports(path: impl AsRef<Path>, reports: &[TaskReport]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_reports(file, reports)
}
