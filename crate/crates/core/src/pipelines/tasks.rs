use std::time::Instant;

use rayon::prelude::*;

use super::{SelectorKind, TaskConfig, TaskReport};
use crate::clustering::{build_tree, ClusterTree};
use crate::dictionary::{Dictionary, ScoreCounter};
use crate::error::{Error, Result};
use crate::operators::{coding_projection, strip_dc, synthesize, ObservationOperator};
use crate::pursuit::{matching_pursuit, AtomSelector, ExactSelector, StmpSelector};
use crate::tensor::extract_with_layout;
use crate::tensor::{aggregate_patches, PatchLayout, Tensor};

pub(crate) fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Codes each measurement `ys[i]` through `op` and averages the synthesized
/// full-space patches into `out_layout`.
fn restore(
    ys: &[Vec<f32>],
    out_layout: &PatchLayout,
    op: &ObservationOperator,
    d: &Dictionary,
    tree: Option<&ClusterTree>,
    cfg: &TaskConfig,
) -> Result<(Tensor, ScoreCounter)> {
    let params = cfg.search_params();
    in_pool(cfg.threads, || -> Result<(Tensor, ScoreCounter)> {
        let pd = coding_projection(d, op)?;
        let built;
        let selector: Box<dyn AtomSelector + '_> = match cfg.selector {
            SelectorKind::Exact => Box::new(ExactSelector::new(pd.atoms()).with_mask(pd.usable())),
            SelectorKind::Stmp => {
                let t = match tree {
                    Some(t) => t,
                    None => {
                        built = build_tree(pd.atoms(), &cfg.branching, cfg.seed)?;
                        &built
                    }
                };
                Box::new(StmpSelector::new(t, pd.atoms(), cfg.alpha)?.with_mask(pd.usable()))
            }
        };
        let coded: Vec<(Vec<f32>, ScoreCounter)> = ys
            .par_iter()
            .map(|y| {
                let stripped = strip_dc(op, y);
                let code = matching_pursuit(selector.as_ref(), &stripped, &params)?;
                Ok((synthesize(&pd, y, &code)?, code.cost))
            })
            .collect::<Result<_>>()?;
        let cost = coded.iter().map(|(_, c)| *c).sum();
        let patches: Vec<Vec<f32>> = coded.into_iter().map(|(x, _)| x).collect();
        Ok((aggregate_patches(out_layout, &patches)?, cost))
    })?
}

fn report(
    task: &str,
    d: &Dictionary,
    cfg: &TaskConfig,
    cost: ScoreCounter,
    patches: usize,
    started: Instant,
) -> TaskReport {
    TaskReport {
        task: task.to_string(),
        m: d.len(),
        n: d.dim(),
        sparsity: cfg.sparsity,
        alpha: cfg.alpha,
        selector: cfg.selector,
        psnr_db: None,
        snr_db: None,
        inner_products: cost.inner_products(),
        patches,
        seconds: started.elapsed().as_secs_f64(),
        centroid_products: cost.centroid,
        atom_products: cost.atom,
    }
}

fn check_dim(patch_shape: &[usize], d: &Dictionary) -> Result<()> {
    let n: usize = patch_shape.iter().product();
    if n != d.dim() {
        return Err(Error::invalid(format!(
            "patch shape {patch_shape:?} has {n} samples but atoms have {}",
            d.dim()
        )));
    }
    Ok(())
}

/// Mean-removed patch coding of a noisy tensor against `d`.
pub fn denoise(
    noisy: &Tensor,
    d: &Dictionary,
    tree: Option<&ClusterTree>,
    cfg: &TaskConfig,
) -> Result<(Tensor, TaskReport)> {
    let started = Instant::now();
    cfg.validate()?;
    check_dim(&cfg.patch_shape, d)?;
    let layout = PatchLayout::new(noisy.shape(), &cfg.patch_shape, &cfg.stride)?;
    let ys = extract_with_layout(noisy, &layout)?;
    let op = ObservationOperator::identity(d.dim())?;
    let (estimate, cost) = restore(&ys, &layout, &op, d, tree, cfg)?;
    Ok((estimate, report("denoise", d, cfg, cost, ys.len(), started)))
}

/// Upscales `lowres` by `factor` on every axis. Low-res patches of
/// `cfg.patch_shape` are coded against block-averaged atoms of shape
/// `factor * cfg.patch_shape`; any `tree` must be built on those
/// projected atoms.
pub fn super_resolve(
    lowres: &Tensor,
    d: &Dictionary,
    tree: Option<&ClusterTree>,
    cfg: &TaskConfig,
    factor: usize,
) -> Result<(Tensor, TaskReport)> {
    let started = Instant::now();
    cfg.validate()?;
    if factor == 0 {
        return Err(Error::invalid("upscaling factor must be positive"));
    }
    let hi_patch: Vec<usize> = cfg.patch_shape.iter().map(|p| p * factor).collect();
    check_dim(&hi_patch, d)?;
    let lo_layout = PatchLayout::new(lowres.shape(), &cfg.patch_shape, &cfg.stride)?;
    let hi_shape: Vec<usize> = lowres.shape().iter().map(|s| s * factor).collect();
    let hi_stride: Vec<usize> = cfg.stride.iter().map(|s| s * factor).collect();
    let hi_layout = PatchLayout::new(&hi_shape, &hi_patch, &hi_stride)?;
    let ys = extract_with_layout(lowres, &lo_layout)?;
    let op = ObservationOperator::block_average(hi_patch.clone(), vec![factor; hi_patch.len()])?;
    let (estimate, cost) = restore(&ys, &hi_layout, &op, d, tree, cfg)?;
    Ok((
        estimate,
        report("superres", d, cfg, cost, ys.len(), started),
    ))
}

/// Integrates `video` (`[frames, ...]`) against `mask` (`[T, ...tile]`)
/// repeated periodically over the pixel axes: output frame `f` sums frames
/// `f*T .. f*T+T` gated by the mask.
pub fn coded_exposure_measure(video: &Tensor, mask: &Tensor) -> Result<Tensor> {
    if video.rank() != mask.rank() || video.rank() < 2 {
        return Err(Error::invalid(
            "video and mask need the same rank, at least 2",
        ));
    }
    let t = mask.shape()[0];
    let frames = video.shape()[0];
    if !frames.is_multiple_of(t) {
        return Err(Error::invalid(format!(
            "{frames} frames are not a whole number of {t}-frame exposures"
        )));
    }
    let pix_shape = &video.shape()[1..];
    let tile = &mask.shape()[1..];
    let pixels: usize = pix_shape.iter().product();
    let tile_len: usize = tile.iter().product();
    let vstrides = crate::tensor::row_major_strides(pix_shape);
    let tstrides = crate::tensor::row_major_strides(tile);
    let gate_index: Vec<usize> = (0..pixels)
        .map(|p| {
            (0..pix_shape.len())
                .map(|ax| ((p / vstrides[ax]) % pix_shape[ax]) % tile[ax] * tstrides[ax])
                .sum()
        })
        .collect();
    let mut out = vec![0.0f32; frames / t * pixels];
    for f in 0..frames {
        let (o, k) = (f / t, f % t);
        let src = &video.data()[f * pixels..(f + 1) * pixels];
        let gate = &mask.data()[k * tile_len..(k + 1) * tile_len];
        for p in 0..pixels {
            out[o * pixels + p] += gate[gate_index[p]] * src[p];
        }
    }
    let mut shape = vec![frames / t];
    shape.extend_from_slice(pix_shape);
    Tensor::new(shape, out)
}

/// Recovers a video from coded-exposure measurements produced by
/// [`coded_exposure_measure`] with the operator's mask. `cfg.patch_shape`
/// is the measurement patch `[windows, ...tile]`; patch origins must fall
/// on mask tile boundaries.
pub fn compressive_recover(
    measurements: &Tensor,
    op: &ObservationOperator,
    d: &Dictionary,
    tree: Option<&ClusterTree>,
    cfg: &TaskConfig,
) -> Result<(Tensor, TaskReport)> {
    let started = Instant::now();
    cfg.validate()?;
    let ObservationOperator::CodedExposure { mask, windows } = op else {
        return Err(Error::invalid(
            "compressive recovery needs a coded-exposure operator",
        ));
    };
    let t = mask.shape()[0];
    let tile = &mask.shape()[1..];
    if cfg.patch_shape[0] != *windows || cfg.patch_shape[1..] != *tile {
        return Err(Error::invalid(format!(
            "measurement patch {:?} must be [{windows}, {tile:?}]",
            cfg.patch_shape
        )));
    }
    if op.n_in() != d.dim() {
        return Err(Error::invalid(format!(
            "operator covers {} samples but atoms have {}",
            op.n_in(),
            d.dim()
        )));
    }
    let lo_layout = PatchLayout::new(measurements.shape(), &cfg.patch_shape, &cfg.stride)?;
    for (ax, &tl) in tile.iter().enumerate() {
        if lo_layout.axis_starts(ax + 1).iter().any(|s| s % tl != 0) {
            return Err(Error::invalid(format!(
                "patch origins on axis {} do not align with the {tl}-wide mask tile",
                ax + 1
            )));
        }
    }
    let mut video_shape = measurements.shape().to_vec();
    video_shape[0] *= t;
    let mut hi_patch = cfg.patch_shape.clone();
    hi_patch[0] *= t;
    let mut hi_stride = cfg.stride.clone();
    hi_stride[0] *= t;
    let hi_layout = PatchLayout::new(&video_shape, &hi_patch, &hi_stride)?;
    let ys = extract_with_layout(measurements, &lo_layout)?;
    let (estimate, cost) = restore(&ys, &hi_layout, op, d, tree, cfg)?;
    Ok((
        estimate,
        report("csrecover", d, cfg, cost, ys.len(), started),
    ))
}

/// Completes `observed` from the coordinates `op` keeps in each patch;
/// values elsewhere are ignored.
pub fn masked_recover(
    observed: &Tensor,
    op: &ObservationOperator,
    d: &Dictionary,
    tree: Option<&ClusterTree>,
    cfg: &TaskConfig,
) -> Result<(Tensor, TaskReport)> {
    let started = Instant::now();
    cfg.validate()?;
    check_dim(&cfg.patch_shape, d)?;
    let layout = PatchLayout::new(observed.shape(), &cfg.patch_shape, &cfg.stride)?;
    let ys = extract_with_layout(observed, &layout)?
        .iter()
        .map(|p| op.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let (estimate, cost) = restore(&ys, &layout, op, d, tree, cfg)?;
    Ok((
        estimate,
        report("maskrecover", d, cfg, cost, ys.len(), started),
    ))
}
