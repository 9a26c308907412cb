//! Linear observation operators from full patch space to a measurement
//! space, and dictionaries projected through them so that coding can happen
//! on measurements while synthesis happens in full space.

use std::path::Path;

use rand::Rng;

use crate::binio::{read_file, to_usize, write_file, Reader, Writer};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::pursuit::{reconstruct, SparseCode};
use crate::seed::rng_for;
use crate::tensor::{row_major_strides, Tensor};

const ROWS_MAGIC: &[u8; 8] = b"STMPRSEL";

/// Projected atoms with a norm below this are flagged unusable.
pub const UNUSABLE_NORM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ObservationOperator {
    Identity {
        dim: usize,
    },
    /// Keeps the listed coordinates (strictly increasing).
    RowSelect {
        n_in: usize,
        rows: Vec<usize>,
    },
    /// Per-pixel binary shutter integrated over time. `mask` has shape
    /// `[T, ...pixel axes]`; the patch holds `windows` consecutive
    /// `T`-frame windows, each integrated to one measurement frame.
    CodedExposure {
        mask: Tensor,
        windows: usize,
    },
    /// Each output cell is the mean of a `factor`-sized block of the patch.
    BlockAverage {
        patch_shape: Vec<usize>,
        factor: Vec<usize>,
    },
}

impl ObservationOperator {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Self::Identity { dim })
    }

    pub fn row_select(n_in: usize, rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("row selection keeps no coordinates"));
        }
        if rows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("selected rows must be strictly increasing"));
        }
        if *rows.last().unwrap() >= n_in {
            return Err(Error::invalid(format!(
                "row {} out of range for dimension {n_in}",
                rows.last().unwrap()
            )));
        }
        Ok(Self::RowSelect { n_in, rows })
    }

    pub fn coded_exposure(mask: Tensor, windows: usize) -> Result<Self> {
        if mask.rank() < 2 {
            return Err(Error::invalid(
                "mask needs a temporal axis and at least one pixel axis",
            ));
        }
        if windows == 0 {
            return Err(Error::invalid("at least one temporal window is required"));
        }
        if mask.data().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::invalid("coded-exposure masks must be binary"));
        }
        let frames = mask.shape()[0];
        let pixels = mask.len() / frames;
        for p in 0..pixels {
            if (0..frames).all(|t| mask.data()[t * pixels + p] == 0.0) {
                return Err(Error::invalid(format!("pixel {p} is never exposed")));
            }
        }
        Ok(Self::CodedExposure { mask, windows })
    }

    pub fn block_average(patch_shape: Vec<usize>, factor: Vec<usize>) -> Result<Self> {
        if patch_shape.len() != factor.len() || patch_shape.is_empty() {
            return Err(Error::invalid(
                "patch shape and factor must have the same positive rank",
            ));
        }
        if patch_shape
            .iter()
            .zip(&factor)
            .any(|(&p, &f)| f == 0 || p == 0 || p % f != 0)
        {
            return Err(Error::invalid(format!(
                "factor {factor:?} must divide patch shape {patch_shape:?}"
            )));
        }
        Ok(Self::BlockAverage {
            patch_shape,
            factor,
        })
    }

    pub fn n_in(&self) -> usize {
        match self {
            Self::Identity { dim } => *dim,
            Self::RowSelect { n_in, .. } => *n_in,
            Self::CodedExposure { mask, windows } => mask.len() * windows,
            Self::BlockAverage { patch_shape, .. } => patch_shape.iter().product(),
        }
    }

    pub fn n_out(&self) -> usize {
        match self {
            Self::Identity { dim } => *dim,
            Self::RowSelect { rows, .. } => rows.len(),
            Self::CodedExposure { mask, windows } => mask.len() / mask.shape()[0] * windows,
            Self::BlockAverage {
                patch_shape,
                factor,
            } => patch_shape.iter().zip(factor).map(|(p, f)| p / f).product(),
        }
    }

    /// True for the identity and for row selections that keep every row.
    pub fn is_identity(&self) -> bool {
        match self {
            Self::Identity { .. } => true,
            Self::RowSelect { n_in, rows } => rows.len() == *n_in,
            _ => false,
        }
    }

    pub fn apply(&self, patch: &[f32]) -> Result<Vec<f32>> {
        if patch.len() != self.n_in() {
            return Err(Error::invalid(format!(
                "operator expects length {}, got {}",
                self.n_in(),
                patch.len()
            )));
        }
        Ok(match self {
            Self::Identity { .. } => patch.to_vec(),
            Self::RowSelect { rows, .. } => rows.iter().map(|&r| patch[r]).collect(),
            Self::CodedExposure { mask, windows } => {
                let frames = mask.shape()[0];
                let pixels = mask.len() / frames;
                let m = mask.data();
                let mut out = vec![0.0f32; pixels * windows];
                for w in 0..*windows {
                    for t in 0..frames {
                        let src = &patch[(w * frames + t) * pixels..(w * frames + t + 1) * pixels];
                        let gate = &m[t * pixels..(t + 1) * pixels];
                        for ((o, &g), &v) in out[w * pixels..(w + 1) * pixels]
                            .iter_mut()
                            .zip(gate)
                            .zip(src)
                        {
                            *o += g * v;
                        }
                    }
                }
                out
            }
            Self::BlockAverage {
                patch_shape,
                factor,
            } => {
                let out_shape: Vec<usize> =
                    patch_shape.iter().zip(factor).map(|(p, f)| p / f).collect();
                let out_strides = row_major_strides(&out_shape);
                let block: f32 = factor.iter().product::<usize>() as f32;
                let mut out = vec![0.0f32; out_shape.iter().product()];
                let in_strides = row_major_strides(patch_shape);
                for (i, &v) in patch.iter().enumerate() {
                    let mut o = 0;
                    for ax in 0..patch_shape.len() {
                        let coord = (i / in_strides[ax]) % patch_shape[ax];
                        o += (coord / factor[ax]) * out_strides[ax];
                    }
                    out[o] += v;
                }
                out.iter_mut().for_each(|v| *v /= block);
                out
            }
        })
    }
}

/// Binary mask of shape `[frames, ...pixel_shape]` in which every pixel is
/// open for one contiguous run of `open_frames` frames at a seeded start.
pub fn random_bump_mask(
    frames: usize,
    pixel_shape: &[usize],
    open_frames: usize,
    seed: u64,
) -> Result<Tensor> {
    if open_frames == 0 || open_frames > frames {
        return Err(Error::invalid(format!(
            "open run of {open_frames} frames does not fit in {frames}"
        )));
    }
    let pixels: usize = pixel_shape.iter().product();
    let mut rng = rng_for(seed, &[0xe4]);
    let mut data = vec![0.0f32; frames * pixels];
    for p in 0..pixels {
        let start = rng.random_range(0..=frames - open_frames);
        for t in start..start + open_frames {
            data[t * pixels + p] = 1.0;
        }
    }
    let mut shape = vec![frames];
    shape.extend_from_slice(pixel_shape);
    Tensor::new(shape, data)
}

/// Coordinates of a `[rows, cols, views, views]` light-field patch that
/// belong to the listed `(view_row, view_col)` positions.
pub fn view_rows(patch_shape: &[usize], views: &[(usize, usize)]) -> Result<Vec<usize>> {
    if patch_shape.len() != 4 {
        return Err(Error::invalid("light-field patches have four axes"));
    }
    let (vr, vc) = (patch_shape[2], patch_shape[3]);
    if views.iter().any(|&(r, c)| r >= vr || c >= vc) {
        return Err(Error::invalid("view position outside the view grid"));
    }
    let n: usize = patch_shape.iter().product();
    Ok((0..n)
        .filter(|i| {
            let view = (i / vc % vr, i % vc);
            views.contains(&view)
        })
        .collect())
}

/// Top-middle, bottom-left and bottom-right views of a square view grid.
pub fn trinocular_views(grid: usize) -> Vec<(usize, usize)> {
    vec![(0, grid / 2), (grid - 1, 0), (grid - 1, grid - 1)]
}

/// Layout: `"STMPRSEL"`, u64 count, count x u64 row indices.
pub fn save_row_select(op: &ObservationOperator, path: impl AsRef<Path>) -> Result<()> {
    let ObservationOperator::RowSelect { rows, .. } = op else {
        return Err(Error::invalid("only row-select operators use this format"));
    };
    let mut w = Writer::default();
    w.bytes(ROWS_MAGIC);
    w.u64(rows.len() as u64);
    for &r in rows {
        w.u64(r as u64);
    }
    write_file(path.as_ref(), &w.buf)
}

/// Reads a row selection over an `n_in`-dimensional patch.
pub fn load_row_select(path: impl AsRef<Path>, n_in: usize) -> Result<ObservationOperator> {
    let bytes = read_file(path.as_ref())?;
    let mut r = Reader::new(&bytes);
    r.expect_magic(ROWS_MAGIC)?;
    let at = r.offset();
    let count = to_usize(r.u64()?, at, "row count")?;
    let mut rows = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let at = r.offset();
        rows.push(to_usize(r.u64()?, at, "row index")?);
    }
    r.finish()?;
    ObservationOperator::row_select(n_in, rows)
}

/// Whether the constant direction `op(1)` is projected out of the atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcHandling {
    Keep,
    Remove,
}

/// A dictionary seen through an operator: `atoms[i] * scale[i] == op(base[i])`
/// (after removing the constant direction when requested).
#[derive(Debug, Clone)]
pub struct ProjectedDictionary<'a> {
    base: &'a Dictionary,
    op: ObservationOperator,
    dc: DcHandling,
    atoms: Dictionary,
    scale: Vec<f32>,
    usable: Vec<bool>,
}

/// Response of the operator to a constant patch of ones.
pub fn dc_response(op: &ObservationOperator) -> Vec<f32> {
    op.apply(&vec![1.0; op.n_in()]).expect("length matches")
}

fn remove_direction(v: &mut [f32], dir: &[f32], dir_sq: f64) {
    let c = (v
        .iter()
        .zip(dir)
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum::<f64>()
        / dir_sq) as f32;
    for (x, &u) in v.iter_mut().zip(dir) {
        *x -= c * u;
    }
}

pub fn project_dictionary<'a>(
    d: &'a Dictionary,
    op: &ObservationOperator,
) -> Result<ProjectedDictionary<'a>> {
    project_dictionary_with(d, op, DcHandling::Keep)
}

/// The projection restoration pipelines code against: atoms keep their
/// own constant component under the identity (dictionaries are mean-free),
/// otherwise the operator's constant response is projected out.
pub fn coding_projection<'a>(
    d: &'a Dictionary,
    op: &ObservationOperator,
) -> Result<ProjectedDictionary<'a>> {
    let dc = if op.is_identity() {
        DcHandling::Keep
    } else {
        DcHandling::Remove
    };
    project_dictionary_with(d, op, dc)
}

pub fn project_dictionary_with<'a>(
    d: &'a Dictionary,
    op: &ObservationOperator,
    dc: DcHandling,
) -> Result<ProjectedDictionary<'a>> {
    if op.n_in() != d.dim() {
        return Err(Error::invalid(format!(
            "operator input dimension {} differs from atom dimension {}",
            op.n_in(),
            d.dim()
        )));
    }
    if op.is_identity() && dc == DcHandling::Keep {
        return Ok(ProjectedDictionary {
            base: d,
            op: op.clone(),
            dc,
            atoms: d.clone(),
            scale: vec![1.0; d.len()],
            usable: vec![true; d.len()],
        });
    }
    let n_out = op.n_out();
    let dir = dc_response(op);
    let dir_sq: f64 = dir.iter().map(|&v| v as f64 * v as f64).sum();
    let mut atoms = Vec::with_capacity(n_out * d.len());
    let mut scale = Vec::with_capacity(d.len());
    let mut usable = Vec::with_capacity(d.len());
    for a in d.atoms() {
        let mut p = op.apply(a)?;
        if dc == DcHandling::Remove && dir_sq > 0.0 {
            remove_direction(&mut p, &dir, dir_sq);
        }
        let nrm = norm(&p);
        if nrm < UNUSABLE_NORM {
            // placeholder keeps indices aligned; the flag keeps it out of selection
            atoms.extend((0..n_out).map(|j| if j == 0 { 1.0 } else { 0.0 }));
            scale.push(0.0);
            usable.push(false);
        } else {
            atoms.extend(p.iter().map(|&v| (v as f64 / nrm) as f32));
            scale.push(nrm as f32);
            usable.push(true);
        }
    }
    if !usable.iter().any(|&u| u) {
        return Err(Error::DegenerateOperator(
            "every atom vanishes under the operator".into(),
        ));
    }
    Ok(ProjectedDictionary {
        base: d,
        op: op.clone(),
        dc,
        atoms: Dictionary::from_unit_atoms(n_out, atoms)?,
        scale,
        usable,
    })
}

impl<'a> ProjectedDictionary<'a> {
    pub fn base(&self) -> &'a Dictionary {
        self.base
    }

    pub fn operator(&self) -> &ObservationOperator {
        &self.op
    }

    pub fn dc_handling(&self) -> DcHandling {
        self.dc
    }

    /// Unit-norm projected atoms (placeholders where unusable).
    pub fn atoms(&self) -> &Dictionary {
        &self.atoms
    }

    pub fn scale(&self) -> &[f32] {
        &self.scale
    }

    pub fn usable(&self) -> &[bool] {
        &self.usable
    }

    pub fn usable_count(&self) -> usize {
        self.usable.iter().filter(|&&u| u).count()
    }
}

/// Maps a code over projected atoms to the base dictionary:
/// coefficient `c_i` becomes `c_i / scale_i`.
pub fn lift_code(pd: &ProjectedDictionary, code: &SparseCode) -> Result<SparseCode> {
    let mut out = SparseCode::new(pd.base.len());
    out.cost = code.cost;
    for &(i, c) in &code.entries {
        if i >= pd.scale.len() {
            return Err(Error::invalid(format!(
                "code references atom {i} out of range"
            )));
        }
        if !pd.usable[i] {
            return Err(Error::Internal(format!(
                "atom {i} is unusable under the operator but was selected"
            )));
        }
        out.entries.push((i, c / pd.scale[i]));
    }
    out.history = code
        .history
        .iter()
        .filter(|(i, _)| pd.usable.get(*i).copied().unwrap_or(false))
        .map(|&(i, c)| (i, c / pd.scale[i]))
        .collect();
    Ok(out)
}

/// Synthesis in measurement space.
pub fn reconstruct_projected(pd: &ProjectedDictionary, code: &SparseCode) -> Result<Vec<f32>> {
    reconstruct(&pd.atoms, code)
}

/// Measurement with the operator's constant response projected out, ready
/// for coding against a [`coding_projection`].
pub(crate) fn strip_dc(op: &ObservationOperator, y: &[f32]) -> Vec<f32> {
    let dir = dc_response(op);
    let dir_sq: f64 = dir.iter().map(|&v| v as f64 * v as f64).sum();
    let mut out = y.to_vec();
    if dir_sq > 0.0 {
        remove_direction(&mut out, &dir, dir_sq);
    }
    out
}

/// Full-space estimate from a measurement and its code: the lifted
/// synthesis plus the constant that best explains what the code leaves
/// unexplained along `op(1)`.
pub(crate) fn synthesize(
    pd: &ProjectedDictionary,
    y: &[f32],
    code: &SparseCode,
) -> Result<Vec<f32>> {
    let lifted = lift_code(pd, code)?;
    let mut x = reconstruct(pd.base, &lifted)?;
    let seen = pd.op.apply(&x)?;
    let dir = dc_response(&pd.op);
    let dir_sq: f64 = dir.iter().map(|&v| v as f64 * v as f64).sum();
    if dir_sq > 0.0 {
        let c = y
            .iter()
            .zip(&seen)
            .zip(&dir)
            .map(|((&a, &b), &u)| (a as f64 - b as f64) * u as f64)
            .sum::<f64>()
            / dir_sq;
        x.iter_mut().for_each(|v| *v += c as f32);
    }
    Ok(x)
}
