use super::{checked_product, row_major_strides, Tensor};
use crate::error::{Error, Result};

/// Sliding-window geometry over a tensor.
///
/// Along every axis the window starts at `0, stride, 2*stride, ...` while it
/// fits, and the last valid start `extent - patch` is always appended so the
/// far border is covered even when the stride does not divide the range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchLayout {
    tensor_shape: Vec<usize>,
    patch_shape: Vec<usize>,
    stride: Vec<usize>,
    axis_starts: Vec<Vec<usize>>,
}

impl PatchLayout {
    pub fn new(tensor_shape: &[usize], patch_shape: &[usize], stride: &[usize]) -> Result<Self> {
        let rank = tensor_shape.len();
        if patch_shape.len() != rank || stride.len() != rank {
            return Err(Error::invalid(format!(
                "rank mismatch: tensor {tensor_shape:?}, patch {patch_shape:?}, stride {stride:?}"
            )));
        }
        if rank == 0 {
            return Err(Error::invalid("patch layout needs rank >= 1"));
        }
        if patch_shape.contains(&0) || stride.contains(&0) || tensor_shape.contains(&0) {
            return Err(Error::invalid(
                "extents, patch sizes and strides must be positive",
            ));
        }
        let mut axis_starts = Vec::with_capacity(rank);
        for ax in 0..rank {
            let (extent, patch, step) = (tensor_shape[ax], patch_shape[ax], stride[ax]);
            if patch > extent {
                return Err(Error::invalid(format!(
                    "patch extent {patch} exceeds tensor extent {extent} on axis {ax}"
                )));
            }
            let last = extent - patch;
            let mut starts: Vec<usize> = (0..=last).step_by(step).collect();
            if *starts.last().unwrap() != last {
                starts.push(last);
            }
            axis_starts.push(starts);
        }
        Ok(Self {
            tensor_shape: tensor_shape.to_vec(),
            patch_shape: patch_shape.to_vec(),
            stride: stride.to_vec(),
            axis_starts,
        })
    }

    pub fn tensor_shape(&self) -> &[usize] {
        &self.tensor_shape
    }

    pub fn patch_shape(&self) -> &[usize] {
        &self.patch_shape
    }

    pub fn stride(&self) -> &[usize] {
        &self.stride
    }

    /// Window start positions along one axis.
    pub fn axis_starts(&self, axis: usize) -> &[usize] {
        &self.axis_starts[axis]
    }

    /// Patch vector dimension.
    pub fn patch_len(&self) -> usize {
        self.patch_shape.iter().product()
    }

    pub fn len(&self) -> usize {
        self.axis_starts.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start coordinate of the `i`-th window (row-major over the per-axis starts).
    pub fn origin(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.axis_starts.len()];
        for ax in (0..out.len()).rev() {
            let starts = &self.axis_starts[ax];
            out[ax] = starts[i % starts.len()];
            i /= starts.len();
        }
        out
    }

    pub fn origins(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|i| self.origin(i))
    }

    /// Calls `f(patch_offset, tensor_offset, run_len)` for each contiguous run
    /// of the window at `origin`.
    fn for_each_run(&self, origin: &[usize], mut f: impl FnMut(usize, usize, usize)) {
        let rank = self.patch_shape.len();
        let tstrides = row_major_strides(&self.tensor_shape);
        let run = self.patch_shape[rank - 1];
        let outer: usize = self.patch_shape[..rank - 1].iter().product();
        let mut idx = vec![0usize; rank - 1];
        for row in 0..outer {
            let mut toff = origin[rank - 1];
            for ax in 0..rank - 1 {
                toff += (origin[ax] + idx[ax]) * tstrides[ax];
            }
            f(row * run, toff, run);
            for ax in (0..rank - 1).rev() {
                idx[ax] += 1;
                if idx[ax] < self.patch_shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
    }
}

/// Copies every window of `t` into its own row-major vector.
pub fn extract_patches(
    t: &Tensor,
    patch_shape: &[usize],
    stride: &[usize],
) -> Result<(PatchLayout, Vec<Vec<f32>>)> {
    let layout = PatchLayout::new(t.shape(), patch_shape, stride)?;
    let patches = extract_with_layout(t, &layout)?;
    Ok((layout, patches))
}

pub(crate) fn extract_with_layout(t: &Tensor, layout: &PatchLayout) -> Result<Vec<Vec<f32>>> {
    if t.shape() != layout.tensor_shape() {
        return Err(Error::invalid(format!(
            "layout was built for shape {:?}, tensor has {:?}",
            layout.tensor_shape(),
            t.shape()
        )));
    }
    let n = layout.patch_len();
    let data = t.data();
    Ok(layout
        .origins()
        .map(|o| {
            let mut p = vec![0.0f32; n];
            layout.for_each_run(&o, |poff, toff, len| {
                p[poff..poff + len].copy_from_slice(&data[toff..toff + len]);
            });
            p
        })
        .collect())
}

/// Overlap-averages patches back onto the layout's tensor grid.
pub fn aggregate_patches(layout: &PatchLayout, patches: &[Vec<f32>]) -> Result<Tensor> {
    if patches.len() != layout.len() {
        return Err(Error::invalid(format!(
            "layout has {} windows but {} patches were supplied",
            layout.len(),
            patches.len()
        )));
    }
    let n = layout.patch_len();
    if let Some(i) = patches.iter().position(|p| p.len() != n) {
        return Err(Error::invalid(format!(
            "patch {i} has length {}, expected {n}",
            patches[i].len()
        )));
    }
    let total = checked_product(layout.tensor_shape())?;
    let mut sum = vec![0.0f64; total];
    let mut count = vec![0u32; total];
    for (o, p) in layout.origins().zip(patches) {
        layout.for_each_run(&o, |poff, toff, len| {
            for k in 0..len {
                sum[toff + k] += p[poff + k] as f64;
                count[toff + k] += 1;
            }
        });
    }
    let data = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { (s / c as f64) as f32 })
        .collect();
    Tensor::new(layout.tensor_shape().to_vec(), data)
}
