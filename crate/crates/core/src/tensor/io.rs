//! Binary tensor format:
//! `"STMPTNSR"`, u32 version, u32 dtype, u32 rank, rank x u64 extents, payload.
//! All integers and reals are little-endian; dtype 1 is `f32`.

use std::path::Path;

use super::Tensor;
use crate::binio::{read_file, to_usize, write_file, Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"STMPTNSR";
const VERSION: u32 = 1;
const DTYPE_F32: u32 = 1;

pub(crate) fn encode(t: &Tensor) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u32(DTYPE_F32);
    w.u32(t.rank() as u32);
    for &e in t.shape() {
        w.u64(e as u64);
    }
    w.f32s(t.data());
    w.buf
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Tensor> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    r.expect_version(VERSION)?;
    let dtype_at = r.offset();
    let dtype = r.u32()?;
    if dtype != DTYPE_F32 {
        return Err(Error::Format {
            offset: dtype_at,
            message: format!("unsupported dtype code {dtype}"),
        });
    }
    let rank_at = r.offset();
    let rank = r.u32()? as usize;
    if rank == 0 {
        return Err(Error::Format {
            offset: rank_at,
            message: "rank must be at least 1".into(),
        });
    }
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        let at = r.offset();
        let e = to_usize(r.u64()?, at, "extent")?;
        if e == 0 {
            return Err(Error::Format {
                offset: at,
                message: "zero extent".into(),
            });
        }
        shape.push(e);
    }
    let count = shape
        .iter()
        .try_fold(1usize, |a, &s| a.checked_mul(s))
        .ok_or_else(|| Error::Format {
            offset: rank_at,
            message: format!("shape {shape:?} overflows"),
        })?;
    let payload_at = r.offset();
    let data = r.f32_vec(count)?;
    r.finish()?;
    Tensor::new(shape, data).map_err(|e| Error::Format {
        offset: payload_at,
        message: e.to_string(),
    })
}

pub fn save_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode(t))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    decode(&read_file(path.as_ref())?)
}
