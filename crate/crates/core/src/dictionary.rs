//! Over-complete dictionaries of unit-norm atoms.
//!
//! Atoms are stored atom-major (each atom contiguous) so that scoring a
//! vector against the dictionary is a sequence of linear scans.

use std::ops::AddAssign;
use std::path::Path;

use rand::seq::index::sample;

use crate::binio::{read_file, to_usize, write_file, Reader, Writer};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::seed::rng_for;

const MAGIC: &[u8; 8] = b"STMPDICT";
const VERSION: u32 = 1;

/// Largest tolerated deviation of an atom norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-5;

/// Mean-removed patches with a norm at or below this are treated as flat.
const FLAT_PATCH_NORM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    dim: usize,
    atoms: Vec<f32>,
    fingerprint: u64,
}

/// FNV-1a (64-bit) over the little-endian bytes of a payload of reals.
pub fn fnv1a(values: &[f32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

impl Dictionary {
    /// Wraps an atom-major payload that is expected to be normalized already.
    pub fn from_unit_atoms(dim: usize, atoms: Vec<f32>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() || !atoms.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "payload of {} values is not a positive multiple of dimension {dim}",
                atoms.len()
            )));
        }
        let d = Self {
            dim,
            fingerprint: fnv1a(&atoms),
            atoms,
        };
        d.validate()?;
        Ok(d)
    }

    /// Atom dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Atom count `m`.
    pub fn len(&self) -> usize {
        self.atoms.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f32] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.atoms.chunks_exact(self.dim)
    }

    pub fn payload(&self) -> &[f32] {
        &self.atoms
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Checks every atom is finite and of unit norm.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.atoms().enumerate() {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("atom {i} has non-finite entries")));
            }
            let nrm = norm(a);
            if (nrm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::invalid(format!("atom {i} has norm {nrm}")));
            }
        }
        Ok(())
    }
}

/// Divides every raw atom by its Euclidean norm, preserving order.
pub fn normalize_columns(raw_atoms: &[Vec<f32>]) -> Result<Dictionary> {
    let dim = raw_atoms
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("no atoms supplied"))?;
    let mut atoms = Vec::with_capacity(dim * raw_atoms.len());
    for (i, a) in raw_atoms.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::invalid(format!(
                "atom {i} has length {}, expected {dim}",
                a.len()
            )));
        }
        let nrm = norm(a);
        if nrm.is_nan() || nrm <= 0.0 || !nrm.is_finite() {
            return Err(Error::invalid(format!("atom {i} is zero or non-finite")));
        }
        atoms.extend(a.iter().map(|&v| (v as f64 / nrm) as f32));
    }
    Dictionary::from_unit_atoms(dim, atoms)
}

fn mean_removed(p: &[f32]) -> (Vec<f64>, f64) {
    let mean = p.iter().map(|&v| v as f64).sum::<f64>() / p.len() as f64;
    let centered: Vec<f64> = p.iter().map(|&v| v as f64 - mean).collect();
    let nrm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    (centered, nrm)
}

/// Samples `m` distinct non-flat patches (seeded), removes each one's mean and
/// normalizes it. Selected atoms keep the relative order of their source patches.
pub fn build_from_patches(patches: &[Vec<f32>], m: usize, seed: u64) -> Result<Dictionary> {
    if m == 0 {
        return Err(Error::invalid("atom count must be positive"));
    }
    let dim = patches
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InsufficientData("no patches supplied".into()))?;
    if dim == 0 || patches.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("patches must share one positive length"));
    }
    let usable: Vec<usize> = patches
        .iter()
        .enumerate()
        .filter(|(_, p)| mean_removed(p).1 > FLAT_PATCH_NORM)
        .map(|(i, _)| i)
        .collect();
    if usable.len() < m {
        return Err(Error::InsufficientData(format!(
            "{m} atoms requested but only {} of {} patches have nonzero variance",
            usable.len(),
            patches.len()
        )));
    }
    let mut rng = rng_for(seed, &[0xd1c7]);
    let mut chosen: Vec<usize> = sample(&mut rng, usable.len(), m)
        .into_iter()
        .map(|k| usable[k])
        .collect();
    chosen.sort_unstable();
    let mut atoms = Vec::with_capacity(m * dim);
    for i in chosen {
        let (centered, nrm) = mean_removed(&patches[i]);
        atoms.extend(centered.iter().map(|v| (v / nrm) as f32));
    }
    Dictionary::from_unit_atoms(dim, atoms)
}

/// Tally of n-dimensional inner products, split by what was scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreCounter {
    /// Products against tree centroids.
    pub centroid: u64,
    /// Products against dictionary atoms.
    pub atom: u64,
}

impl ScoreCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn inner_products(&self) -> u64 {
        self.centroid + self.atom
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

impl AddAssign for ScoreCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.centroid += rhs.centroid;
        self.atom += rhs.atom;
    }
}

impl std::iter::Sum for ScoreCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut a, b| {
            a += b;
            a
        })
    }
}

/// Inner product of `v` with every atom.
pub fn score_all(d: &Dictionary, v: &[f32], counter: &mut ScoreCounter) -> Result<Vec<f32>> {
    if v.len() != d.dim() {
        return Err(Error::invalid(format!(
            "vector has length {}, dictionary dimension is {}",
            v.len(),
            d.dim()
        )));
    }
    counter.atom += d.len() as u64;
    Ok(d.atoms().map(|a| dot(a, v)).collect())
}

/// File layout: `"STMPDICT"`, u32 version, u64 n, u64 m, m x n little-endian `f32`.
pub fn save_dictionary(d: &Dictionary, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode(d))
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    decode(&read_file(path.as_ref())?)
}

pub(crate) fn encode(d: &Dictionary) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u64(d.dim() as u64);
    w.u64(d.len() as u64);
    w.f32s(d.payload());
    w.buf
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Dictionary> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    r.expect_version(VERSION)?;
    let at = r.offset();
    let dim = to_usize(r.u64()?, at, "atom dimension")?;
    let at_m = r.offset();
    let m = to_usize(r.u64()?, at_m, "atom count")?;
    if dim == 0 || m == 0 {
        return Err(Error::Format {
            offset: at,
            message: format!("empty dictionary header (n={dim}, m={m})"),
        });
    }
    let count = dim.checked_mul(m).ok_or_else(|| Error::Format {
        offset: at,
        message: "n*m overflows".into(),
    })?;
    let payload_at = r.offset();
    let atoms = r.f32_vec(count)?;
    r.finish()?;
    Dictionary::from_unit_atoms(dim, atoms).map_err(|e| Error::Format {
        offset: payload_at,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raw(n: usize, m: usize, seed: u64) -> Vec<Vec<f32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect())
            .collect()
    }

    #[test]
    fn three_four_five() {
        let d = normalize_columns(&[vec![3.0, 4.0]]).unwrap();
        assert!((d.atom(0)[0] - 0.6).abs() < 1e-7);
        assert!((d.atom(0)[1] - 0.8).abs() < 1e-7);
    }

    #[test]
    fn normalization_is_idempotent() {
        let d = normalize_columns(&random_raw(12, 30, 1)).unwrap();
        let raw: Vec<Vec<f32>> = d.atoms().map(<[f32]>::to_vec).collect();
        let again = normalize_columns(&raw).unwrap();
        for (a, b) in d.payload().iter().zip(again.payload()) {
            assert!((a - b).abs() <= 1e-7);
        }
    }

    #[test]
    fn random_matrix_columns_are_unit() {
        let d = normalize_columns(&random_raw(100, 500, 2)).unwrap();
        for a in d.atoms() {
            assert!((norm(a) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_atom_is_named() {
        let err = normalize_columns(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("atom 1"));
    }

    #[test]
    fn build_uses_every_patch_when_m_equals_supply() {
        let patches = vec![
            vec![0.0, 1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0, 5.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![2.0, 2.0, 0.0, 0.0],
        ];
        let d = build_from_patches(&patches, 3, 9).unwrap();
        let expect = normalize_columns(&[
            vec![-1.5, -0.5, 0.5, 1.5],
            vec![0.75, -0.25, -0.25, -0.25],
            vec![1.0, 1.0, -1.0, -1.0],
        ])
        .unwrap();
        for (a, b) in d.payload().iter().zip(expect.payload()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(matches!(
            build_from_patches(&patches, 4, 9),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn build_is_seeded() {
        let patches = random_raw(16, 300, 3);
        let a = build_from_patches(&patches, 50, 11).unwrap();
        let b = build_from_patches(&patches, 50, 11).unwrap();
        let c = build_from_patches(&patches, 50, 12).unwrap();
        assert_eq!(a.payload(), b.payload());
        assert_ne!(a.payload(), c.payload());
        for atom in a.atoms() {
            assert!(atom.iter().map(|&v| v as f64).sum::<f64>().abs() < 1e-5);
        }
    }

    #[test]
    fn scoring_contract() {
        let d = normalize_columns(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let mut c = ScoreCounter::new();
        assert_eq!(
            score_all(&d, &[0.0, 0.0, 5.0], &mut c).unwrap(),
            vec![0.0, 0.0, 5.0]
        );
        assert_eq!(c.inner_products(), 3);
        score_all(&d, &[1.0, 1.0, 1.0], &mut c).unwrap();
        assert_eq!(c.inner_products(), 6);
        assert!(score_all(&d, &[1.0], &mut c).is_err());

        let d = normalize_columns(&random_raw(20, 40, 4)).unwrap();
        for i in [0, 17, 39] {
            let s = score_all(&d, d.atom(i), &mut c).unwrap();
            assert!((s[i] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn file_round_trip_and_corruption() {
        let d = normalize_columns(&random_raw(7, 9, 5)).unwrap();
        let bytes = encode(&d);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.payload(), d.payload());
        assert_eq!(back.fingerprint(), d.fingerprint());

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Format { offset: 0, .. })));

        let mut bad = bytes.clone();
        bad[20..28].copy_from_slice(&10u64.to_le_bytes());
        assert!(matches!(decode(&bad), Err(Error::Truncated { .. })));
    }
}
