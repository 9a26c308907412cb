use super::code::SparseCode;
use super::select::AtomSelector;
use crate::dictionary::ScoreCounter;
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm};

/// Pursuit settings shared by every selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// Fraction of children kept per tree level; only tree selectors use it.
    pub alpha: f64,
    /// Maximum number of pursuit steps `K`.
    pub sparsity: usize,
    /// Stop once `||r|| <= tol`. `None` means `1e-6 * ||x||`.
    pub residual_tolerance: Option<f32>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            sparsity: 10,
            residual_tolerance: None,
        }
    }
}

impl SearchParams {
    pub fn new(alpha: f64, sparsity: usize) -> Self {
        Self {
            alpha,
            sparsity,
            residual_tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.sparsity == 0 {
            return Err(Error::invalid("sparsity K must be at least 1"));
        }
        if let Some(t) = self.residual_tolerance {
            if t.is_nan() || t < 0.0 {
                return Err(Error::invalid(format!(
                    "residual tolerance must be >= 0, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Matching pursuit: starting from `r = x`, repeatedly pick an atom for the
/// residual, take `s = d_i . r`, and update `r <- r - s d_i`. Returns the
/// code and the final residual.
pub fn matching_pursuit_with_residual<S: AtomSelector + ?Sized>(
    selector: &S,
    x: &[f32],
    params: &SearchParams,
) -> Result<(SparseCode, Vec<f32>)> {
    params.validate()?;
    let d = selector.dictionary();
    if x.len() != d.dim() {
        return Err(Error::invalid(format!(
            "signal has length {}, dictionary dimension is {}",
            x.len(),
            d.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("signal has non-finite entries"));
    }
    let tol = params.residual_tolerance.map_or(1e-6 * norm(x), f64::from);
    let mut code = SparseCode::new(d.len());
    let mut counter = ScoreCounter::new();
    let mut r = x.to_vec();
    for _ in 0..params.sparsity {
        if norm(&r) <= tol {
            break;
        }
        let sel = selector.select(&r, &mut counter)?;
        if sel.score == 0.0 {
            break;
        }
        axpy(-sel.score, d.atom(sel.index), &mut r);
        code.accumulate(sel.index, sel.score);
        code.history.push((sel.index, sel.score));
    }
    code.cost = counter;
    Ok((code, r))
}

pub fn matching_pursuit<S: AtomSelector + ?Sized>(
    selector: &S,
    x: &[f32],
    params: &SearchParams,
) -> Result<SparseCode> {
    matching_pursuit_with_residual(selector, x, params).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::normalize_columns;
    use crate::pursuit::{reconstruct, ExactSelector};
    use crate::synthetic::random_dictionary;

    fn orthonormal() -> crate::dictionary::Dictionary {
        normalize_columns(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn orthonormal_two_sparse() {
        let d = orthonormal();
        let x = [2.0, 3.0, 0.0, 0.0];
        let (code, r) =
            matching_pursuit_with_residual(&ExactSelector::new(&d), &x, &SearchParams::new(1.0, 2))
                .unwrap();
        assert_eq!(code.entries, vec![(1, 3.0), (0, 2.0)]);
        assert!(norm(&r) < 1e-6);
        assert_eq!(code.ip_count(), 8);
    }

    #[test]
    fn exact_atom_stops_early() {
        let d = random_dictionary(16, 30, 2);
        let params = SearchParams {
            alpha: 1.0,
            sparsity: 10,
            residual_tolerance: Some(1e-6),
        };
        let code = matching_pursuit(&ExactSelector::new(&d), d.atom(5), &params).unwrap();
        assert_eq!(code.entries.len(), 1);
        assert_eq!(code.entries[0].0, 5);
        assert!((code.entries[0].1 - 1.0).abs() < 1e-6);
        assert_eq!(code.ip_count(), 30);
    }

    #[test]
    fn residual_identity() {
        let d = random_dictionary(10, 40, 3);
        let x: Vec<f32> = (0..10).map(|i| (i as f32 * 0.7).sin()).collect();
        let (code, r) =
            matching_pursuit_with_residual(&ExactSelector::new(&d), &x, &SearchParams::new(1.0, 6))
                .unwrap();
        let approx = reconstruct(&d, &code).unwrap();
        for i in 0..10 {
            assert!((x[i] - approx[i] - r[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let d = orthonormal();
        let sel = ExactSelector::new(&d);
        assert!(matching_pursuit(&sel, &[1.0; 4], &SearchParams::new(1.0, 0)).is_err());
        assert!(matching_pursuit(&sel, &[1.0; 3], &SearchParams::new(1.0, 1)).is_err());
        assert!(matching_pursuit(&sel, &[f32::NAN; 4], &SearchParams::new(1.0, 1)).is_err());
    }

    #[test]
    fn zero_signal_yields_empty_code() {
        let d = orthonormal();
        let code = matching_pursuit(
            &ExactSelector::new(&d),
            &[0.0; 4],
            &SearchParams::new(1.0, 3),
        )
        .unwrap();
        assert!(code.entries.is_empty());
    }
}
