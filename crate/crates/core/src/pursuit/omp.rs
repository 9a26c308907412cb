use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

const RIDGE: f64 = 1e-8;

/// Least-squares coefficients of `x` over a fixed support, from the normal
/// equations `(G + 1e-8 I) c = D_S^T x` solved by Cholesky.
pub fn omp_refit(d: &Dictionary, support: &[usize], x: &[f32]) -> Result<Vec<f32>> {
    if x.len() != d.dim() {
        return Err(Error::invalid(format!(
            "signal has length {}, dictionary dimension is {}",
            x.len(),
            d.dim()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= d.len()) {
        return Err(Error::invalid(format!("support atom {bad} out of range")));
    }
    let k = support.len();
    let cols: Vec<Vec<f64>> = support
        .iter()
        .map(|&i| d.atom(i).iter().map(|&v| v as f64).collect())
        .collect();
    let xs: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let dotf = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();

    let mut g = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..=i {
            let v = dotf(&cols[i], &cols[j]);
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
        g[i * k + i] += RIDGE;
    }
    let rhs: Vec<f64> = cols.iter().map(|c| dotf(c, &xs)).collect();

    // lower-triangular factor in place
    for j in 0..k {
        let mut diag = g[j * k + j];
        for p in 0..j {
            diag -= g[j * k + p] * g[j * k + p];
        }
        if diag.is_nan() || diag <= 0.0 {
            return Err(Error::Internal(format!(
                "Gram matrix not positive definite at column {j}"
            )));
        }
        let diag = diag.sqrt();
        g[j * k + j] = diag;
        for i in j + 1..k {
            let mut v = g[i * k + j];
            for p in 0..j {
                v -= g[i * k + p] * g[j * k + p];
            }
            g[i * k + j] = v / diag;
        }
    }
    let mut y = rhs;
    for i in 0..k {
        for p in 0..i {
            y[i] -= g[i * k + p] * y[p];
        }
        y[i] /= g[i * k + i];
    }
    for i in (0..k).rev() {
        for p in i + 1..k {
            y[i] -= g[p * k + i] * y[p];
        }
        y[i] /= g[i * k + i];
    }
    Ok(y.into_iter().map(|v| v as f32).collect())
}
