use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn check_shapes(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn squared_error(a: &Tensor, b: &Tensor) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let e = x as f64 - y as f64;
            e * e
        })
        .sum()
}

/// `10 log10(peak^2 / mse)`; `f64::INFINITY` when the tensors are identical.
pub fn psnr(reference: &Tensor, test: &Tensor, peak: f64) -> Result<f64> {
    check_shapes(reference, test)?;
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::invalid("peak must be positive"));
    }
    let err = squared_error(reference, test);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = err / reference.len() as f64;
    Ok(10.0 * (peak * peak / mse).log10())
}

/// `10 log10(sum ref^2 / sum (ref - test)^2)`; `f64::INFINITY` when identical.
pub fn snr(reference: &Tensor, test: &Tensor) -> Result<f64> {
    check_shapes(reference, test)?;
    let err = squared_error(reference, test);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let energy: f64 = reference.data().iter().map(|&v| v as f64 * v as f64).sum();
    Ok(10.0 * (energy / err).log10())
}
