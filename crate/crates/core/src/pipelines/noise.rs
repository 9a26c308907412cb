use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::tensor::Tensor;

/// Adds white Gaussian noise rescaled so that
/// `10 log10(||t||^2 / ||noise||^2)` equals `target_snr_db`.
/// `f64::INFINITY` returns the input unchanged.
pub fn add_noise_to_snr(t: &Tensor, target_snr_db: f64, seed: u64) -> Result<Tensor> {
    if target_snr_db == f64::INFINITY {
        return Ok(t.clone());
    }
    if !target_snr_db.is_finite() {
        return Err(Error::invalid(format!(
            "target SNR must be finite or +inf, got {target_snr_db}"
        )));
    }
    let energy: f64 = t.data().iter().map(|&v| v as f64 * v as f64).sum();
    if energy == 0.0 {
        return Err(Error::invalid("cannot set an SNR on an all-zero signal"));
    }
    let mut rng = rng_for(seed, &[0x5e]);
    let noise: Vec<f64> = (0..t.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let noise_energy: f64 = noise.iter().map(|v| v * v).sum();
    let want = energy / 10f64.powf(target_snr_db / 10.0);
    let scale = (want / noise_energy).sqrt();
    let data = t
        .data()
        .iter()
        .zip(&noise)
        .map(|(&v, n)| (v as f64 + scale * n) as f32)
        .collect();
    Tensor::new(t.shape().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::test_image;

    #[test]
    fn realized_snr_hits_target() {
        let x = test_image(64, 64, 1);
        for target in [0.0, 10.0, 25.0] {
            let y = add_noise_to_snr(&x, target, 7).unwrap();
            let mut sig = 0.0f64;
            let mut err = 0.0f64;
            for (&a, &b) in x.data().iter().zip(y.data()) {
                sig += a as f64 * a as f64;
                err += (b as f64 - a as f64).powi(2);
            }
            let got = 10.0 * (sig / err).log10();
            assert!((got - target).abs() <= 0.1, "{got} vs {target}");
        }
    }

    #[test]
    fn infinite_target_is_identity_and_seeds_repeat() {
        let x = test_image(16, 16, 2);
        assert_eq!(add_noise_to_snr(&x, f64::INFINITY, 1).unwrap(), x);
        assert_eq!(
            add_noise_to_snr(&x, 10.0, 3).unwrap(),
            add_noise_to_snr(&x, 10.0, 3).unwrap()
        );
        assert_ne!(
            add_noise_to_snr(&x, 10.0, 3).unwrap(),
            add_noise_to_snr(&x, 10.0, 4).unwrap()
        );
    }

    #[test]
    fn zero_signal_is_rejected() {
        let z = Tensor::zeros(vec![4, 4]).unwrap();
        assert!(matches!(
            add_noise_to_snr(&z, 10.0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }
}
