//! Denoise a synthetic 128x128 image at 10 dB input SNR with a 2000-atom
//! dictionary sampled from other synthetic images, comparing exact matching
//! pursuit with tree-guided pursuit.

use stmp::pipelines::{add_noise_to_snr, denoise, psnr, SelectorKind, TaskConfig};
use stmp::synthetic::test_image;
use stmp::tensor::extract_patches;
use stmp::{build_from_patches, build_tree};

fn main() -> stmp::Result<()> {
    let branching: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|k| k.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![20, 10]);
    let alpha: f64 = std::env::args().nth(2).map_or(0.1, |s| s.parse().unwrap());

    let mut training = Vec::new();
    for seed in 1..=8 {
        let (_, mut p) = extract_patches(&test_image(96, 96, seed), &[16, 16], &[2, 2])?;
        training.append(&mut p);
    }
    let d = build_from_patches(&training, 2000, 7)?;
    let tree = build_tree(&d, &branching, 7)?;

    let clean = test_image(128, 128, 100);
    let noisy = add_noise_to_snr(&clean, 10.0, 3)?;
    println!("noisy psnr {:.2} dB", psnr(&clean, &noisy, 1.0)?);

    let cfg = TaskConfig {
        sparsity: 10,
        ..TaskConfig::new(vec![16, 16], vec![4, 4])
    };
    let (exact, exact_report) = denoise(
        &noisy,
        &d,
        None,
        &TaskConfig {
            selector: SelectorKind::Exact,
            ..cfg.clone()
        },
    )?;
    let (fast, fast_report) = denoise(&noisy, &d, Some(&tree), &TaskConfig { alpha, ..cfg })?;
    let (pe, pf) = (psnr(&clean, &exact, 1.0)?, psnr(&clean, &fast, 1.0)?);
    println!(
        "exact: {pe:.2} dB, {} inner products, {:.2}s",
        exact_report.inner_products, exact_report.seconds
    );
    println!(
        "tree {branching:?} alpha {alpha}: {pf:.2} dB, {} inner products ({:.1}% of exact), {:.2}s",
        fast_report.inner_products,
        100.0 * fast_report.inner_products as f64 / exact_report.inner_products as f64,
        fast_report.seconds
    );
    println!("psnr loss {:.2} dB", pe - pf);
    Ok(())
}
