//! 4x super-resolution: 4x4 low-res patches are coded against block-averaged
//! 16x16 atoms, and the lifted codes synthesize the high-res patches.

use stmp::pipelines::{psnr, super_resolve, SelectorKind, TaskConfig};
use stmp::synthetic::test_image;
use stmp::tensor::extract_patches;
use stmp::{build_from_patches, ObservationOperator, Tensor};

fn main() -> stmp::Result<()> {
    let mut patches = Vec::new();
    for seed in 1..=8 {
        let (_, mut p) = extract_patches(&test_image(96, 96, seed), &[16, 16], &[2, 2])?;
        patches.append(&mut p);
    }
    let d = build_from_patches(&patches, 2000, 4)?;

    let truth = test_image(128, 128, 100);
    let down = ObservationOperator::block_average(vec![128, 128], vec![4, 4])?;
    let lowres = Tensor::new(vec![32, 32], down.apply(truth.data())?)?;

    // nearest-neighbour upscale as a baseline
    let nearest = Tensor::from_fn(vec![128, 128], |ix| {
        lowres.get(&[ix[0] / 4, ix[1] / 4]).unwrap()
    })?;
    println!("pixel replication: {:.2} dB", psnr(&truth, &nearest, 1.0)?);

    let cfg = TaskConfig {
        sparsity: 3,
        branching: vec![20, 10],
        ..TaskConfig::new(vec![4, 4], vec![1, 1])
    };
    for selector in [SelectorKind::Exact, SelectorKind::Stmp] {
        let (hi, report) = super_resolve(
            &lowres,
            &d,
            None,
            &TaskConfig {
                selector,
                ..cfg.clone()
            },
            4,
        )?;
        println!(
            "{selector}: {:?} output, {:.2} dB, {} inner products",
            hi.shape(),
            psnr(&truth, &hi, 1.0)?,
            report.inner_products
        );
    }
    Ok(())
}
