//! Video compressive sampling: every pixel integrates 9 frames through a
//! coded shutter, giving 1/9 of the samples; patches are recovered in the
//! measurement space and synthesized back to full frame rate.

use stmp::operators::random_bump_mask;
use stmp::pipelines::{coded_exposure_measure, compressive_recover, snr, SelectorKind, TaskConfig};
use stmp::synthetic::test_video;
use stmp::tensor::extract_patches;
use stmp::{build_from_patches, ObservationOperator};

fn main() -> stmp::Result<()> {
    let mut patches = Vec::new();
    for seed in 11..=14 {
        let (_, mut p) = extract_patches(&test_video(18, 42, 42, seed), &[9, 7, 7], &[9, 2, 2])?;
        patches.append(&mut p);
    }
    let d = build_from_patches(&patches, 2000, 5)?;

    let video = test_video(9, 63, 63, 5);
    let mask = random_bump_mask(9, &[7, 7], 3, 8)?;
    let op = ObservationOperator::coded_exposure(mask.clone(), 1)?;
    let y = coded_exposure_measure(&video, &mask)?;
    println!(
        "video {:?} -> measurements {:?} ({} of {} samples)",
        video.shape(),
        y.shape(),
        y.len(),
        video.len()
    );

    let cfg = TaskConfig {
        sparsity: 10,
        branching: vec![20, 10],
        ..TaskConfig::new(vec![1, 7, 7], vec![1, 7, 7])
    };
    for selector in [SelectorKind::Exact, SelectorKind::Stmp] {
        let (rec, report) = compressive_recover(
            &y,
            &op,
            &d,
            None,
            &TaskConfig {
                selector,
                ..cfg.clone()
            },
        )?;
        println!(
            "{selector}: SNR {:.2} dB, {} inner products, {} patches",
            snr(&video, &rec)?,
            report.inner_products,
            report.patches
        );
    }
    Ok(())
}
