//! Light field from three views: 8x8x5x5 patches keep only the top-middle,
//! bottom-left and bottom-right views (192 of 1600 samples) and the other
//! 22 views are synthesized from the lifted codes.

use stmp::operators::{trinocular_views, view_rows};
use stmp::pipelines::{masked_recover, snr, SelectorKind, TaskConfig};
use stmp::synthetic::test_light_field;
use stmp::tensor::extract_patches;
use stmp::{build_from_patches, ObservationOperator};

fn main() -> stmp::Result<()> {
    let mut patches = Vec::new();
    for seed in 11..=14 {
        let (_, mut p) = extract_patches(
            &test_light_field(40, 40, 5, seed),
            &[8, 8, 5, 5],
            &[2, 2, 1, 1],
        )?;
        patches.append(&mut p);
    }
    let d = build_from_patches(&patches, 1000, 6)?;

    let rows = view_rows(&[8, 8, 5, 5], &trinocular_views(5))?;
    let op = ObservationOperator::row_select(1600, rows)?;
    println!("coding dimension {} of {}", op.n_out(), op.n_in());

    let truth = test_light_field(32, 32, 5, 6);
    let cfg = TaskConfig {
        sparsity: 10,
        branching: vec![10, 10],
        ..TaskConfig::new(vec![8, 8, 5, 5], vec![4, 4, 1, 1])
    };
    for selector in [SelectorKind::Exact, SelectorKind::Stmp] {
        let (rec, report) = masked_recover(
            &truth,
            &op,
            &d,
            None,
            &TaskConfig {
                selector,
                ..cfg.clone()
            },
        )?;
        println!(
            "{selector}: SNR {:.2} dB, {} inner products",
            snr(&truth, &rec)?,
            report.inner_products
        );
    }
    Ok(())
}
