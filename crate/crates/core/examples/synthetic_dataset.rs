//! Writes the synthetic inputs the `stmp` binary can consume:
//! training and test images (PGM), a short video and a light field
//! (tensor files).
//!
//!     cargo run --example synthetic_dataset -- data/

use std::path::PathBuf;

use stmp::synthetic::{test_image, test_light_field, test_video};
use stmp::tensor::{save_pgm, save_tensor};

fn main() -> stmp::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).map_err(|e| stmp::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    for seed in 1..=8 {
        save_pgm(
            &test_image(96, 96, seed),
            dir.join(format!("train{seed}.pgm")),
        )?;
    }
    save_pgm(&test_image(128, 128, 100), dir.join("test.pgm"))?;
    save_tensor(&test_video(18, 63, 63, 5), dir.join("video.stmpt"))?;
    save_tensor(
        &test_light_field(32, 32, 5, 6),
        dir.join("lightfield.stmpt"),
    )?;
    for seed in 11..=14 {
        save_tensor(
            &test_video(18, 42, 42, seed),
            dir.join(format!("train_video{seed}.stmpt")),
        )?;
        save_tensor(
            &test_light_field(40, 40, 5, seed),
            dir.join(format!("train_lf{seed}.stmpt")),
        )?;
    }
    println!("wrote synthetic data to {}", dir.display());
    Ok(())
}
