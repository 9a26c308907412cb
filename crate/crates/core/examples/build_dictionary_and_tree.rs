//! Sample a dictionary from image patches, organize it into a balanced
//! tree, check the tree and round-trip both through their file formats.

use stmp::clustering::{load_tree, save_tree, validate_tree};
use stmp::synthetic::test_image;
use stmp::tensor::extract_patches;
use stmp::{build_from_patches, build_tree, load_dictionary, save_dictionary};

fn main() -> stmp::Result<()> {
    let mut patches = Vec::new();
    for seed in 1..=8 {
        let (_, mut p) = extract_patches(&test_image(96, 96, seed), &[16, 16], &[2, 2])?;
        patches.append(&mut p);
    }
    println!("{} training patches", patches.len());
    let d = build_from_patches(&patches, 4000, 1)?;
    println!(
        "dictionary: n={} m={} fingerprint {:016x}",
        d.dim(),
        d.len(),
        d.fingerprint()
    );

    let tree = build_tree(&d, &[40, 10], 1)?;
    for (depth, sizes) in tree.level_sizes().iter().enumerate() {
        println!(
            "depth {depth}: {} nodes of {:?} atoms",
            sizes.len(),
            (sizes.iter().min().unwrap(), sizes.iter().max().unwrap())
        );
    }
    let root = tree.root();
    let sizes: Vec<usize> = root.children.iter().map(|c| c.member_count()).collect();
    println!(
        "root cluster sizes: min {} max {}",
        sizes.iter().min().unwrap(),
        sizes.iter().max().unwrap()
    );
    println!("validation: {:?}", validate_tree(&tree, &d)?);

    let dir = std::env::temp_dir().join("stmp-example");
    std::fs::create_dir_all(&dir).map_err(|e| stmp::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    save_dictionary(&d, dir.join("dict.bin"))?;
    save_tree(&tree, dir.join("tree.bin"))?;
    let d2 = load_dictionary(dir.join("dict.bin"))?;
    let t2 = load_tree(dir.join("tree.bin"), d2.dim())?;
    println!(
        "reloaded: same atoms {}, tree valid {}",
        d2.payload() == d.payload(),
        validate_tree(&t2, &d2)?.passed()
    );
    Ok(())
}
