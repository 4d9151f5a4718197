//! Regenerate the bundled problem files under problems/.
//!
//! Usage: cargo run -p eqlin-cli --example gen_problems

use eqlin::formats::{save_json, ProblemFile};
use eqlin::presets;

fn main() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("problems");
    std::fs::create_dir_all(&root).unwrap();

    let (bof, l) = presets::section43(2, 430).unwrap();
    let file = ProblemFile::from_block_function(&bof, Some(l)).unwrap();
    save_json(&root.join("section43.json"), &file).unwrap();

    let grid = presets::example42(2, 42).unwrap();
    let file = ProblemFile::from_block_function(&grid.to_block_function().unwrap(), None).unwrap();
    save_json(&root.join("example42.json"), &file).unwrap();

    let mask: Vec<Vec<u8>> = presets::section43_pencil_mask()
        .into_iter()
        .map(|r| r.into_iter().map(u8::from).collect())
        .collect();
    save_json(&root.join("section43_mask.json"), &mask).unwrap();
    println!("wrote problems/ files");
}
