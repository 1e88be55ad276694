//! Regenerates the CSV fixtures: `cargo run -p gfdc --example write_fixtures [dir]`.

use std::path::PathBuf;

use gfdc::synth::{to_csv, Shape, FIXTURE_SEED};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    for shape in Shape::ALL {
        let path = dir.join(format!("{}.csv", shape.name()));
        std::fs::write(&path, to_csv(&shape.generate(FIXTURE_SEED)))?;
        println!("wrote {}", path.display());
    }
    std::fs::write(dir.join("tiny3.csv"), "x\n0\n1\n3\n")?;
    Ok(())
}
