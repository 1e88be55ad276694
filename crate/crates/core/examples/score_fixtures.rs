//! Runs every bundled fixture and prints its scores.

use std::path::Path;

use gfdc::dataset::{load_csv, CsvOptions, LabelColumn};
use gfdc::metrics::score_all;
use gfdc::synth::Shape;
use gfdc::Gfdc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let opts = CsvOptions { has_header: true, label_column: Some(LabelColumn::Name("label".into())) };
    for shape in Shape::ALL {
        let data = load_csv(dir.join(format!("{}.csv", shape.name())), &opts)?;
        let fit = Gfdc::new(shape.clusters()).fit(&data)?;
        let s = score_all(&fit.result.label_codes(), &data.label_codes().unwrap())?;
        let t = &fit.fusion.trace;
        println!(
            "{:12} n={:4} k={:2} purity={:.4} ari={:.4} ami={:.4} fmi={:.4} gcs={} gfs={} path={:?} unstable={} {:.0?}",
            shape.name(),
            data.n(),
            fit.k,
            s.purity,
            s.ari,
            s.ami,
            s.fmi,
            t.granule_clusters.len(),
            t.granule_flocks.len(),
            t.path,
            fit.fusion.initial.unstable.len(),
            fit.timings.total()
        );
    }
    Ok(())
}
