//! Minimal SVG scatter plot for 2-D results.

use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{GfdcError, Result};

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

/// Points colored by label code; outliers (`-1`) are drawn as black crosses.
/// Only two-dimensional data is accepted.
pub fn scatter_svg(data: &Dataset, labels: &[i64]) -> Result<String> {
    if data.w() != 2 {
        return Err(GfdcError::InvalidConfig(format!(
            "plotting needs 2-D data, this dataset has {} dimensions",
            data.w()
        )));
    }
    if labels.len() != data.n() {
        return Err(GfdcError::LengthMismatch { left: labels.len(), right: data.n() });
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for i in 0..data.n() {
        for (a, &v) in data.point(i).iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let project = |p: &[f64]| (MARGIN + (p[0] - lo[0]) * scale, SIZE - MARGIN - (p[1] - lo[1]) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for (i, &l) in labels.iter().enumerate() {
        let (x, y) = project(data.point(i));
        if l < 0 {
            let _ = writeln!(
                svg,
                r##"<path d="M{:.2} {:.2}l8 8m0 -8l-8 8" stroke="#000000" stroke-width="2"/>"##,
                x - 4.0,
                y - 4.0
            );
        } else {
            let color = PALETTE[(l.unsigned_abs() as usize).wrapping_sub(1) % PALETTE.len()];
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
