//! Browser bindings. Every function takes flat row-major coordinates and
//! returns a JSON string; failures surface as JS exceptions.

use gfdc::dataset::{pairwise_distances, Dataset};
use gfdc::density::{default_k, sparse_degree_table};
use gfdc::export::ResultDocument;
use gfdc::synth::Shape;
use gfdc::Gfdc;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json(v: &impl Serialize) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(fail)
}

/// Runs the full pipeline. A negative `tau` turns outlier detection off;
/// `k = 0` uses the default neighbor count.
#[wasm_bindgen]
pub fn cluster(points: &[f64], dim: usize, clusters: usize, tau: f64, k: usize) -> Result<String, JsError> {
    let data = Dataset::from_flat(points.to_vec(), dim).map_err(fail)?;
    let mut config = Gfdc::new(clusters);
    if tau >= 0.0 {
        config = config.tau(tau);
    }
    if k > 0 {
        config = config.k(k);
    }
    let fit = config.fit(&data).map_err(fail)?;
    to_json(&ResultDocument::new(&fit, dim, false))
}

#[derive(Serialize)]
struct SparseDegrees {
    k: usize,
    r_star: Vec<f64>,
    knn_dist: Vec<f64>,
    sd: Vec<f64>,
}

/// Per-sample `r*`, kNN distance and sparse degree. `k = 0` means the default.
#[wasm_bindgen]
pub fn sparse_degrees(points: &[f64], dim: usize, k: usize) -> Result<String, JsError> {
    let data = Dataset::from_flat(points.to_vec(), dim).map_err(fail)?;
    let k = if k == 0 { default_k(data.n()).min(data.n().saturating_sub(1)).max(1) } else { k };
    let t = sparse_degree_table(&pairwise_distances(&data), k).map_err(fail)?;
    to_json(&SparseDegrees { k, r_star: t.r_star, knn_dist: t.knn_dist, sd: t.sd })
}

#[derive(Serialize)]
struct Generated {
    name: &'static str,
    clusters: usize,
    points: Vec<f64>,
    labels: Vec<i64>,
}

/// One of the bundled 2-D shapes, by name.
#[wasm_bindgen]
pub fn generate(shape: &str, seed: u32) -> Result<String, JsError> {
    let shape: Shape = shape.parse().map_err(fail)?;
    let data = shape.generate(u64::from(seed));
    to_json(&Generated {
        name: shape.name(),
        clusters: shape.clusters(),
        points: data.points().to_vec(),
        labels: data.label_codes().unwrap_or_default(),
    })
}

#[wasm_bindgen]
pub fn shape_names() -> String {
    Shape::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_micro() {
        let out = cluster(&[0.0, 1.0, 3.0], 1, 2, -1.0, 0).ok().unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["labels"], serde_json::json!([1, 2, 2]));
    }

    #[test]
    fn sparse_degrees_micro() {
        let out = sparse_degrees(&[0.0, 1.0, 3.0], 1, 0).ok().unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["sd"], serde_json::json!([4.0, 3.0, 5.0]));
    }

    #[test]
    fn generate_by_name() {
        let v: serde_json::Value = serde_json::from_str(&generate("donut3", 1).ok().unwrap()).unwrap();
        assert_eq!(v["clusters"], 3);
        assert_eq!(v["points"].as_array().unwrap().len(), 2 * 999);
        assert!(shape_names().contains("zelnik3"));
    }
}
