//! Serializable artifacts: result document, credal partition records,
//! stage dumps and label files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GfdcError, Result};
use crate::fusion::{FusionPath, SampleGroup};
use crate::granulation::Granule;
use crate::metrics::Scores;
use crate::pipeline::{Fit, StageTimings};

pub const SCHEMA_VERSION: u32 = 1;

/// One sample of the credal partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalRecord {
    pub index: usize,
    pub masses: Vec<f64>,
    pub omega: f64,
    /// 1-based cluster, or -1 for an outlier.
    pub label: i64,
    pub outlier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub path: FusionPath,
    pub granules: usize,
    pub granule_clusters: usize,
    pub granule_flocks: usize,
    pub refinement_rounds: Vec<usize>,
    pub singleton_fallback: bool,
    pub final_flocks: usize,
    pub stable: usize,
    pub unstable: usize,
    pub assignment_order: Vec<usize>,
}

/// Member sets of every intermediate structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDump {
    pub granules: Vec<GranuleRecord>,
    pub granule_clusters: Vec<Vec<usize>>,
    pub granule_flocks: Vec<Vec<usize>>,
    pub final_flocks: Vec<Vec<usize>>,
    pub initial_clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranuleRecord {
    pub center: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingsMs {
    pub distances: f64,
    pub density: f64,
    pub fusion: f64,
    pub evidence: f64,
    pub total: f64,
}

impl From<StageTimings> for TimingsMs {
    fn from(t: StageTimings) -> Self {
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        TimingsMs {
            distances: ms(t.distances),
            density: ms(t.density),
            fusion: ms(t.fusion),
            evidence: ms(t.evidence),
            total: ms(t.total()),
        }
    }
}

/// The result document written by `gfdc run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub n: usize,
    pub dim: usize,
    pub clusters: usize,
    pub k: usize,
    pub tau: Option<f64>,
    pub standardized: bool,
    pub labels: Vec<i64>,
    pub outliers: Vec<usize>,
    pub partition: Vec<CredalRecord>,
    pub stages: StageSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<StageDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<TimingsMs>,
}

fn member_sets(groups: &[SampleGroup]) -> Vec<Vec<usize>> {
    groups.iter().map(|g| g.members.clone()).collect()
}

fn granule_records(granules: &[Granule]) -> Vec<GranuleRecord> {
    granules.iter().map(|g| GranuleRecord { center: g.center, members: g.members.clone() }).collect()
}

pub fn credal_records(fit: &Fit) -> Vec<CredalRecord> {
    let r = &fit.result;
    r.masses
        .iter()
        .zip(&r.labels)
        .enumerate()
        .map(|(index, (m, l))| CredalRecord {
            index,
            masses: m.singletons.clone(),
            omega: m.omega,
            label: l.code(),
            outlier: l.code() < 0,
        })
        .collect()
}

pub fn stage_dump(fit: &Fit) -> StageDump {
    let t = &fit.fusion.trace;
    StageDump {
        granules: granule_records(&t.granules),
        granule_clusters: member_sets(&t.granule_clusters),
        granule_flocks: member_sets(&t.granule_flocks),
        final_flocks: member_sets(&t.final_flocks),
        initial_clusters: fit.fusion.initial.clusters.clone(),
    }
}

impl ResultDocument {
    pub fn new(fit: &Fit, dim: usize, standardized: bool) -> Self {
        let t = &fit.fusion.trace;
        let init = &fit.fusion.initial;
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            n: fit.table.len(),
            dim,
            clusters: init.c,
            k: fit.k,
            tau: fit.result.outlier_threshold,
            standardized,
            labels: fit.result.label_codes(),
            outliers: fit.result.outliers(),
            partition: credal_records(fit),
            stages: StageSummary {
                path: t.path,
                granules: t.granules.len(),
                granule_clusters: t.granule_clusters.len(),
                granule_flocks: t.granule_flocks.len(),
                refinement_rounds: t.refinement_rounds.clone(),
                singleton_fallback: t.singleton_fallback,
                final_flocks: t.final_flocks.len(),
                stable: init.stable_count(),
                unstable: init.unstable.len(),
                assignment_order: fit.result.assignment_order.clone(),
            },
            scores: None,
            dump: None,
            timings_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }
}

/// One integer per line.
pub fn format_labels(labels: &[i64]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{l}").expect("writing to a String cannot fail");
    }
    out
}

/// Reads either a label file (one integer per line, blank lines ignored)
/// or a result document, whose `labels` field is used.
pub fn parse_labels(text: &str) -> Result<Vec<i64>> {
    if text.trim_start().starts_with('{') {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GfdcError::InvalidInput(format!("bad result JSON: {e}")))?;
        let labels = doc
            .get("labels")
            .and_then(|v| v.as_array())
            .ok_or_else(|| GfdcError::InvalidInput("result JSON has no \"labels\" array".into()))?;
        return labels
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_i64().ok_or_else(|| GfdcError::Parse {
                    row: i + 1,
                    column: 1,
                    message: format!("label {v} is not an integer"),
                })
            })
            .collect();
    }
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<i64>().map_err(|_| GfdcError::Parse {
            row: i + 1,
            column: 1,
            message: format!("{line:?} is not an integer label"),
        })?;
        labels.push(v);
    }
    if labels.is_empty() {
        return Err(GfdcError::InvalidInput("no labels found".into()));
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::pipeline::Gfdc;

    #[test]
    fn labels_round_trip() {
        let labels = vec![1, 2, -1, 2];
        assert_eq!(parse_labels(&format_labels(&labels)).unwrap(), labels);
        assert!(parse_labels("1\nx\n").is_err());
        assert!(parse_labels("\n\n").is_err());
    }

    #[test]
    fn document_round_trip() {
        let ds = Dataset::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let fit = Gfdc::new(2).fit(&ds).unwrap();
        let mut doc = ResultDocument::new(&fit, 1, false);
        doc.dump = Some(stage_dump(&fit));
        let json = doc.to_json();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(!json.contains("timings_ms"));
        let back: ResultDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(parse_labels(&json).unwrap(), doc.labels);
        assert_eq!(doc.partition[0].masses, vec![1.0, 0.0]);
    }
}
