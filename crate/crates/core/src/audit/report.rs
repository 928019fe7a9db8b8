use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::svg::render_kde_svg;
use super::{AuditConfig, AuditError};
use crate::causal::{Edge, WeightedDag};
use crate::metrics::KdeCurve;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: Option<f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl MetricValue {
    pub fn ok(v: f64) -> Self {
        MetricValue {
            value: Some(v),
            status: Status::Ok,
            reason: None,
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        MetricValue {
            value: None,
            status: Status::Skipped,
            reason: Some(reason.into()),
        }
    }
}

/// Metrics for one pair of sensitive-attribute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub attribute: String,
    pub value_a: String,
    pub value_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub wd: f64,
    pub mmd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abroca: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub madd: Option<MetricValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub regime: String,
    pub model: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub features: Vec<String>,
    pub metrics: BTreeMap<String, MetricValue>,
    pub pairs: BTreeMap<String, PairMetrics>,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub name: String,
    pub recipe: String,
    pub task: String,
    pub target: String,
    pub sensitives: Vec<String>,
    /// Rows read from the file (after dropping rows with missing values).
    pub n_loaded: usize,
    pub dropped_missing: usize,
    /// Rows after the recipe's filters.
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub group_frequencies: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub source: String,
    pub threshold: f64,
    pub nodes: Vec<String>,
    pub order: Vec<String>,
    pub excluded_constant: Vec<String>,
    pub edges_total: usize,
    pub edges_kept: usize,
    pub edges_pruned: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSummary {
    pub outcomes: Vec<String>,
    pub sensitives: Vec<String>,
    pub observed_at_prediction: Vec<String>,
    pub loadings: BTreeMap<String, f64>,
    pub noise_var: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub level: u8,
    pub excluded: Vec<String>,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineEntry {
    pub wd: Option<f64>,
    pub mmd: Option<f64>,
    pub wd_pair: Option<String>,
    pub mmd_pair: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub model: Option<String>,
    pub regimes: BTreeMap<String, HeadlineEntry>,
}

/// A KDE figure: one curve per sensitive value.
#[derive(Debug, Clone, PartialEq)]
pub struct KdePlot {
    pub file_name: String,
    pub title: String,
    pub curves: Vec<(String, KdeCurve)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    pub schema_version: String,
    pub config: AuditConfig,
    pub dataset: DatasetStats,
    pub graph: GraphSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latent: Option<LatentSummary>,
    pub regimes: BTreeMap<String, RegimeSummary>,
    pub cells: Vec<CellReport>,
    pub headline: Headline,
    pub kde_files: Vec<String>,
    pub notes: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub dag: WeightedDag,
    #[serde(skip)]
    pub plots: Vec<KdePlot>,
}

impl FairnessReport {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn cell(&self, regime: &str, model: &str) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.regime == regime && c.model == model)
    }

    pub fn metric(&self, regime: &str, model: &str, metric: &str) -> Option<f64> {
        self.cell(regime, model)?.metrics.get(metric)?.value
    }

    /// One row per regime x model x metric.
    pub fn tables_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["dataset", "regime", "model", "metric", "value", "status", "reason"])
            .expect("in-memory write");
        for c in &self.cells {
            for (name, m) in &c.metrics {
                let value = m.value.map(|v| format!("{v:?}")).unwrap_or_default();
                let status = match m.status {
                    Status::Ok => "ok",
                    Status::Skipped => "skipped",
                };
                w.write_record([
                    self.dataset.name.as_str(),
                    &c.regime,
                    &c.model,
                    name,
                    &value,
                    status,
                    m.reason.as_deref().unwrap_or(""),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Writes report.json, tables.csv, dag.dot, dag.json and the KDE figures to `dir`.
pub fn emit_report(r: &FairnessReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, AuditError> {
    let dir = dir.as_ref();
    let io = |e: std::io::Error| AuditError::stage("audit/emit_report", format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let shaded: Vec<&str> = r.dataset.sensitives.iter().map(String::as_str).collect();
    let mut files = vec![
        ("report.json".to_string(), r.to_json()),
        ("tables.csv".to_string(), r.tables_csv()),
        ("dag.dot".to_string(), r.dag.to_dot(&shaded)),
        ("dag.json".to_string(), {
            let mut s = r.dag.to_json();
            s.push('\n');
            s
        }),
    ];
    for p in &r.plots {
        let curves: Vec<(String, &KdeCurve)> = p.curves.iter().map(|(l, c)| (l.clone(), c)).collect();
        files.push((p.file_name.clone(), render_kde_svg(&p.title, &curves)?));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(&name);
        std::fs::write(&path, body).map_err(io)?;
        written.push(path);
    }
    Ok(written)
}

/// File-name-safe slug.
pub(crate) fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() || ch == '-' {
            out.push(ch);
        } else {
            out.push('_');
        }
    }
    out
}

pub(crate) fn pair_key(attr: &str, a: &str, b: &str) -> String {
    format!("{attr}:{a}|{b}")
}
