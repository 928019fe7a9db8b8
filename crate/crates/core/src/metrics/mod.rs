//! Fairness and performance metrics over predictions.

mod density;
mod distance;
mod roc;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Task;
use crate::models::{FeatureTable, ModelError, Predictor};

pub use density::{kde, kde_with_bandwidth, linspace, madd, regression_grid, silverman_bandwidth, KdeCurve, MADD_GRID};
pub use distance::{median_heuristic, mmd_rbf, wasserstein1};
pub use roc::{abroca, auroc, roc_curve};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty group")]
    EmptyGroup,
    #[error("a group has a single class")]
    SingleClass,
    #[error("length mismatch ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("grid must be strictly ascending and bandwidth positive")]
    BadGrid,
    #[error("scores must lie in [0, 1]")]
    OutOfRange,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Predictions partitioned by one sensitive attribute's two values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSplit {
    pub attribute: String,
    pub value_a: String,
    pub value_b: String,
    pub group_a: Vec<f64>,
    pub group_b: Vec<f64>,
}

impl SampleSplit {
    pub fn new(attribute: &str, value_a: &str, value_b: &str, group_a: Vec<f64>, group_b: Vec<f64>) -> Result<Self> {
        if group_a.is_empty() || group_b.is_empty() {
            return Err(MetricsError::EmptyGroup);
        }
        Ok(SampleSplit {
            attribute: attribute.to_string(),
            value_a: value_a.to_string(),
            value_b: value_b.to_string(),
            group_a,
            group_b,
        })
    }

    pub fn label(&self) -> String {
        format!("{}_{}_vs_{}", self.attribute, self.value_a, self.value_b)
    }

    pub fn wasserstein1(&self) -> Result<f64> {
        wasserstein1(&self.group_a, &self.group_b)
    }

    pub fn mmd_rbf(&self) -> Result<f64> {
        mmd_rbf(&self.group_a, &self.group_b)
    }
}

/// Per-pair absolute prediction change between factual and counterfactual rows.
pub fn cf_deltas(p: &Predictor, factual: &FeatureTable, counterfactual: &FeatureTable) -> Result<Vec<f64>> {
    if factual.n_rows() != counterfactual.n_rows() {
        return Err(MetricsError::LengthMismatch {
            a: factual.n_rows(),
            b: counterfactual.n_rows(),
        });
    }
    let a = p.predict(factual)?;
    let b = p.predict(counterfactual)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect())
}

/// Mean absolute prediction change under the counterfactual.
pub fn cf_consistency(p: &Predictor, factual: &FeatureTable, counterfactual: &FeatureTable) -> Result<f64> {
    let d = cf_deltas(p, factual, counterfactual)?;
    if d.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// `{mse, rmse}` for regression, `{accuracy, auroc}` for classification
/// (accuracy thresholds scores at 0.5).
pub fn performance(preds: &[f64], truth: &[f64], task: Task) -> Result<BTreeMap<String, f64>> {
    if preds.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            a: preds.len(),
            b: truth.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let n = preds.len() as f64;
    let mut out = BTreeMap::new();
    match task {
        Task::Regression => {
            let mse = preds.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n;
            out.insert("mse".to_string(), mse);
            out.insert("rmse".to_string(), mse.sqrt());
        }
        Task::Classification => {
            let labels: Vec<bool> = truth.iter().map(|&t| t >= 0.5).collect();
            let hits = preds.iter().zip(&labels).filter(|(p, l)| (**p >= 0.5) == **l).count();
            out.insert("accuracy".to_string(), hits as f64 / n);
            out.insert("auroc".to_string(), auroc(preds, &labels)?);
        }
    }
    Ok(out)
}
