//! Predictors trained under unfair, unaware and counterfactual feature regimes.

mod linear;
mod mlp;
mod regime;

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::CausalError;
use crate::dataset::Task;
use crate::linalg::{mean, sample_std};
use crate::scm::ScmError;

pub use mlp::{loss_and_grad, MlpParams, Output};
pub use regime::{select_features, FeatureTable, Regime, RegimeKind, LATENT_FEATURE};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training needs at least 10 rows, got {0}")]
    TooFewRows(usize),
    #[error("classification target has a single class")]
    SingleClass,
    #[error("classification targets must be 0 or 1")]
    NonBinaryTarget,
    #[error("singular least-squares system")]
    Singular,
    #[error("{kind} models cannot be trained for {task}")]
    IncompatibleTask { kind: ModelKind, task: Task },
    #[error("feature columns {got:?} do not match the predictor's {expected:?}")]
    ColumnMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("{0} regime leaves no features")]
    EmptyFeatures(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("counterfactual level must be 1 or 2, got {0}")]
    BadLevel(u8),
    #[error("level-2 counterfactual regime needs a fitted latent model")]
    MissingLatent,
    #[error("no target column in the feature source")]
    NoTarget,
    #[error("invalid hyperparameters: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Graph(#[from] CausalError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("predictions file: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Logistic,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::Linear,
            hidden: 32,
            learning_rate: 1e-2,
            epochs: 2000,
            l2: 1e-4,
            seed: 42,
        }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModelKind::Mlp && (self.hidden == 0 || self.epochs == 0 || !(self.learning_rate > 0.0)) {
            return Err(ModelError::BadSpec("mlp needs positive width, epochs and learning rate".into()));
        }
        if !(self.l2 >= 0.0) {
            return Err(ModelError::BadSpec("l2 must be non-negative".into()));
        }
        Ok(())
    }

    pub fn supports(&self, task: Task) -> bool {
        !matches!(
            (self.kind, task),
            (ModelKind::Linear, Task::Classification) | (ModelKind::Logistic, Task::Regression)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Weights {
    Affine { intercept: f64, coef: Vec<f64> },
    Mlp {
        params: MlpParams,
        /// Regression targets are fitted standardized and mapped back.
        target_mean: f64,
        target_std: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub spec: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    pub task: Task,
    pub feature_names: Vec<String>,
    pub weights: Weights,
    #[serde(default)]
    pub diverged: bool,
}

fn check_targets(y: &[f64], task: Task) -> Result<()> {
    if task == Task::Classification {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(ModelError::NonBinaryTarget);
        }
        if y.iter().all(|&v| v == y[0]) {
            return Err(ModelError::SingleClass);
        }
    }
    Ok(())
}

/// Fits `spec` on `x`; classification targets must be 0/1.
pub fn train(spec: &ModelSpec, x: &FeatureTable, y: &[f64], task: Task) -> Result<Predictor> {
    spec.validate()?;
    let n = x.n_rows();
    if y.len() != n {
        return Err(ModelError::LengthMismatch { expected: n, got: y.len() });
    }
    if n < 10 {
        return Err(ModelError::TooFewRows(n));
    }
    if !spec.supports(task) {
        return Err(ModelError::IncompatibleTask { kind: spec.kind, task });
    }
    check_targets(y, task)?;
    let mut diverged = false;
    let weights = match spec.kind {
        ModelKind::Linear => {
            let (intercept, coef) = linear::fit_linear(&x.values, y)?;
            Weights::Affine { intercept, coef }
        }
        ModelKind::Logistic => {
            let (intercept, coef) = linear::fit_logistic(&x.values, y, spec.l2)?;
            Weights::Affine { intercept, coef }
        }
        ModelKind::Mlp => {
            let (target_mean, target_std, out) = match task {
                Task::Regression => {
                    let s = sample_std(y);
                    (mean(y), if s > 0.0 { s } else { 1.0 }, Output::Identity)
                }
                Task::Classification => (0.0, 1.0, Output::Sigmoid),
            };
            let ys: Vec<f64> = y.iter().map(|v| (v - target_mean) / target_std).collect();
            let fit = mlp::train_adam(&x.values, &ys, out, spec);
            if fit.diverged {
                log::warn!("mlp training diverged after {} epochs", fit.losses.len());
            }
            diverged = fit.diverged;
            Weights::Mlp {
                params: fit.params,
                target_mean,
                target_std,
            }
        }
    };
    Ok(Predictor {
        spec: spec.clone(),
        regime: None,
        task,
        feature_names: x.names.clone(),
        weights,
        diverged,
    })
}

impl Predictor {
    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = Some(regime);
        self
    }

    fn check_columns(&self, x: &FeatureTable) -> Result<()> {
        if x.names != self.feature_names {
            return Err(ModelError::ColumnMismatch {
                expected: self.feature_names.clone(),
                got: x.names.clone(),
            });
        }
        Ok(())
    }

    /// Real predictions for regression, probabilities for classification.
    pub fn predict(&self, x: &FeatureTable) -> Result<Vec<f64>> {
        self.check_columns(x)?;
        let logits: Vec<f64> = match &self.weights {
            Weights::Affine { intercept, coef } => x
                .values
                .row_iter()
                .map(|r| intercept + r.iter().zip(coef).map(|(a, b)| a * b).sum::<f64>())
                .collect(),
            Weights::Mlp {
                params,
                target_mean,
                target_std,
            } => params
                .logits(&x.values)
                .iter()
                .map(|v| v * target_std + target_mean)
                .collect(),
        };
        Ok(match self.task {
            Task::Classification => logits.into_iter().map(linear::sigmoid).collect(),
            Task::Regression => logits,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("predictor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ModelError::Io(e.to_string()))
    }
}

pub fn predict(p: &Predictor, x: &FeatureTable) -> Result<Vec<f64>> {
    p.predict(x)
}

/// Max relative error of the MLP gradient against central differences (h = 1e-5).
pub fn grad_check(spec: &ModelSpec, x: &DMatrix<f64>, y: &[f64], task: Task) -> f64 {
    grad_check_with_step(spec, x, y, task, 1e-5)
}

pub fn grad_check_with_step(spec: &ModelSpec, x: &DMatrix<f64>, y: &[f64], task: Task, step: f64) -> f64 {
    let params = MlpParams::init(x.ncols(), spec.hidden, spec.seed);
    let out = match task {
        Task::Regression => Output::Identity,
        Task::Classification => Output::Sigmoid,
    };
    mlp::max_relative_gradient_error(&params, x, y, out, spec.l2, step)
}

/// Writes `row_id,score` lines.
pub fn write_predictions(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| ModelError::Io(e.to_string()))?;
    w.write_record(["row_id", "score"]).map_err(|e| ModelError::Io(e.to_string()))?;
    for (i, s) in scores.iter().enumerate() {
        w.write_record([i.to_string(), format!("{s:?}")])
            .map_err(|e| ModelError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| ModelError::Io(e.to_string()))
}

/// Reads a `row_id,score` file; row ids must cover `0..n` exactly once.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path.as_ref()).map_err(|e| ModelError::Io(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| ModelError::Io(e.to_string()))?;
        let id: usize = rec
            .get(0)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| ModelError::Io(format!("bad row_id in {rec:?}")))?;
        let score: f64 = rec
            .get(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| ModelError::Io(format!("bad score in {rec:?}")))?;
        rows.push((id, score));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(ModelError::Io("row ids must be 0..n without gaps or repeats".into()));
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}
