//! Linear structural causal models and point counterfactuals.
//!
//! Instances passed to [`Scm`] methods are slices aligned with
//! `scm.graph().nodes()`. Counterfactuals follow abduction (recover each
//! node's residual), action (overwrite the intervened node and cut its
//! equation) and prediction (re-evaluate its descendants in topological order
//! with the stored residuals).

mod latent;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::{CausalError, Edge, WeightedDag};
use crate::dataset::EncodedMatrix;
use crate::linalg::{lstsq, with_intercept};

pub use latent::{fit_latent_scm, LatentScm};

#[derive(Debug, Error)]
pub enum ScmError {
    #[error(transparent)]
    Graph(#[from] CausalError),
    #[error("node `{0}` has no column in the data")]
    MissingColumn(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("instance has {got} values, model has {expected} nodes")]
    MissingValue { expected: usize, got: usize },
    #[error("no value for `{0}`")]
    MissingNamedValue(String),
    #[error("rank-deficient parent set {parents:?} for `{node}`")]
    RankDeficient { node: String, parents: Vec<String> },
    #[error("{n} rows cannot fit a parent set of size {parents}")]
    TooFewRows { n: usize, parents: usize },
    #[error("equation for `{0}` does not match its parent set")]
    EquationMismatch(String),
    #[error("latent model needs at least 2 outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("`{0}` is both an outcome and a sensitive attribute")]
    OutcomeSensitiveOverlap(String),
    #[error("outcome `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("`{0}` is not an outcome of the latent model")]
    UnknownOutcome(String),
    #[error("no observed outcomes given")]
    NoObserved,
    #[error("model json: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, ScmError>;

/// Anything that can supply a value by variable name.
pub trait ValueLookup {
    fn value(&self, name: &str) -> Option<f64>;
}

impl ValueLookup for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl ValueLookup for HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

/// One row of an encoded matrix, looked up by column name.
pub struct MatrixRow<'a> {
    pub matrix: &'a EncodedMatrix,
    pub row: usize,
}

impl ValueLookup for MatrixRow<'_> {
    fn value(&self, name: &str) -> Option<f64> {
        self.matrix
            .index_of(name)
            .map(|j| self.matrix.values[(self.row, j)])
    }
}

/// `node = intercept + sum(coef[parent] * parent) + u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub intercept: f64,
    pub coef: BTreeMap<String, f64>,
}

/// Per-node residuals recovered from one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector(pub Vec<f64>);

/// Set `node` to `value` (encoded scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub node: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Compiled {
    intercept: f64,
    parents: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    graph: WeightedDag,
    equations: BTreeMap<String, Equation>,
    noise_scale: BTreeMap<String, f64>,
    compiled: Vec<Option<Compiled>>,
    topo: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct ScmJson {
    graph: GraphJson,
    equations: BTreeMap<String, Equation>,
    noise: BTreeMap<String, f64>,
}

impl Scm {
    /// Assembles a model, checking that every equation uses exactly its node's parents.
    pub fn from_parts(
        graph: WeightedDag,
        equations: BTreeMap<String, Equation>,
        noise_scale: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let mut compiled = Vec::with_capacity(graph.nodes().len());
        for node in graph.nodes() {
            let parents: BTreeSet<&str> = graph.parents(node).into_iter().map(|(p, _)| p).collect();
            match equations.get(node) {
                None if parents.is_empty() => compiled.push(None),
                Some(eq) if eq.coef.keys().map(String::as_str).collect::<BTreeSet<_>>() == parents => {
                    compiled.push(Some(Compiled {
                        intercept: eq.intercept,
                        parents: eq
                            .coef
                            .iter()
                            .map(|(p, &w)| (graph.index_of(p).unwrap(), w))
                            .collect(),
                    }))
                }
                _ => return Err(ScmError::EquationMismatch(node.clone())),
            }
        }
        if let Some(bad) = equations.keys().find(|k| !graph.contains(k)) {
            return Err(ScmError::UnknownNode(bad.clone()));
        }
        if noise_scale.values().any(|s| !(*s >= 0.0)) {
            return Err(ScmError::Format("negative noise scale".into()));
        }
        let topo = graph
            .topological_order()?
            .iter()
            .map(|n| graph.index_of(n).unwrap())
            .collect();
        Ok(Scm {
            graph,
            equations,
            noise_scale,
            compiled,
            topo,
        })
    }

    pub fn graph(&self) -> &WeightedDag {
        &self.graph
    }

    pub fn equations(&self) -> &BTreeMap<String, Equation> {
        &self.equations
    }

    pub fn noise_scale(&self) -> &BTreeMap<String, f64> {
        &self.noise_scale
    }

    fn eval(&self, node: usize, x: &[f64]) -> Option<f64> {
        self.compiled[node]
            .as_ref()
            .map(|c| c.intercept + c.parents.iter().map(|&(p, w)| w * x[p]).sum::<f64>())
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        let expected = self.graph.nodes().len();
        if x.len() != expected {
            return Err(ScmError::MissingValue {
                expected,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Residual of each node; roots carry their own value.
    pub fn abduct(&self, x: &[f64]) -> Result<NoiseVector> {
        self.check_len(x)?;
        Ok(NoiseVector(
            (0..x.len())
                .map(|i| match self.eval(i, x) {
                    Some(fitted) => x[i] - fitted,
                    None => x[i],
                })
                .collect(),
        ))
    }

    /// Forward pass from residuals.
    pub fn predict_from_noise(&self, u: &NoiseVector) -> Result<Vec<f64>> {
        self.check_len(&u.0)?;
        let mut x = vec![0.0; u.0.len()];
        for &i in &self.topo {
            x[i] = self.eval(i, &x).unwrap_or(0.0) + u.0[i];
        }
        Ok(x)
    }

    /// Point counterfactual of `x` under `iv`. Non-descendants of the
    /// intervened node are returned bit-for-bit.
    pub fn counterfactual(&self, x: &[f64], iv: &Intervention) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let target = self
            .graph
            .index_of(&iv.node)
            .ok_or_else(|| ScmError::UnknownNode(iv.node.clone()))?;
        if x[target] == iv.value {
            return Ok(x.to_vec());
        }
        let u = self.abduct(x)?;
        let desc = self.graph.descendants(&iv.node)?;
        let mut out = x.to_vec();
        out[target] = iv.value;
        for &i in &self.topo {
            if desc.contains(&self.graph.nodes()[i]) {
                out[i] = self.eval(i, &out).expect("descendant has parents") + u.0[i];
            }
        }
        Ok(out)
    }

    /// Column index in `data` for every node, in node order.
    pub fn node_columns(&self, data: &EncodedMatrix) -> Result<Vec<usize>> {
        self.graph
            .nodes()
            .iter()
            .map(|n| data.index_of(n).ok_or_else(|| ScmError::MissingColumn(n.clone())))
            .collect()
    }

    /// Counterfactual of a full encoded row; columns outside the graph are copied.
    pub fn counterfactual_row(&self, row: &[f64], cols: &[usize], iv: &Intervention) -> Result<Vec<f64>> {
        let x: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
        let cf = self.counterfactual(&x, iv)?;
        let mut out = row.to_vec();
        for (k, &j) in cols.iter().enumerate() {
            out[j] = cf[k];
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let file = ScmJson {
            graph: GraphJson {
                nodes: self.graph.nodes().to_vec(),
                edges: self.graph.edges().to_vec(),
            },
            equations: self.equations.clone(),
            noise: self.noise_scale.clone(),
        };
        serde_json::to_string_pretty(&file).expect("scm serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScmJson = serde_json::from_str(text).map_err(|e| ScmError::Format(e.to_string()))?;
        let graph = WeightedDag::new(file.graph.nodes, file.graph.edges)?;
        Scm::from_parts(graph, file.equations, file.noise)
    }
}

/// Fits each non-root node by least squares on its parents in `dag`.
pub fn fit_scm(dag: &WeightedDag, data: &EncodedMatrix) -> Result<Scm> {
    let n = data.n_rows();
    let col = |name: &str| -> Result<Vec<f64>> {
        data.column_values(name)
            .ok_or_else(|| ScmError::MissingColumn(name.to_string()))
    };
    let max_parents = dag
        .nodes()
        .iter()
        .map(|v| dag.parents(v).len())
        .max()
        .unwrap_or(0);
    if n <= max_parents + 1 {
        return Err(ScmError::TooFewRows {
            n,
            parents: max_parents,
        });
    }
    let mut equations = BTreeMap::new();
    let mut noise = BTreeMap::new();
    for node in dag.nodes() {
        let y = col(node)?;
        let parents: Vec<&str> = dag.parents(node).into_iter().map(|(p, _)| p).collect();
        if parents.is_empty() {
            let m = y.iter().sum::<f64>() / n as f64;
            let var = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            noise.insert(node.clone(), var.sqrt());
            continue;
        }
        let pcols = parents.iter().map(|p| col(p)).collect::<Result<Vec<_>>>()?;
        let design = with_intercept(&DMatrix::from_fn(n, parents.len(), |i, k| pcols[k][i]));
        let beta = lstsq(&design, &DVector::from_column_slice(&y)).ok_or_else(|| ScmError::RankDeficient {
            node: node.clone(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
        })?;
        let fitted = &design * &beta;
        let ssr: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        noise.insert(node.clone(), (ssr / n as f64).sqrt());
        equations.insert(
            node.clone(),
            Equation {
                intercept: beta[0],
                coef: parents
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (p.to_string(), beta[k + 1]))
                    .collect(),
            },
        );
    }
    Scm::from_parts(dag.clone(), equations, noise)
}
