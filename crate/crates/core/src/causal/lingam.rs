//! DirectLiNGAM with the pairwise likelihood-ratio exogeneity measure.
//!
//! Each round standardizes the remaining variables, scores every candidate by
//! how consistently it looks like the cause in pairwise entropy comparisons,
//! takes the best one as the next variable in the causal order, and regresses
//! it out of the rest. Final weights are ordinary least squares of each
//! variable on all of its predecessors in the order.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CausalError, Edge, Result, WeightedDag};
use crate::dataset::EncodedMatrix;
use crate::linalg::{lstsq, with_intercept};

// Maximum-entropy negentropy approximation constants.
const K1: f64 = 79.047;
const K2: f64 = 7.4129;
const GAMMA: f64 = 0.37457;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryDiagnostics {
    /// Column indices of the input matrix, most exogenous first.
    pub causal_order: Vec<usize>,
    /// `raw_weights[child][parent]`, before any thresholding.
    pub raw_weights: Vec<Vec<f64>>,
    /// Threshold applied downstream (0 straight out of discovery).
    pub threshold: f64,
}

impl DiscoveryDiagnostics {
    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.threshold = tau;
        self
    }

    /// True when `raw_weights` permuted by `causal_order` is strictly lower triangular.
    pub fn is_lower_triangular_in_order(&self) -> bool {
        let p = self.causal_order.len();
        (0..p).all(|a| {
            (a..p).all(|b| self.raw_weights[self.causal_order[a]][self.causal_order[b]] == 0.0)
        })
    }
}

fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, v)
}

fn standardized(x: &[f64]) -> Vec<f64> {
    let (m, v) = moments(x);
    let s = v.sqrt();
    x.iter().map(|v| (v - m) / s).collect()
}

fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Negentropy-based differential entropy approximation of a unit-variance sample.
fn entropy(u: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = u.clone().count() as f64;
    let lc = u.clone().map(log_cosh).sum::<f64>() / n;
    let g = u.map(|v| v * (-0.5 * v * v).exp()).sum::<f64>() / n;
    (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0 - K1 * (lc - GAMMA).powi(2) - K2 * g * g
}

/// Likelihood-ratio statistic for "i causes j" between standardized columns;
/// negative values count against i being exogenous.
fn diff_mutual_info(xi: &[f64], xj: &[f64], h_i: f64, h_j: f64) -> Option<f64> {
    let n = xi.len() as f64;
    let rho = xi.iter().zip(xj).map(|(a, b)| a * b).sum::<f64>() / n;
    let resid_sd = (1.0 - rho * rho).sqrt();
    if !(resid_sd > 1e-12) {
        return None;
    }
    let ri_j = xi.iter().zip(xj).map(move |(a, b)| (a - rho * b) / resid_sd);
    let rj_i = xj.iter().zip(xi).map(move |(b, a)| (b - rho * a) / resid_sd);
    Some((h_j + entropy(ri_j)) - (h_i + entropy(rj_i)))
}

/// Index (into `remaining`) of the most exogenous variable.
fn most_exogenous(cols: &[Vec<f64>], remaining: &[usize]) -> usize {
    let std_cols: Vec<Vec<f64>> = remaining.iter().map(|&k| standardized(&cols[k])).collect();
    let h: Vec<f64> = std_cols.iter().map(|c| entropy(c.iter().copied())).collect();
    let scores: Vec<f64> = (0..remaining.len())
        .into_par_iter()
        .map(|a| {
            let mut m = 0.0;
            for b in 0..remaining.len() {
                if a == b {
                    continue;
                }
                if let Some(d) = diff_mutual_info(&std_cols[a], &std_cols[b], h[a], h[b]) {
                    m += d.min(0.0).powi(2);
                }
            }
            -m
        })
        .collect();
    let mut best = 0;
    for (a, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = a;
        }
    }
    best
}

/// Residual of `x` after simple regression on `on`.
fn regress_out(x: &mut [f64], on: &[f64]) {
    let (mx, _) = moments(x);
    let (mo, vo) = moments(on);
    let n = x.len() as f64;
    let cov = x.iter().zip(on).map(|(a, b)| (a - mx) * (b - mo)).sum::<f64>() / n;
    let beta = cov / vo;
    for (a, b) in x.iter_mut().zip(on) {
        *a -= beta * b;
    }
}

/// Estimates a full (unthresholded) weighted DAG from `x`.
pub fn direct_lingam(x: &EncodedMatrix) -> Result<(WeightedDag, DiscoveryDiagnostics)> {
    let (n, p) = x.values.shape();
    if p < 2 {
        return Err(CausalError::TooFewVariables(p));
    }
    if n <= p {
        return Err(CausalError::TooFewRows { n, p });
    }
    let names = x.names();
    let original: Vec<Vec<f64>> = (0..p)
        .map(|j| x.values.column(j).iter().copied().collect())
        .collect();
    for (j, c) in original.iter().enumerate() {
        if !(moments(c).1 > 0.0) {
            return Err(CausalError::ConstantColumn(names[j].to_string()));
        }
    }

    let mut work = original.clone();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut order = Vec::with_capacity(p);
    while remaining.len() > 1 {
        let m = remaining.remove(most_exogenous(&work, &remaining));
        let cause = work[m].clone();
        order.push(m);
        for &k in &remaining {
            regress_out(&mut work[k], &cause);
            if moments(&work[k]).1 <= 1e-20 * moments(&original[k]).1 {
                return Err(CausalError::RankDeficient {
                    target: names[k].to_string(),
                    predictors: order.iter().map(|&o| names[o].to_string()).collect(),
                });
            }
        }
    }
    order.push(remaining[0]);

    let mut raw = vec![vec![0.0; p]; p];
    for (pos, &child) in order.iter().enumerate().skip(1) {
        let preds = &order[..pos];
        let design = with_intercept(&DMatrix::from_fn(n, preds.len(), |i, k| original[preds[k]][i]));
        let y = DVector::from_column_slice(&original[child]);
        let beta = lstsq(&design, &y).ok_or_else(|| CausalError::RankDeficient {
            target: names[child].to_string(),
            predictors: preds.iter().map(|&k| names[k].to_string()).collect(),
        })?;
        for (k, &parent) in preds.iter().enumerate() {
            raw[child][parent] = beta[k + 1];
        }
    }

    let node_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let mut edges = Vec::new();
    for child in 0..p {
        for parent in 0..p {
            if raw[child][parent] != 0.0 {
                edges.push(Edge {
                    from: node_names[parent].clone(),
                    to: node_names[child].clone(),
                    weight: raw[child][parent],
                });
            }
        }
    }
    let order_names = order.iter().map(|&k| node_names[k].clone()).collect();
    let dag = WeightedDag::with_order(node_names, edges, order_names)?;
    Ok((
        dag,
        DiscoveryDiagnostics {
            causal_order: order,
            raw_weights: raw,
            threshold: 0.0,
        },
    ))
}
