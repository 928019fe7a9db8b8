//! One-factor linear-Gaussian model fitted by EM:
//! `y_j = b_j + lambda_j * K + sum_s beta_js * s + e_j`, `K ~ N(0, 1)`, `e_j ~ N(0, psi_j)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{Result, ScmError, ValueLookup};
use crate::dataset::EncodedMatrix;
use crate::linalg::{lstsq, with_intercept};

const MAX_ITER: usize = 500;
const REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentScm {
    pub latent_name: String,
    pub outcomes: Vec<String>,
    pub sensitives: Vec<String>,
    pub intercepts: Vec<f64>,
    pub loadings: Vec<f64>,
    /// `sensitive_coef[outcome][sensitive]`.
    pub sensitive_coef: Vec<Vec<f64>>,
    pub noise_var: Vec<f64>,
    /// Log-likelihood before the first update and after every iteration.
    pub trace: Vec<f64>,
    pub converged: bool,
}

struct Params {
    b: Vec<f64>,
    lambda: Vec<f64>,
    beta: Vec<Vec<f64>>,
    psi: Vec<f64>,
}

impl Params {
    fn residual(&self, y: &DMatrix<f64>, s: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        y[(i, j)] - self.b[j] - (0..s.ncols()).map(|k| self.beta[j][k] * s[(i, k)]).sum::<f64>()
    }

    /// Posterior precision and per-outcome weights `lambda_j / psi_j`.
    fn posterior_weights(&self) -> (f64, Vec<f64>) {
        let a: Vec<f64> = self.lambda.iter().zip(&self.psi).map(|(l, p)| l / p).collect();
        let prec = 1.0 + self.lambda.iter().zip(&a).map(|(l, a)| l * a).sum::<f64>();
        (prec, a)
    }

    fn log_likelihood(&self, y: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
        let (n, m) = y.shape();
        let (prec, a) = self.posterior_weights();
        let log_det = self.psi.iter().map(|p| p.ln()).sum::<f64>() + prec.ln();
        let mut quad = 0.0;
        for i in 0..n {
            let mut diag = 0.0;
            let mut proj = 0.0;
            for j in 0..m {
                let r = self.residual(y, s, i, j);
                diag += r * r / self.psi[j];
                proj += a[j] * r;
            }
            quad += diag - proj * proj / prec;
        }
        -0.5 * (n as f64 * (m as f64 * (2.0 * std::f64::consts::PI).ln() + log_det) + quad)
    }
}

fn columns(data: &EncodedMatrix, names: &[String]) -> Result<DMatrix<f64>> {
    let idx = names
        .iter()
        .map(|n| data.index_of(n).ok_or_else(|| ScmError::MissingColumn(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(data.values.select_columns(&idx))
}

/// Fits the one-factor model on `outcomes` given `sensitives`.
pub fn fit_latent_scm(data: &EncodedMatrix, outcomes: &[&str], sensitives: &[&str]) -> Result<LatentScm> {
    if outcomes.len() < 2 {
        return Err(ScmError::TooFewOutcomes(outcomes.len()));
    }
    if let Some(o) = outcomes.iter().find(|o| sensitives.contains(o)) {
        return Err(ScmError::OutcomeSensitiveOverlap(o.to_string()));
    }
    let outcomes: Vec<String> = outcomes.iter().map(|s| s.to_string()).collect();
    let sensitives: Vec<String> = sensitives.iter().map(|s| s.to_string()).collect();
    let y = columns(data, &outcomes)?;
    let s = columns(data, &sensitives)?;
    let (n, m) = y.shape();
    let q = s.ncols();
    if n <= q + 2 {
        return Err(ScmError::TooFewRows { n, parents: q + 1 });
    }

    // start from the per-outcome regression on the sensitives and the
    // leading principal direction of its residual covariance
    let design = with_intercept(&s);
    let mut b = vec![0.0; m];
    let mut beta = vec![vec![0.0; q]; m];
    let mut resid = DMatrix::zeros(n, m);
    for j in 0..m {
        let yj = y.column(j).into_owned();
        let mean = yj.mean();
        if !(yj.iter().map(|v| (v - mean).powi(2)).sum::<f64>() > 0.0) {
            return Err(ScmError::ZeroVariance(outcomes[j].clone()));
        }
        let coef = lstsq(&design, &yj).ok_or_else(|| ScmError::RankDeficient {
            node: outcomes[j].clone(),
            parents: sensitives.clone(),
        })?;
        b[j] = coef[0];
        for k in 0..q {
            beta[j][k] = coef[k + 1];
        }
        resid.set_column(j, &(&yj - &design * &coef));
    }
    let cov = resid.transpose() * &resid / n as f64;
    let eig = SymmetricEigen::new(cov.clone());
    let top = eig.eigenvalues.imax();
    let scale = (eig.eigenvalues[top].max(0.0) / 2.0).sqrt();
    let lambda: Vec<f64> = eig.eigenvectors.column(top).iter().map(|v| v * scale).collect();
    let psi = (0..m)
        .map(|j| (cov[(j, j)] - lambda[j] * lambda[j]).max(0.1 * cov[(j, j)]))
        .collect();
    let mut p = Params { b, lambda, beta, psi };

    let d = q + 2;
    let mut trace = vec![p.log_likelihood(&y, &s)];
    let mut converged = false;
    for _ in 0..MAX_ITER {
        // E-step: K | y_i ~ N(mu_i, v)
        let (prec, a) = p.posterior_weights();
        let v = 1.0 / prec;
        let mu: Vec<f64> = (0..n)
            .map(|i| v * (0..m).map(|j| a[j] * p.residual(&y, &s, i, j)).sum::<f64>())
            .collect();

        // M-step: regress on E[z] = (1, K, s) with the E[K^2] correction
        let z = DMatrix::from_fn(n, d, |i, c| match c {
            0 => 1.0,
            1 => mu[i],
            _ => s[(i, c - 2)],
        });
        let mut gram = z.transpose() * &z;
        gram[(1, 1)] += n as f64 * v;
        let Some(chol) = gram.clone().cholesky() else {
            break;
        };
        let mut next = Params {
            b: vec![0.0; m],
            lambda: vec![0.0; m],
            beta: vec![vec![0.0; q]; m],
            psi: vec![0.0; m],
        };
        for j in 0..m {
            let yj = y.column(j).into_owned();
            let theta: DVector<f64> = chol.solve(&(z.transpose() * &yj));
            let fitted = &z * &theta;
            let sse: f64 = yj.iter().zip(fitted.iter()).map(|(a, f)| (a - f).powi(2)).sum();
            let var_y = cov[(j, j)].max(f64::MIN_POSITIVE);
            next.b[j] = theta[0];
            next.lambda[j] = theta[1];
            next.beta[j] = (0..q).map(|k| theta[k + 2]).collect();
            next.psi[j] = ((sse + n as f64 * v * theta[1] * theta[1]) / n as f64).max(1e-12 * var_y);
        }
        let ll = next.log_likelihood(&y, &s);
        let prev = *trace.last().unwrap();
        if !ll.is_finite() {
            break;
        }
        p = next;
        trace.push(ll);
        if (ll - prev).abs() <= REL_TOL * prev.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("latent model EM stopped after {} iterations without converging", trace.len() - 1);
    }
    if p.lambda[0] < 0.0 {
        p.lambda.iter_mut().for_each(|l| *l = -*l);
    }
    Ok(LatentScm {
        latent_name: "K".to_string(),
        outcomes,
        sensitives,
        intercepts: p.b,
        loadings: p.lambda,
        sensitive_coef: p.beta,
        noise_var: p.psi,
        trace,
        converged,
    })
}

impl LatentScm {
    fn outcome_index(&self, name: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| ScmError::UnknownOutcome(name.to_string()))
    }

    fn get(row: &impl ValueLookup, name: &str) -> Result<f64> {
        row.value(name)
            .ok_or_else(|| ScmError::MissingNamedValue(name.to_string()))
    }

    /// Part of outcome `j` explained by its intercept and the sensitives.
    fn baseline(&self, j: usize, row: &impl ValueLookup) -> Result<f64> {
        let mut v = self.intercepts[j];
        for (k, s) in self.sensitives.iter().enumerate() {
            v += self.sensitive_coef[j][k] * Self::get(row, s)?;
        }
        Ok(v)
    }

    /// `E[K | observed outcomes, sensitives]`.
    pub fn posterior_latent(&self, row: &impl ValueLookup, observed: &[&str]) -> Result<f64> {
        if observed.is_empty() {
            return Err(ScmError::NoObserved);
        }
        let mut prec = 1.0;
        let mut num = 0.0;
        for name in observed {
            let j = self.outcome_index(name)?;
            let a = self.loadings[j] / self.noise_var[j];
            prec += self.loadings[j] * a;
            num += a * (Self::get(row, name)? - self.baseline(j, row)?);
        }
        Ok(num / prec)
    }

    /// Outcome values with `K` and every `e_j` held fixed and `sensitive` set to `value`.
    pub fn counterfactual_outcomes(
        &self,
        row: &impl ValueLookup,
        sensitive: &str,
        value: f64,
    ) -> Result<BTreeMap<String, f64>> {
        let k = self
            .sensitives
            .iter()
            .position(|s| s == sensitive)
            .ok_or_else(|| ScmError::UnknownNode(sensitive.to_string()))?;
        let delta = value - Self::get(row, sensitive)?;
        self.outcomes
            .iter()
            .enumerate()
            .map(|(j, o)| Ok((o.clone(), Self::get(row, o)? + self.sensitive_coef[j][k] * delta)))
            .collect()
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self.trace.last().expect("trace is never empty")
    }
}
