use nalgebra::{DMatrix, DVector};

use super::{ModelError, Result};
use crate::linalg::{lstsq, with_intercept};

const NEWTON_TOL: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 100;

/// Ordinary least squares with intercept; returns (intercept, coefficients).
pub(crate) fn fit_linear(x: &DMatrix<f64>, y: &[f64]) -> Result<(f64, Vec<f64>)> {
    let beta = lstsq(&with_intercept(x), &DVector::from_column_slice(y)).ok_or(ModelError::Singular)?;
    Ok((beta[0], beta.iter().skip(1).copied().collect()))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean logistic loss plus `l2/2 * |w|^2` (intercept unpenalized); `theta[0]` is the intercept.
fn logistic_objective(design: &DMatrix<f64>, y: &[f64], theta: &DVector<f64>, l2: f64) -> f64 {
    let z = design * theta;
    let n = y.len() as f64;
    let nll: f64 = z.iter().zip(y).map(|(&z, &t)| softplus(z) - t * z).sum::<f64>() / n;
    nll + 0.5 * l2 * theta.iter().skip(1).map(|w| w * w).sum::<f64>()
}

/// L2-regularized logistic regression by damped Newton iterations.
pub(crate) fn fit_logistic(x: &DMatrix<f64>, y: &[f64], l2: f64) -> Result<(f64, Vec<f64>)> {
    let design = with_intercept(x);
    let (n, d) = design.shape();
    let nf = n as f64;
    let mut theta = DVector::zeros(d);
    let mut obj = logistic_objective(&design, y, &theta, l2);
    for _ in 0..NEWTON_MAX_ITER {
        let p: Vec<f64> = (&design * &theta).iter().map(|&z| sigmoid(z)).collect();
        let resid = DVector::from_iterator(n, p.iter().zip(y).map(|(p, t)| p - t));
        let mut grad = design.transpose() * resid / nf;
        let mut hess = DMatrix::zeros(d, d);
        for i in 0..n {
            let w = p[i] * (1.0 - p[i]) / nf;
            let row = design.row(i);
            hess.ger(w, &row.transpose(), &row.transpose(), 1.0);
        }
        for k in 1..d {
            grad[k] += l2 * theta[k];
            hess[(k, k)] += l2;
        }
        if grad.norm() < NEWTON_TOL {
            return Ok((theta[0], theta.iter().skip(1).copied().collect()));
        }
        // the intercept is unpenalized, so a tiny ridge keeps the solve defined
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => {
                let mut h = hess;
                for k in 0..d {
                    h[(k, k)] += 1e-10;
                }
                h.cholesky().ok_or(ModelError::Singular)?.solve(&grad)
            }
        };
        let decrement = grad.dot(&step);
        let mut t = 1.0;
        loop {
            let cand = &theta - &step * t;
            let c = logistic_objective(&design, y, &cand, l2);
            if c <= obj - 1e-4 * t * decrement || t < 1e-12 {
                theta = cand;
                obj = c;
                break;
            }
            t *= 0.5;
        }
    }
    log::warn!("logistic regression stopped at the Newton iteration cap");
    Ok((theta[0], theta.iter().skip(1).copied().collect()))
}
