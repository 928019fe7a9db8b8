//! One-hidden-layer tanh network trained full-batch with Adam (AMSGrad form:
//! the second-moment estimate never decreases, which keeps late steps small).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::sigmoid;
use super::ModelSpec;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Consecutive loss increases that count as divergence.
const DIVERGENCE_RUN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Identity,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub n_in: usize,
    pub hidden: usize,
    /// Row-major `hidden x n_in`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(n_in: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = (6.0 / (n_in + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        MlpParams {
            n_in,
            hidden,
            w1: (0..hidden * n_in).map(|_| rng.random_range(-a1..a1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.random_range(-a2..a2)).collect(),
            b2: 0.0,
        }
    }

    pub fn zeros(n_in: usize, hidden: usize) -> Self {
        MlpParams {
            n_in,
            hidden,
            w1: vec![0.0; hidden * n_in],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let (a, rest) = flat.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.hidden);
        let (c, d) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = d[0];
    }

    /// Hidden activations, stored unit-major: `h[k * n + i]` for row `i`.
    fn hidden_layer(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let n = x.nrows();
        let mut h = vec![0.0; self.hidden * n];
        for (k, col) in h.chunks_exact_mut(n).enumerate() {
            col.fill(self.b1[k]);
            for j in 0..self.n_in {
                let w = self.w1[k * self.n_in + j];
                for (v, xv) in col.iter_mut().zip(x.column(j).iter()) {
                    *v += w * xv;
                }
            }
            for v in col.iter_mut() {
                *v = v.tanh();
            }
        }
        h
    }

    fn output(&self, h: &[f64], n: usize) -> Vec<f64> {
        let mut z = vec![self.b2; n];
        for (col, w) in h.chunks_exact(n).zip(&self.w2) {
            for (zv, hv) in z.iter_mut().zip(col) {
                *zv += w * hv;
            }
        }
        z
    }

    /// Pre-activation output for every row of `x`.
    pub fn logits(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let h = self.hidden_layer(x);
        DVector::from_vec(self.output(&h, x.nrows()))
    }
}

/// Training loss and its gradient (flattened like [`MlpParams::to_flat`]).
///
/// Regression uses half mean squared error, classification mean logistic
/// loss; both add `l2/2` times the squared weights (biases unpenalized).
pub fn loss_and_grad(p: &MlpParams, x: &DMatrix<f64>, y: &[f64], out: Output, l2: f64) -> (f64, Vec<f64>) {
    let rows = y.len();
    let n = rows as f64;
    let h = p.hidden_layer(x);
    let z = p.output(&h, rows);
    let mut loss = 0.0;
    let r: Vec<f64> = z
        .iter()
        .zip(y)
        .map(|(&z, &t)| match out {
            Output::Identity => {
                loss += 0.5 * (z - t) * (z - t);
                (z - t) / n
            }
            Output::Sigmoid => {
                loss += if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() } - t * z;
                (sigmoid(z) - t) / n
            }
        })
        .collect();
    loss /= n;
    let sq: f64 = p.w1.iter().chain(&p.w2).map(|w| w * w).sum();
    loss += 0.5 * l2 * sq;

    let mut g_w1 = vec![0.0; p.w1.len()];
    let mut g_b1 = vec![0.0; p.hidden];
    let mut g_w2 = vec![0.0; p.hidden];
    let mut d = vec![0.0; rows];
    for (k, col) in h.chunks_exact(rows).enumerate() {
        let w2 = p.w2[k];
        let mut gw2 = 0.0;
        let mut gb1 = 0.0;
        for ((dv, hv), rv) in d.iter_mut().zip(col).zip(&r) {
            gw2 += hv * rv;
            *dv = rv * w2 * (1.0 - hv * hv);
            gb1 += *dv;
        }
        g_w2[k] = gw2 + l2 * w2;
        g_b1[k] = gb1;
        for j in 0..p.n_in {
            let dot: f64 = d.iter().zip(x.column(j).iter()).map(|(a, b)| a * b).sum();
            g_w1[k * p.n_in + j] = dot + l2 * p.w1[k * p.n_in + j];
        }
    }
    let mut grad = g_w1;
    grad.extend(g_b1);
    grad.extend(g_w2);
    grad.push(r.iter().sum());
    (loss, grad)
}

pub struct TrainOutcome {
    pub params: MlpParams,
    pub losses: Vec<f64>,
    pub diverged: bool,
}

pub fn train_adam(x: &DMatrix<f64>, y: &[f64], out: Output, spec: &ModelSpec) -> TrainOutcome {
    let (lr, l2) = (spec.learning_rate, spec.l2);
    let mut params = MlpParams::init(x.ncols(), spec.hidden, spec.seed);
    let mut theta = params.to_flat();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut v_max = vec![0.0_f64; theta.len()];
    let mut losses = Vec::with_capacity(spec.epochs);
    let mut rising = 0;
    let mut diverged = false;
    for t in 1..=spec.epochs {
        params.set_flat(&theta);
        let (loss, grad) = loss_and_grad(&params, x, y, out, l2);
        if let Some(&prev) = losses.last() {
            rising = if loss > prev { rising + 1 } else { 0 };
        }
        losses.push(loss);
        if !loss.is_finite() || rising >= DIVERGENCE_RUN {
            diverged = true;
            break;
        }
        let c1 = 1.0 - BETA1.powi(t as i32);
        let c2 = 1.0 - BETA2.powi(t as i32);
        for k in 0..theta.len() {
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * grad[k];
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * grad[k] * grad[k];
            v_max[k] = v_max[k].max(v[k] / c2);
            theta[k] -= lr * (m[k] / c1) / (v_max[k].sqrt() + ADAM_EPS);
        }
    }
    params.set_flat(&theta);
    TrainOutcome {
        params,
        losses,
        diverged,
    }
}

/// Largest relative gap between the analytic gradient and central differences
/// with step `step`. Components below 1e-6 in both are compared absolutely.
pub fn max_relative_gradient_error(p: &MlpParams, x: &DMatrix<f64>, y: &[f64], out: Output, l2: f64, step: f64) -> f64 {
    let (_, analytic) = loss_and_grad(p, x, y, out, l2);
    let base = p.to_flat();
    let mut probe = p.clone();
    let mut worst = 0.0_f64;
    for k in 0..base.len() {
        let mut shifted = base.clone();
        shifted[k] = base[k] + step;
        probe.set_flat(&shifted);
        let (up, _) = loss_and_grad(&probe, x, y, out, l2);
        shifted[k] = base[k] - step;
        probe.set_flat(&shifted);
        let (down, _) = loss_and_grad(&probe, x, y, out, l2);
        let numeric = (up - down) / (2.0 * step);
        let denom = analytic[k].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    worst
}
