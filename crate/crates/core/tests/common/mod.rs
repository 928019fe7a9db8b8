//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cfair::metrics::silverman_bandwidth;

/// Mean absolute difference of order statistics; valid for equal sizes.
pub fn sorted_pairing(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

pub fn naive_mmd(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut d = Vec::new();
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            d.push((pooled[i] - pooled[j]).abs());
        }
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m == 0 {
        0.0
    } else if m % 2 == 1 {
        d[m / 2]
    } else {
        (d[m / 2 - 1] + d[m / 2]) / 2.0
    };
    let h = if med > 0.0 { med } else { 1.0 };
    let k = |x: f64, y: f64| (-(x - y) * (x - y) / (2.0 * h * h)).exp();
    let mean = |u: &[f64], v: &[f64]| {
        let mut s = 0.0;
        for x in u {
            for y in v {
                s += k(*x, *y);
            }
        }
        s / (u.len() * v.len()) as f64
    };
    (mean(a, a) + mean(b, b) - 2.0 * mean(a, b)).max(0.0).sqrt()
}

pub fn all_pairs_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                wins += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / pairs
}

/// MADD with a plain Gaussian-KDE on a very fine grid, each density normalized.
pub fn fine_grid_madd(a: &[f64], b: &[f64], points: usize) -> f64 {
    let grid: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
    let dx = 1.0 / (points - 1) as f64;
    let density = |s: &[f64]| {
        let h = silverman_bandwidth(s).unwrap();
        let mut f: Vec<f64> = grid
            .iter()
            .map(|&x| {
                s.iter()
                    .map(|&v| (-(x - v) * (x - v) / (2.0 * h * h)).exp())
                    .sum::<f64>()
            })
            .collect();
        let total: f64 = f.iter().sum::<f64>() * dx;
        f.iter_mut().for_each(|v| *v /= total);
        f
    };
    let (fa, fb) = (density(a), density(b));
    let d: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).collect();
    (0..points - 1).map(|k| 0.5 * (d[k] + d[k + 1]) * dx).sum()
}

/// E[K | y, s] by Simpson's rule over the unnormalized posterior density.
pub fn quadrature_posterior(m: &cfair::LatentScm, row: &BTreeMap<String, f64>, observed: &[&str]) -> f64 {
    let log_density = |k: f64| {
        let mut lp = -0.5 * k * k;
        for name in observed {
            let j = m.outcomes.iter().position(|o| o == name).unwrap();
            let mut mean = m.intercepts[j] + m.loadings[j] * k;
            for (t, s) in m.sensitives.iter().enumerate() {
                mean += m.sensitive_coef[j][t] * row[s];
            }
            let r = row[*name] - mean;
            lp -= 0.5 * r * r / m.noise_var[j];
        }
        lp
    };
    let (lo, hi, n) = (-12.0, 12.0, 200_000);
    let h = (hi - lo) / n as f64;
    let shift = log_density(0.0);
    let (mut z, mut first) = (0.0, 0.0);
    for i in 0..=n {
        let k = lo + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let d = (log_density(k) - shift).exp() * w;
        z += d;
        first += k * d;
    }
    first / z
}
