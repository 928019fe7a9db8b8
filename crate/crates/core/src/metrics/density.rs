use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricsError, Result};
use crate::linalg::{quantile_sorted, sample_std, sorted_copy};

const BANDWIDTH_FLOOR: f64 = 1e-3;
pub const MADD_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,density\n");
        for (g, d) in self.grid.iter().zip(&self.density) {
            out.push_str(&format!("{g:?},{d:?}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::File::create(path)?.write_all(self.to_csv().as_bytes())
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Rule-of-thumb bandwidth `0.9 * min(sd, IQR/1.34) * n^(-1/5)`; when one
/// spread estimate is zero the other is used, and the result is floored at 1e-3.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let sorted = sorted_copy(sample);
    let sd = sample_std(sample);
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 0.0,
    };
    Ok((0.9 * spread * (sample.len() as f64).powf(-0.2)).max(BANDWIDTH_FLOOR))
}

fn density_at(sample: &[f64], h: f64, x: f64) -> f64 {
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    norm * sample
        .iter()
        .map(|&s| {
            let u = (x - s) / h;
            (-0.5 * u * u).exp()
        })
        .sum::<f64>()
}

/// Gaussian kernel density estimate of `sample` on `grid`.
pub fn kde(sample: &[f64], grid: &[f64]) -> Result<KdeCurve> {
    let h = silverman_bandwidth(sample)?;
    kde_with_bandwidth(sample, grid, h)
}

pub fn kde_with_bandwidth(sample: &[f64], grid: &[f64], h: f64) -> Result<KdeCurve> {
    if sample.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || !(h > 0.0) {
        return Err(MetricsError::BadGrid);
    }
    Ok(KdeCurve {
        grid: grid.to_vec(),
        density: grid.iter().map(|&x| density_at(sample, h, x)).collect(),
        bandwidth: h,
    })
}

/// Grid covering `[min - 4h, max + 4h]` over all samples, `h` the largest bandwidth.
pub fn regression_grid(samples: &[&[f64]], points: usize) -> Result<Vec<f64>> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut h: f64 = 0.0;
    for s in samples {
        h = h.max(silverman_bandwidth(s)?);
        for &v in *s {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if samples.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    Ok(linspace(lo - 4.0 * h, hi + 4.0 * h, points))
}

fn normalized_on(sample: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let curve = kde(sample, grid)?;
    let dx = grid[1] - grid[0];
    let mass: f64 = curve.density.iter().sum::<f64>() * dx;
    Ok(curve.density.into_iter().map(|d| d / mass).collect())
}

/// Area between the two groups' score densities on [0, 1] (range [0, 2]).
pub fn madd(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    if a.iter().chain(b).any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(MetricsError::OutOfRange);
    }
    let grid = linspace(0.0, 1.0, MADD_GRID);
    let fa = normalized_on(a, &grid)?;
    let fb = normalized_on(b, &grid)?;
    let diff: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).collect();
    Ok(trapezoid(&grid, &diff))
}
