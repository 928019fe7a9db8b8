use std::cmp::Ordering;

use super::{MetricsError, Result};
use crate::linalg::sorted_copy;

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn non_empty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    Ok(())
}

/// Exact 1-D Wasserstein-1 distance between two empirical distributions.
///
/// The quantile functions are step functions with breakpoints at `k/na` and
/// `l/nb`; the integral is accumulated over the merged breakpoints using
/// integer segment lengths in units of `1/lcm(na, nb)`.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    non_empty(a, b)?;
    let (sa, sb) = (sorted_copy(a), sorted_copy(b));
    let (na, nb) = (sa.len(), sb.len());
    let g = gcd(na, nb);
    let (step_a, step_b) = (nb / g, na / g);
    let total_len = na * step_a;
    let (mut i, mut j, mut pos) = (0, 0, 0);
    let mut total = 0.0;
    while pos < total_len {
        let end_a = (i + 1) * step_a;
        let end_b = (j + 1) * step_b;
        let next = end_a.min(end_b);
        total += (next - pos) as f64 * (sa[i] - sb[j]).abs();
        pos = next;
        if next == end_a {
            i += 1;
        }
        if next == end_b {
            j += 1;
        }
    }
    Ok(total / total_len as f64)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn median(mut v: Vec<f64>) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// Median of all pairwise distances in the pooled sample; 1.0 when that is zero.
pub fn median_heuristic(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    if n < 2 {
        return 1.0;
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push((pooled[i] - pooled[j]).abs());
        }
    }
    let m = median(d);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn kernel_mean(x: &[f64], y: &[f64], inv_two_s2: f64) -> f64 {
    let mut s = 0.0;
    for &u in x {
        for &v in y {
            s += (-(u - v) * (u - v) * inv_two_s2).exp();
        }
    }
    s / (x.len() * y.len()) as f64
}

/// Square root of the biased (V-statistic) MMD^2 with an RBF kernel,
/// bandwidth from [`median_heuristic`].
pub fn mmd_rbf(a: &[f64], b: &[f64]) -> Result<f64> {
    non_empty(a, b)?;
    let mut sa = sorted_copy(a);
    let mut sb = sorted_copy(b);
    // canonical argument order keeps the value bit-identical under swapping
    if lex_cmp(&sa, &sb) == Ordering::Greater {
        std::mem::swap(&mut sa, &mut sb);
    }
    let sigma = median_heuristic(&sa, &sb);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mmd2 = kernel_mean(&sa, &sa, inv) + kernel_mean(&sb, &sb, inv) - 2.0 * kernel_mean(&sa, &sb, inv);
    Ok(mmd2.max(0.0).sqrt())
}
