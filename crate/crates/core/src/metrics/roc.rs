use super::{MetricsError, Result};

/// ROC vertices from a descending threshold sweep; tied scores form one step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            a: scores.len(),
            b: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < idx.len() {
        let s = scores[idx[k]];
        while k < idx.len() && scores[idx[k]] == s {
            if labels[idx[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(pts)
}

/// TPR just left (`from_left`) or just right of `x` on the polyline.
fn tpr_at(curve: &[(f64, f64)], x: f64, from_left: bool) -> f64 {
    if from_left {
        // first vertex at or beyond x, approached from the segment before it
        let k = curve.iter().position(|p| p.0 >= x).unwrap_or(curve.len() - 1);
        if k == 0 || curve[k].0 == curve[k - 1].0 {
            return curve[k].1;
        }
        let (a, b) = (curve[k - 1], curve[k]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    } else {
        // last vertex at or before x, leaving along the segment after it
        let k = curve.iter().rposition(|p| p.0 <= x).unwrap_or(0);
        if k + 1 == curve.len() || curve[k + 1].0 == curve[k].0 {
            return curve[k].1;
        }
        let (a, b) = (curve[k], curve[k + 1]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }
}

/// Absolute area between the two groups' ROC curves over FPR in [0, 1].
pub fn abroca(scores_a: &[f64], labels_a: &[bool], scores_b: &[f64], labels_b: &[bool]) -> Result<f64> {
    let ca = roc_curve(scores_a, labels_a)?;
    let cb = roc_curve(scores_b, labels_b)?;
    let mut grid: Vec<f64> = ca.iter().chain(&cb).map(|p| p.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut area = 0.0;
    for w in grid.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let d0 = tpr_at(&ca, x0, false) - tpr_at(&cb, x0, false);
        let d1 = tpr_at(&ca, x1, true) - tpr_at(&cb, x1, true);
        let width = x1 - x0;
        area += if d0 * d1 >= 0.0 {
            0.5 * width * (d0.abs() + d1.abs())
        } else {
            // the curves cross inside the interval
            0.5 * width * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
        };
    }
    Ok(area)
}

/// Area under the ROC curve from mid-ranks (ties count one half).
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            a: scores.len(),
            b: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && scores[idx[end + 1]] == scores[idx[k]] {
            end += 1;
        }
        let mid = (k + end) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=end] {
            if labels[i] {
                rank_sum += mid;
            }
        }
        k = end + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}
