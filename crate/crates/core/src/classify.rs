//! Ranking of gallery identities for a projected probe.
//!
//! Two recognizers are provided: nearest neighbour under the Mahalanobis
//! distance induced by the PCA eigenvalues, and a one-vs-rest linear SVM
//! trained by dual coordinate ascent.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::eigenspace::{EigenModel, GalleryEntry};
use crate::error::{Error, Result};
use crate::linalg::dot;

pub const DEFAULT_SVM_C: f64 = 1.0;
/// Ridge added to every eigenvalue, relative to the largest one.
pub const DEFAULT_KNN_EPSILON: f64 = 1e-8;
pub const KKT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Smaller is better.
    Mahalanobis,
    /// Larger is better.
    SvmMargin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMatches {
    pub metric: Metric,
    pub entries: Vec<(String, f64)>,
}

impl RankedMatches {
    /// 1-based rank of `label`.
    pub fn position(&self, label: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|(l, _)| l == label)
            .map(|p| p + 1)
    }

    pub fn best(&self) -> Option<&str> {
        self.entries.first().map(|(l, _)| l.as_str())
    }

    pub fn truncated(mut self, n: usize) -> Self {
        self.entries.truncate(n);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `sqrt(sum (x_i - y_i)^2 / (l_i + epsilon))`.
pub fn mahalanobis_distance(
    x: &[f64],
    y: &[f64],
    eigenvalues: &[f64],
    epsilon: f64,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if eigenvalues.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: eigenvalues.len(),
        });
    }
    let mut sum = 0.0;
    for ((a, b), &l) in x.iter().zip(y).zip(eigenvalues) {
        if l < 0.0 {
            return Err(Error::NegativeEigenvalue(l));
        }
        let diff = a - b;
        sum += diff * diff / (l + epsilon);
    }
    Ok(sum.sqrt())
}

/// Every gallery identity ordered by distance to `probe`, nearest first.
///
/// Ties keep gallery order; a label that appears several times is listed once
/// at its best distance.
pub fn knn_rank_gallery(
    gallery: &[GalleryEntry],
    eigenvalues: &[f64],
    probe: &[f64],
    epsilon: f64,
) -> Result<RankedMatches> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let mut scored = gallery
        .iter()
        .map(|g| {
            Ok((
                g.label.as_str(),
                mahalanobis_distance(probe, &g.coords, eigenvalues, epsilon)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    // stable sort keeps insertion order on ties
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut seen = HashSet::new();
    let entries = scored
        .into_iter()
        .filter(|(l, _)| seen.insert(*l))
        .map(|(l, s)| (l.to_string(), s))
        .collect();
    Ok(RankedMatches {
        metric: Metric::Mahalanobis,
        entries,
    })
}

/// Ranks the model's gallery; `epsilon` is relative to the largest eigenvalue.
pub fn knn_rank(model: &EigenModel, probe: &[f64], epsilon: f64) -> Result<RankedMatches> {
    let ridge = epsilon * model.eigenvalues().first().copied().unwrap_or(0.0);
    knn_rank_gallery(model.gallery(), model.eigenvalues(), probe, ridge)
}

/// Binary linear SVM in primal form `w . x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    /// Maximal KKT violation of the dual at exit.
    pub kkt_violation: f64,
    pub updates: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// Curvature floor for pairs whose kernel rows coincide.
const TAU: f64 = 1e-12;

/// Gaussian elimination with partial pivoting on a row-major `n x n` system;
/// `None` when a pivot vanishes relative to the largest entry.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = (col + 1..n).map(|k| a[col * n + k] * b[k]).sum();
        b[col] = (b[col] - tail) / a[col * n + col];
    }
    Some(b)
}

/// Active-set refinement of the free multipliers: repeatedly moves them toward
/// the exact optimum of the dual restricted to them (bounded ones held fixed,
/// `sum(alpha_i y_i)` preserved); a multiplier that reaches the box first is
/// pinned there and the step is recomputed without it. Returns the number of
/// multiplier changes made.
fn polish_free_set(
    kernel: &[f64],
    y: &[f64],
    c: f64,
    alpha: &mut [f64],
    grad: &mut [f64],
) -> usize {
    let n = y.len();
    let mut free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0 && alpha[i] < c).collect();
    let mut moved = 0;
    while free.len() >= 2 {
        let f = free.len();
        let ridge = 1e-10 * free.iter().map(|&i| kernel[i * n + i]).fold(0.0, f64::max);
        // [Q_FF y_F; y_F' 0] [step; b] = [-grad_F; 0]
        let mut a = vec![0.0; (f + 1) * (f + 1)];
        let mut rhs = vec![0.0; f + 1];
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                a[r * (f + 1) + s] = y[i] * y[j] * kernel[i * n + j];
            }
            // a tiny ridge keeps the system solvable when the free points are
            // affinely dependent; a null direction then runs to the box
            a[r * (f + 1) + r] += ridge;
            a[r * (f + 1) + f] = y[i];
            a[f * (f + 1) + r] = y[i];
            rhs[r] = -grad[i];
        }
        let Some(sol) = solve_dense(a, rhs) else {
            break;
        };
        let step = &sol[..f];
        let mut t = 1.0f64;
        let mut blocking = None;
        for (r, &i) in free.iter().enumerate() {
            let limit = if step[r] > 0.0 {
                (c - alpha[i]) / step[r]
            } else if step[r] < 0.0 {
                -alpha[i] / step[r]
            } else {
                continue;
            };
            if limit < t {
                t = limit.max(0.0);
                blocking = Some(r);
            }
        }
        for (r, &i) in free.iter().enumerate() {
            let old = alpha[i];
            alpha[i] = match blocking {
                Some(b) if b == r => {
                    if step[r] > 0.0 {
                        c
                    } else {
                        0.0
                    }
                }
                _ => (old + t * step[r]).clamp(0.0, c),
            };
            let d = alpha[i] - old;
            if d != 0.0 {
                moved += 1;
                for k in 0..n {
                    grad[k] += y[k] * y[i] * kernel[i * n + k] * d;
                }
            }
        }
        match blocking {
            Some(b) => {
                free.remove(b);
            }
            None => break,
        }
    }
    moved
}

/// Soft-margin linear SVM solved in the dual by pairwise coordinate ascent.
///
/// Each update moves the two multipliers picked by second-order working-set
/// selection, which keeps `sum(alpha_i y_i) = 0` and the box `0 <= alpha_i <= c`
/// while maximizing the dual exactly along that pair. Iteration stops once the
/// maximal KKT violation (the gap between the most violating "up" and "down"
/// gradients) drops below [`KKT_TOLERANCE`] or after `max_updates` updates.
/// The bias is the average of `y_i - w . x_i` over free support vectors, or the
/// midpoint between the two classes' extreme margins when every multiplier
/// sits at a bound.
///
/// Every `n` pair updates the free multipliers are additionally moved toward
/// the exact optimum of their subproblem, which counts as one update per
/// multiplier moved; this removes the slow zig-zag of pairwise steps on
/// nearly hard-margin problems.
pub fn train_binary(
    points: &[&[f64]],
    labels: &[f64],
    c: f64,
    max_updates: usize,
) -> Result<BinarySvm> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyGallery);
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SVM C must be positive, got {c}"
        )));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: p.len(),
        });
    }
    if !labels.contains(&1.0)
        || !labels.contains(&-1.0)
        || labels.iter().any(|&y| y != 1.0 && y != -1.0)
    {
        return Err(Error::SingleClass);
    }

    let kernel: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| dot(points[i], points[j]))
        .collect();
    let k = |i: usize, j: usize| kernel[i * n + j];
    let y = labels;
    let mut alpha = vec![0.0; n];
    // gradient of the minimized dual 1/2 a'Qa - sum(a), Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; n];
    let can_go_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let can_go_down = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut updates = 0;
    let mut since_polish = 0;
    let mut violation;
    loop {
        let mut i = None;
        let mut m_up = f64::NEG_INFINITY;
        for t in 0..n {
            if can_go_up(alpha[t], y[t]) && -y[t] * grad[t] > m_up {
                m_up = -y[t] * grad[t];
                i = Some(t);
            }
        }
        let mut j = None;
        let mut m_low = f64::INFINITY;
        let mut best_gain = f64::NEG_INFINITY;
        if let Some(i) = i {
            for t in 0..n {
                if !can_go_down(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                m_low = m_low.min(v);
                let b = m_up - v;
                if b > 0.0 {
                    let a = (k(i, i) + k(t, t) - 2.0 * k(i, t)).max(TAU);
                    if b * b / a > best_gain {
                        best_gain = b * b / a;
                        j = Some(t);
                    }
                }
            }
        }
        violation = (m_up - m_low).max(0.0);
        let (Some(i), Some(j)) = (i, j) else { break };
        if violation < KKT_TOLERANCE || updates >= max_updates {
            break;
        }
        if since_polish >= n {
            since_polish = 0;
            let moved = polish_free_set(&kernel, y, c, &mut alpha, &mut grad);
            if moved > 0 {
                updates += moved;
                continue;
            }
        }
        updates += 1;
        since_polish += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let a = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / a;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if diff <= 0.0 && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = c - diff;
            } else if diff <= 0.0 && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / a;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if sum <= c && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            } else if sum <= c && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
        }
    }

    let mut weights = vec![0.0; dim];
    for ((p, &a), &yi) in points.iter().zip(&alpha).zip(y) {
        if a != 0.0 {
            weights
                .iter_mut()
                .zip(p.iter())
                .for_each(|(w, x)| *w += a * yi * x);
        }
    }
    let free: Vec<f64> = (0..n)
        .filter(|&i| alpha[i] > 0.0 && alpha[i] < c)
        .map(|i| y[i] - dot(&weights, points[i]))
        .collect();
    let bias = if free.is_empty() {
        let extreme = |sign: f64, pick: fn(f64, f64) -> f64, start: f64| {
            (0..n)
                .filter(|&i| y[i] == sign)
                .map(|i| dot(&weights, points[i]))
                .fold(start, pick)
        };
        let lowest_positive = extreme(1.0, f64::min, f64::INFINITY);
        let highest_negative = extreme(-1.0, f64::max, f64::NEG_INFINITY);
        -(lowest_positive + highest_negative) / 2.0
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    Ok(BinarySvm {
        weights,
        bias,
        alphas: alpha,
        kkt_violation: violation,
        updates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmClass {
    pub label: String,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kkt_violation: f64,
}

/// One-vs-rest collection of linear SVMs, one per gallery label.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    pub c: f64,
    pub classes: Vec<SvmClass>,
}

impl LinearSvmModel {
    pub fn max_kkt_violation(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| c.kkt_violation)
            .fold(0.0, f64::max)
    }
}

/// One-vs-rest training; classes follow first appearance in the gallery.
pub fn svm_train(gallery: &[GalleryEntry], c: f64) -> Result<LinearSvmModel> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let mut labels: Vec<&str> = Vec::new();
    for g in gallery {
        if !labels.contains(&g.label.as_str()) {
            labels.push(&g.label);
        }
    }
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let points: Vec<&[f64]> = gallery.iter().map(|g| g.coords.as_slice()).collect();
    let max_updates = 10 * gallery.len() * labels.len();
    let classes = labels
        .iter()
        .map(|&label| {
            let ys: Vec<f64> = gallery
                .iter()
                .map(|g| if g.label == label { 1.0 } else { -1.0 })
                .collect();
            let svm = train_binary(&points, &ys, c, max_updates)?;
            Ok(SvmClass {
                label: label.to_string(),
                weights: svm.weights,
                bias: svm.bias,
                kkt_violation: svm.kkt_violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearSvmModel { c, classes })
}

/// Classes ordered by decision value, highest first; ties by label.
pub fn svm_rank(model: &LinearSvmModel, probe: &[f64]) -> Result<RankedMatches> {
    let mut entries = model
        .classes
        .iter()
        .map(|cl| {
            if cl.weights.len() != probe.len() {
                return Err(Error::LengthMismatch {
                    expected: cl.weights.len(),
                    actual: probe.len(),
                });
            }
            Ok((cl.label.clone(), dot(&cl.weights, probe) + cl.bias))
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    Ok(RankedMatches {
        metric: Metric::SvmMargin,
        entries,
    })
}
