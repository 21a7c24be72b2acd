//! Linear discriminant analysis weak learners.
//!
//! One model per modality scores a feature vector with per-class linear
//! discriminants `g_k(x) = w_k . x + b_k` where `w_k = S^-1 m_k` and
//! `b_k = -m_k . w_k / 2 + ln p_k` for pooled covariance S, class mean m_k,
//! and prior p_k. Scores turn into a probability-like weight vector through
//! a max-shifted softmax.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fitted discriminant parameters for one modality.
#[derive(Debug, Clone, Serialize)]
pub struct LdaModel {
    dim: usize,
    class_means: Vec<Vec<f64>>,
    priors: Vec<f64>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.priors.len()
    }

    pub fn class_means(&self) -> &[Vec<f64>] {
        &self.class_means
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Per-class discriminant scores for one feature vector.
    pub fn discriminants(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Contract(format!(
                "feature vector has {} dimensions, model expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + dot(w, x))
            .collect())
    }
}

/// Default covariance shrinkage toward its diagonal.
pub const DEFAULT_SHRINKAGE: f64 = 0.01;
/// Default ridge added to the covariance diagonal.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Fits an LDA model from per-class observation lists.
///
/// Every class needs at least two observations of a common dimension. The
/// pooled covariance is regularized as
/// `(1 - shrinkage) S + shrinkage diag(S) + ridge I` before inversion.
pub fn fit_lda(classes: &[Vec<Vec<f64>>], shrinkage: f64, ridge: f64) -> Result<LdaModel> {
    if classes.len() < 2 {
        return Err(Error::Training(format!(
            "need at least 2 classes, got {}",
            classes.len()
        )));
    }
    if !(0.0..=1.0).contains(&shrinkage) || !shrinkage.is_finite() {
        return Err(Error::Parameter {
            name: "shrinkage",
            detail: format!("must be in [0, 1], got {shrinkage}"),
        });
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::Parameter {
            name: "ridge",
            detail: format!("must be nonnegative, got {ridge}"),
        });
    }
    let dim = classes
        .first()
        .and_then(|c| c.first())
        .map(|x| x.len())
        .unwrap_or(0);
    if dim == 0 {
        return Err(Error::Training(
            "observations must have at least 1 dimension".into(),
        ));
    }
    let mut total = 0usize;
    for (k, class) in classes.iter().enumerate() {
        if class.len() < 2 {
            return Err(Error::Training(format!(
                "class {k} has {} observations, need at least 2",
                class.len()
            )));
        }
        for x in class {
            if x.len() != dim {
                return Err(Error::Training(format!(
                    "class {k} has an observation of dimension {}, expected {dim}",
                    x.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Training(format!(
                    "class {k} has a non-finite observation"
                )));
            }
        }
        total += class.len();
    }

    let class_means: Vec<Vec<f64>> = classes
        .iter()
        .map(|class| {
            let mut mean = vec![0.0; dim];
            for x in class {
                for (m, v) in mean.iter_mut().zip(x) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= class.len() as f64;
            }
            mean
        })
        .collect();
    let priors: Vec<f64> = classes
        .iter()
        .map(|c| c.len() as f64 / total as f64)
        .collect();

    // Pooled within-class scatter, normalized by N - K.
    let mut covariance = vec![vec![0.0; dim]; dim];
    for (class, mean) in classes.iter().zip(&class_means) {
        for x in class {
            for i in 0..dim {
                let di = x[i] - mean[i];
                for j in i..dim {
                    covariance[i][j] += di * (x[j] - mean[j]);
                }
            }
        }
    }
    let denom = (total - classes.len()) as f64;
    for (i, row) in covariance.iter_mut().enumerate() {
        for cell in row.iter_mut().skip(i) {
            *cell /= denom;
        }
    }
    for i in 1..dim {
        let (upper_rows, rest) = covariance.split_at_mut(i);
        for (j, cell) in rest[0].iter_mut().enumerate().take(i) {
            *cell = upper_rows[j][i];
        }
    }
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i == j {
                *cell += ridge;
            } else {
                *cell *= 1.0 - shrinkage;
            }
        }
    }

    let factor = cholesky(&covariance)
        .ok_or_else(|| Error::Training("regularized covariance is not positive definite".into()))?;
    let weights: Vec<Vec<f64>> = class_means
        .iter()
        .map(|mean| solve_with_cholesky(&factor, mean))
        .collect();
    let biases: Vec<f64> = class_means
        .iter()
        .zip(&weights)
        .zip(&priors)
        .map(|((mean, w), p)| -0.5 * dot(mean, w) + p.ln())
        .collect();
    if weights
        .iter()
        .flatten()
        .chain(biases.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Training("fitted parameters are not finite".into()));
    }
    Ok(LdaModel {
        dim,
        class_means,
        priors,
        weights,
        biases,
    })
}

/// Max-shifted softmax: nonnegative, sums to one, preserves the argmax.
pub fn weight_vector(scores: &[f64]) -> Vec<f64> {
    assert!(!scores.is_empty(), "weight vector needs at least one score");
    assert!(
        scores.iter().all(|v| v.is_finite()),
        "scores must be finite"
    );
    let peak = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|v| (v - peak).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor, or None when not positive definite.
fn cholesky(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = matrix[i][j];
            acc -= l[i][..j]
                .iter()
                .zip(&l[j][..j])
                .map(|(a, b)| a * b)
                .sum::<f64>();
            if i == j {
                if acc <= 0.0 || !acc.is_finite() {
                    return None;
                }
                l[i][j] = acc.sqrt();
            } else {
                l[i][j] = acc / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = rhs` by forward then backward substitution.
fn solve_with_cholesky(l: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = rhs[i];
        for k in 0..i {
            acc -= l[i][k] * y[k];
        }
        y[i] = acc / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in i + 1..n {
            acc -= l[k][i] * x[k];
        }
        x[i] = acc / l[i][i];
    }
    x
}
