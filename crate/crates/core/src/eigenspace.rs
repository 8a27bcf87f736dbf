//! Principal component analysis over flattened new-dimension images.
//!
//! Training centers each vector, stacks them as the columns of `Q` (D x M),
//! diagonalizes either `Q Q^T` (D x D) or the Gram matrix `Q^T Q` (M x M) and
//! keeps the eigenvectors whose eigenvalues exceed a fraction of the largest.
//! Training vectors projected onto that basis form the gallery.

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, dot, eig_symmetric, Matrix};
use crate::modality::OffsetI;

pub const DEFAULT_EIGEN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub label: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        FeatureVector {
            label: label.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenteringMode {
    /// Subtract the scalar mean of the vector's own entries.
    #[default]
    PerImageScalar,
    /// Subtract the training-set mean vector.
    GlobalMeanVector,
}

impl CenteringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CenteringMode::PerImageScalar => "per_image_scalar",
            CenteringMode::GlobalMeanVector => "global_mean_vector",
        }
    }
}

impl std::str::FromStr for CenteringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_image_scalar" => Ok(CenteringMode::PerImageScalar),
            "global_mean_vector" => Ok(CenteringMode::GlobalMeanVector),
            other => Err(Error::InvalidParameter(format!(
                "unknown centering mode {other:?}"
            ))),
        }
    }
}

/// Which symmetric matrix is diagonalized during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Covariance when `D <= M`, Gram matrix otherwise.
    #[default]
    Auto,
    Covariance,
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub centering: CenteringMode,
    pub eigen_threshold: f64,
    pub route: Route,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            centering: CenteringMode::default(),
            eigen_threshold: DEFAULT_EIGEN_THRESHOLD,
            route: Route::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub label: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenModel {
    dim: usize,
    centering: CenteringMode,
    global_mean: Option<Vec<f64>>,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
    gallery: Vec<GalleryEntry>,
    offset: OffsetI,
}

/// Centers `values` per `mode`; `global_mean` is required in global mode.
pub fn center(
    values: &[f64],
    mode: CenteringMode,
    global_mean: Option<&[f64]>,
) -> Result<Vec<f64>> {
    match mode {
        CenteringMode::PerImageScalar => {
            if values.is_empty() {
                return Err(Error::LengthMismatch {
                    expected: 1,
                    actual: 0,
                });
            }
            let m = values.iter().sum::<f64>() / values.len() as f64;
            Ok(values.iter().map(|v| v - m).collect())
        }
        CenteringMode::GlobalMeanVector => {
            let mean = global_mean.ok_or_else(|| {
                Error::InvalidParameter("global centering needs a mean vector".into())
            })?;
            if mean.len() != values.len() {
                return Err(Error::LengthMismatch {
                    expected: mean.len(),
                    actual: values.len(),
                });
            }
            Ok(values.iter().zip(mean).map(|(v, m)| v - m).collect())
        }
    }
}

/// Trains with the default route.
pub fn train(
    features: &[FeatureVector],
    centering: CenteringMode,
    eigen_threshold: f64,
) -> Result<EigenModel> {
    train_with(
        features,
        &TrainOptions {
            centering,
            eigen_threshold,
            route: Route::Auto,
        },
    )
}

pub fn train_with(features: &[FeatureVector], opts: &TrainOptions) -> Result<EigenModel> {
    let m = features.len();
    if m < 2 {
        return Err(Error::TooFewSamples(m));
    }
    let d = features[0].values.len();
    if d == 0 {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if let Some(bad) = features.iter().find(|f| f.values.len() != d) {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: bad.values.len(),
        });
    }
    if !(opts.eigen_threshold >= 0.0 && opts.eigen_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eigen threshold {} outside [0, 1)",
            opts.eigen_threshold
        )));
    }
    // identical training vectors carry no between-sample variation in either centering mode
    if features.iter().all(|f| f.values == features[0].values) {
        return Err(Error::NoPositiveEigenvalue);
    }

    let global_mean = match opts.centering {
        CenteringMode::GlobalMeanVector => {
            let mut mean = vec![0.0; d];
            for f in features {
                for (acc, v) in mean.iter_mut().zip(&f.values) {
                    *acc += v;
                }
            }
            mean.iter_mut().for_each(|v| *v /= m as f64);
            Some(mean)
        }
        CenteringMode::PerImageScalar => None,
    };
    let centered = features
        .iter()
        .map(|f| center(&f.values, opts.centering, global_mean.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let q = Matrix::from_columns(d, &centered)?;

    let use_gram = match opts.route {
        Route::Auto => d > m,
        Route::Covariance => false,
        Route::Gram => true,
    };
    let (eigenvalues, eigenvectors) = if use_gram {
        gram_route(&q, opts.eigen_threshold)?
    } else {
        covariance_route(&q, opts.eigen_threshold)?
    };

    let gallery = features
        .iter()
        .zip(&centered)
        .map(|(f, c)| {
            Ok(GalleryEntry {
                label: f.label.clone(),
                coords: eigenvectors.transpose_mul_vec(c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EigenModel {
        dim: d,
        centering: opts.centering,
        global_mean,
        eigenvalues,
        eigenvectors,
        gallery,
        offset: OffsetI::ZERO,
    })
}

fn retained_count(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::NoPositiveEigenvalue);
    }
    Ok(eigenvalues
        .iter()
        .take_while(|&&l| l > threshold * max)
        .count())
}

// C = Q Q^T, decomposed directly.
fn covariance_route(q: &Matrix, threshold: f64) -> Result<(Vec<f64>, Matrix)> {
    let c = q.matmul(&q.transpose())?;
    let eig = eig_symmetric(&c)?;
    let k = retained_count(&eig.eigenvalues, threshold)?;
    Ok((
        eig.eigenvalues[..k].to_vec(),
        eig.eigenvectors.leading_columns(k),
    ))
}

// Q^T Q u = l u  implies  Q Q^T (Q u) = l (Q u), with ||Q u|| = sqrt(l).
fn gram_route(q: &Matrix, threshold: f64) -> Result<(Vec<f64>, Matrix)> {
    let gram = q.transpose().matmul(q)?;
    let eig = eig_symmetric(&gram)?;
    let k = retained_count(&eig.eigenvalues, threshold)?;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = q.mul_vec(&eig.eigenvectors.column(j))?;
        // re-orthogonalize against earlier columns to absorb rounding in small eigenvalues
        for prev in &columns {
            let p = dot(&v, prev);
            v.iter_mut().zip(prev).for_each(|(x, y)| *x -= p * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::NoPositiveEigenvalue);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        canonical_sign(&mut v);
        columns.push(v);
    }
    let vectors = Matrix::from_columns(q.rows(), &columns)?;
    Ok((eig.eigenvalues[..k].to_vec(), vectors))
}

impl EigenModel {
    /// Reassembles a model from stored parts, checking its invariants.
    pub fn from_parts(
        centering: CenteringMode,
        global_mean: Option<Vec<f64>>,
        eigenvalues: Vec<f64>,
        eigenvectors: Matrix,
        gallery: Vec<GalleryEntry>,
        offset: OffsetI,
    ) -> Result<Self> {
        let dim = eigenvectors.rows();
        let k = eigenvectors.cols();
        if eigenvalues.len() != k || k == 0 {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: eigenvalues.len(),
            });
        }
        if let Some(&l) = eigenvalues.iter().find(|l| l.is_nan() || **l <= 0.0) {
            return Err(Error::NegativeEigenvalue(l));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "eigenvalues are not in descending order".into(),
            ));
        }
        match (centering, &global_mean) {
            (CenteringMode::GlobalMeanVector, Some(mean)) if mean.len() != dim => {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    actual: mean.len(),
                })
            }
            (CenteringMode::GlobalMeanVector, None) | (CenteringMode::PerImageScalar, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "global mean must be present iff centering is global".into(),
                ))
            }
            _ => {}
        }
        if let Some(bad) = gallery.iter().find(|g| g.coords.len() != k) {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: bad.coords.len(),
            });
        }
        Ok(EigenModel {
            dim,
            centering,
            global_mean,
            eigenvalues,
            eigenvectors,
            gallery,
            offset,
        })
    }

    pub fn with_offset(mut self, offset: OffsetI) -> Self {
        self.offset = offset;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of retained components.
    pub fn components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn centering(&self) -> CenteringMode {
        self.centering
    }

    pub fn global_mean(&self) -> Option<&[f64]> {
        self.global_mean.as_deref()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// D x K, one eigenvector per column.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn gallery(&self) -> &[GalleryEntry] {
        &self.gallery
    }

    pub fn offset(&self) -> OffsetI {
        self.offset
    }

    /// Centers `values` the same way as the training data and projects onto the basis.
    pub fn project(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                actual: values.len(),
            });
        }
        let c = center(values, self.centering, self.global_mean.as_deref())?;
        self.eigenvectors.transpose_mul_vec(&c)
    }
}
