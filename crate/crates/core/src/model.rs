//! Mean/covariance models of spectral vectors and the SPD algebra behind the
//! similarity measures.

use std::fs;
use std::path::Path;

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSequence;

/// Running first- and second-order sums of a vector stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAccumulator {
    sum: DVector<f64>,
    outer_sum: DMatrix<f64>,
    count: usize,
}

impl ModelAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            sum: DVector::zeros(dim),
            outer_sum: DMatrix::zeros(dim, dim),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sum(&self) -> &DVector<f64> {
        &self.sum
    }

    pub fn outer_sum(&self) -> &DMatrix<f64> {
        &self.outer_sum
    }

    pub fn accumulate(&mut self, v: &[f64]) -> Result<()> {
        let p = self.dim();
        if v.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: v.len(),
            });
        }
        for (s, &x) in self.sum.iter_mut().zip(v) {
            *s += x;
        }
        // Lower triangle only (column-major storage); mirrored in finalize.
        let outer = self.outer_sum.as_mut_slice();
        for (j, &vj) in v.iter().enumerate() {
            let col = &mut outer[j * p + j..(j + 1) * p];
            for (o, &vi) in col.iter_mut().zip(&v[j..]) {
                *o += vi * vj;
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn accumulate_all(&mut self, frames: &FrameSequence) -> Result<()> {
        if frames.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: frames.dim(),
            });
        }
        for f in frames.frames() {
            self.accumulate(f)?;
        }
        Ok(())
    }

    pub fn from_frames(frames: &FrameSequence) -> Self {
        let mut acc = Self::new(frames.dim());
        acc.accumulate_all(frames).expect("dimensions agree");
        acc
    }

    /// Pools two accumulators.
    pub fn merge(&self, other: &ModelAccumulator) -> Result<ModelAccumulator> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(ModelAccumulator {
            sum: &self.sum + &other.sum,
            outer_sum: &self.outer_sum + &other.outer_sum,
            count: self.count + other.count,
        })
    }

    /// In-place form of [`merge`](Self::merge).
    pub fn absorb(&mut self, other: &ModelAccumulator) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        self.sum += &other.sum;
        self.outer_sum += &other.outer_sum;
        self.count += other.count;
        Ok(())
    }

    /// Maximum-likelihood mean and covariance (normalized by the count).
    pub fn finalize(&self) -> Result<GaussianModel> {
        self.finalize_with(FactorizeOptions::default())
    }

    pub fn finalize_with(&self, opts: FactorizeOptions) -> Result<GaussianModel> {
        let n = self.count;
        if n < 2 {
            return Err(Error::TooFewFrames { count: n });
        }
        let p = self.dim();
        if n < p + 1 {
            warn!("estimating a {p}-dim covariance from only {n} frames");
        }
        let inv_n = 1.0 / n as f64;
        let mean = &self.sum * inv_n;
        let mut cov = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in j..p {
                let c = self.outer_sum[(i, j)] * inv_n - mean[i] * mean[j];
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let model = GaussianModel { mean, cov, count: n };
        match factorize_matrix(&model.cov, opts) {
            Ok(_) => Ok(model),
            Err(_) => Err(Error::DegenerateModel),
        }
    }
}

/// Mean vector, covariance matrix and the number of frames they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub count: usize,
}

impl GaussianModel {
    /// Builds a model from explicit parameters; `cov` is symmetrized.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, count: usize) -> Result<Self> {
        let p = mean.len();
        if cov.nrows() != p || cov.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: cov.nrows(),
            });
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov, count })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn from_frames(frames: &FrameSequence) -> Result<Self> {
        ModelAccumulator::from_frames(frames).finalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorizeOptions {
    /// Retry once with `1e-6 · tr(C)/p` added to the diagonal when the
    /// plain Cholesky factorization fails.
    pub diagonal_loading: bool,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        Self { diagonal_loading: true }
    }
}

pub const LOADING_FACTOR: f64 = 1e-6;

/// Cholesky factor, log-determinant and inverse of an SPD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactorization {
    pub cholesky_factor: DMatrix<f64>,
    pub log_det: f64,
    pub inverse: DMatrix<f64>,
    /// Diagonal loading that had to be added, if any.
    pub loading: Option<f64>,
}

pub fn factorize(model: &GaussianModel) -> Result<SpdFactorization> {
    factorize_matrix(&model.cov, FactorizeOptions::default())
}

pub fn factorize_matrix(cov: &DMatrix<f64>, opts: FactorizeOptions) -> Result<SpdFactorization> {
    if !cov.is_square() {
        return Err(Error::DimensionMismatch {
            expected: cov.nrows(),
            actual: cov.ncols(),
        });
    }
    if let Some(f) = try_cholesky(cov.clone(), None) {
        return Ok(f);
    }
    if opts.diagonal_loading {
        let p = cov.nrows() as f64;
        let lambda = LOADING_FACTOR * cov.trace() / p;
        if lambda > 0.0 && lambda.is_finite() {
            let mut loaded = cov.clone();
            for i in 0..cov.nrows() {
                loaded[(i, i)] += lambda;
            }
            if let Some(f) = try_cholesky(loaded, Some(lambda)) {
                warn!("covariance needed diagonal loading of {lambda:.3e}");
                return Ok(f);
            }
        }
    }
    Err(Error::NotPositiveDefinite)
}

fn try_cholesky(m: DMatrix<f64>, loading: Option<f64>) -> Option<SpdFactorization> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let chol = Cholesky::new(m)?;
    let l = chol.l();
    if l.diagonal().iter().any(|&d| d.is_nan() || d <= 0.0) {
        return None;
    }
    let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let inv = chol.inverse();
    let inverse = (&inv + inv.transpose()) * 0.5;
    Some(SpdFactorization {
        cholesky_factor: l,
        log_det,
        inverse,
        loading,
    })
}

/// `tr(AB) = Σ_ij A_ij B_ji`, without forming the product.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.ncols() || a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.ncols(),
        });
    }
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// A model together with its cached factorization; what registries and
/// scorers work with.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedModel {
    pub model: GaussianModel,
    pub factor: SpdFactorization,
}

impl FactorizedModel {
    pub fn new(model: GaussianModel) -> Result<Self> {
        Self::with_options(model, FactorizeOptions::default())
    }

    pub fn with_options(model: GaussianModel, opts: FactorizeOptions) -> Result<Self> {
        let factor = factorize_matrix(&model.cov, opts)?;
        Ok(Self { model, factor })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }
}

/// On-disk form of one speaker model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub id: String,
    pub count: usize,
    pub mean: Vec<f64>,
    /// Row-major `p × p`.
    pub covariance: Vec<f64>,
    pub frontend_config_hash: String,
}

impl ModelRecord {
    pub fn from_model(id: &str, model: &GaussianModel, frontend_config_hash: &str) -> Self {
        let p = model.dim();
        let covariance = (0..p)
            .flat_map(|i| (0..p).map(move |j| (i, j)))
            .map(|(i, j)| model.cov[(i, j)])
            .collect();
        Self {
            id: id.to_string(),
            count: model.count,
            mean: model.mean.iter().copied().collect(),
            covariance,
            frontend_config_hash: frontend_config_hash.to_string(),
        }
    }

    pub fn to_model(&self) -> Result<GaussianModel> {
        let p = self.mean.len();
        if self.covariance.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                actual: self.covariance.len(),
            });
        }
        GaussianModel::new(
            DVector::from_column_slice(&self.mean),
            DMatrix::from_row_slice(p, p, &self.covariance),
            self.count,
        )
    }
}

/// A collection of speaker models serialized as one JSON document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelStore {
    pub speakers: Vec<ModelRecord>,
}

impl ModelStore {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
