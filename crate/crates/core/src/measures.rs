//! Symmetrized second-order statistical measures between two Gaussian models.
//!
//! With `X`, `x̄`, `M` the reference covariance, mean and frame count, `Y`,
//! `ȳ`, `N` those of the test, `p` the dimension, and weights
//! `a = M/(M+N)`, `b = N/(M+N)`:
//!
//! ```text
//! μ_Gc = (1/p)[a·tr(YX⁻¹) + b·tr(XY⁻¹) − (a−b)·log(det Y/det X)] − 1
//! μ_G  = μ_Gc + (1/p)(ȳ−x̄)ᵀ(a·X⁻¹ + b·Y⁻¹)(ȳ−x̄)
//! μ_Sc = a·[log(tr(YX⁻¹)/p) − (1/p)·log det(YX⁻¹)]
//!      + b·[log(tr(XY⁻¹)/p) − (1/p)·log det(XY⁻¹)]
//! ```
//!
//! `μ_Sc` can also be evaluated with the determinant ratio inverted
//! ([`ScConvention::AsPrinted`]); the two forms agree when `M = N`.
//! All determinants stay in the log domain.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{trace_product, FactorizedModel, GaussianModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "mu_g")]
    MuG,
    #[serde(rename = "mu_gc")]
    MuGc,
    #[serde(rename = "mu_sc")]
    MuSc,
}

impl MeasureKind {
    /// Report row order.
    pub const ALL: [MeasureKind; 3] = [MeasureKind::MuG, MeasureKind::MuGc, MeasureKind::MuSc];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::MuG => "mu_g",
            MeasureKind::MuGc => "mu_gc",
            MeasureKind::MuSc => "mu_sc",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu_g" => Ok(MeasureKind::MuG),
            "mu_gc" => Ok(MeasureKind::MuGc),
            "mu_sc" => Ok(MeasureKind::MuSc),
            other => Err(Error::Config(format!(
                "unknown measure {other:?} (expected mu_g, mu_gc or mu_sc)"
            ))),
        }
    }
}

/// Which determinant ratio the sphericity measure uses when `M ≠ N`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScConvention {
    /// Weighted sum of the asymmetric sphericity measure and its dual.
    #[default]
    Decomposition,
    /// `−(1/p)·(a−b)·log(det X/det Y)`, the sign-flipped determinant term.
    AsPrinted,
}

impl FromStr for ScConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decomposition" => Ok(ScConvention::Decomposition),
            "as-printed" => Ok(ScConvention::AsPrinted),
            other => Err(Error::Config(format!(
                "unknown sc convention {other:?} (expected decomposition or as-printed)"
            ))),
        }
    }
}

/// A measure kind plus the sphericity convention (ignored for the others).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Measure {
    pub kind: MeasureKind,
    #[serde(default)]
    pub sc_convention: ScConvention,
}

impl Measure {
    pub const fn new(kind: MeasureKind) -> Self {
        Self {
            kind,
            sc_convention: ScConvention::Decomposition,
        }
    }

    pub const fn with_convention(kind: MeasureKind, sc_convention: ScConvention) -> Self {
        Self { kind, sc_convention }
    }

    /// Scores test model `y` against reference model `x`.
    pub fn evaluate(&self, x: &FactorizedModel, y: &FactorizedModel) -> Result<f64> {
        let t = PairTerms::new(x, y)?;
        Ok(match self.kind {
            MeasureKind::MuG => t.mu_gc() + t.mean_term(x, y),
            MeasureKind::MuGc => t.mu_gc(),
            MeasureKind::MuSc => t.mu_sc(self.sc_convention),
        })
    }
}

impl From<MeasureKind> for Measure {
    fn from(kind: MeasureKind) -> Self {
        Measure::new(kind)
    }
}

/// Quantities shared by all three measures.
struct PairTerms {
    p: f64,
    a: f64,
    b: f64,
    /// tr(Y X⁻¹)
    tr_yx: f64,
    /// tr(X Y⁻¹)
    tr_xy: f64,
    /// log det Y − log det X
    log_det_ratio: f64,
}

impl PairTerms {
    fn new(x: &FactorizedModel, y: &FactorizedModel) -> Result<Self> {
        let p = x.dim();
        if y.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: y.dim(),
            });
        }
        if x.model.count + y.model.count == 0 {
            return Err(Error::TooFewFrames { count: 0 });
        }
        let (m, n) = (x.model.count as f64, y.model.count as f64);
        Ok(Self {
            p: p as f64,
            a: m / (m + n),
            b: n / (m + n),
            tr_yx: trace_product(&y.model.cov, &x.factor.inverse)?,
            tr_xy: trace_product(&x.model.cov, &y.factor.inverse)?,
            log_det_ratio: y.factor.log_det - x.factor.log_det,
        })
    }

    fn mu_gc(&self) -> f64 {
        (self.a * self.tr_yx + self.b * self.tr_xy - (self.a - self.b) * self.log_det_ratio) / self.p - 1.0
    }

    fn mean_term(&self, x: &FactorizedModel, y: &FactorizedModel) -> f64 {
        let d: DVector<f64> = &y.model.mean - &x.model.mean;
        let qx = d.dot(&(&x.factor.inverse * &d));
        let qy = d.dot(&(&y.factor.inverse * &d));
        (self.a * qx + self.b * qy) / self.p
    }

    fn mu_sc(&self, convention: ScConvention) -> f64 {
        let base = self.a * self.tr_yx.ln() + self.b * self.tr_xy.ln() - self.p.ln();
        let det = (self.a - self.b) * self.log_det_ratio / self.p;
        match convention {
            ScConvention::Decomposition => base - det,
            // log(det X / det Y) = −log_det_ratio
            ScConvention::AsPrinted => base + det,
        }
    }
}

fn factorized_pair(x: &GaussianModel, y: &GaussianModel) -> Result<(FactorizedModel, FactorizedModel)> {
    Ok((FactorizedModel::new(x.clone())?, FactorizedModel::new(y.clone())?))
}

pub fn mu_g(reference: &GaussianModel, test: &GaussianModel) -> Result<f64> {
    let (x, y) = factorized_pair(reference, test)?;
    Measure::new(MeasureKind::MuG).evaluate(&x, &y)
}

pub fn mu_gc(reference: &GaussianModel, test: &GaussianModel) -> Result<f64> {
    let (x, y) = factorized_pair(reference, test)?;
    Measure::new(MeasureKind::MuGc).evaluate(&x, &y)
}

pub fn mu_sc(reference: &GaussianModel, test: &GaussianModel, convention: ScConvention) -> Result<f64> {
    let (x, y) = factorized_pair(reference, test)?;
    Measure::with_convention(MeasureKind::MuSc, convention).evaluate(&x, &y)
}
