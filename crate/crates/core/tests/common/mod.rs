#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use speakerid_core::{GaussianModel, MeasureKind, ScConvention};

pub fn normal_matrix<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn normal_vector<R: Rng>(p: usize, scale: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(p, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// A·Aᵀ + 0.1·I with A entries of variance 1/p.
pub fn random_spd<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let a = normal_matrix(p, p, 1.0 / (p as f64).sqrt(), rng);
    &a * a.transpose() + DMatrix::identity(p, p) * 0.1
}

pub fn random_model<R: Rng>(p: usize, rng: &mut R) -> GaussianModel {
    let count = rng.random_range(2..500);
    GaussianModel::new(normal_vector(p, 1.0, rng), random_spd(p, rng), count).unwrap()
}

/// Well-conditioned invertible map I + B with B entries of std 0.5/√p.
pub fn random_affine<R: Rng>(p: usize, rng: &mut R) -> (DMatrix<f64>, DVector<f64>) {
    loop {
        let a = DMatrix::identity(p, p) + normal_matrix(p, p, 0.5 / (p as f64).sqrt(), rng);
        let sv = a.singular_values();
        if sv.min() > 0.1 {
            return (a, normal_vector(p, 2.0, rng));
        }
    }
}

pub fn transform(m: &GaussianModel, a: &DMatrix<f64>, b: &DVector<f64>) -> GaussianModel {
    GaussianModel::new(a * &m.mean + b, a * &m.cov * a.transpose(), m.count).unwrap()
}

/// Straight evaluation of the measure definitions with explicit inverses and
/// LU determinants.
pub fn reference_measure(kind: MeasureKind, conv: ScConvention, x: &GaussianModel, y: &GaussianModel) -> f64 {
    let p = x.dim() as f64;
    let (m, n) = (x.count as f64, y.count as f64);
    let (a, b) = (m / (m + n), n / (m + n));
    let xi = x.cov.clone().try_inverse().unwrap();
    let yi = y.cov.clone().try_inverse().unwrap();
    let tr_yx = (&y.cov * &xi).trace();
    let tr_xy = (&x.cov * &yi).trace();
    let ldr = y.cov.determinant().ln() - x.cov.determinant().ln();
    match kind {
        MeasureKind::MuGc | MeasureKind::MuG => {
            let gc = (a * tr_yx + b * tr_xy - (a - b) * ldr) / p - 1.0;
            if kind == MeasureKind::MuGc {
                gc
            } else {
                let d = &y.mean - &x.mean;
                let w = &xi * a + &yi * b;
                gc + (d.transpose() * w * &d)[(0, 0)] / p
            }
        }
        MeasureKind::MuSc => {
            let base = a * (tr_yx / p).ln() + b * (tr_xy / p).ln();
            match conv {
                ScConvention::Decomposition => base - (a - b) * ldr / p,
                ScConvention::AsPrinted => base + (a - b) * ldr / p,
            }
        }
    }
}

pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}
