//! Kernel-induced distances in place of the Euclidean norm.

use serde::{Deserialize, Serialize};

use crate::dissim::{assemble, DissimMatrix};
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::matrix::{sq_euclidean, Matrix};
use crate::types::{Dataset, DissimParams};

/// Radicands down to this value are treated as round-off and clamped to 0.
pub const RADICAND_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `x·y`
    Linear,
    /// `(x·y + coef)^degree`
    Polynomial { degree: u32, coef: f64 },
    /// `exp(−gamma‖x−y‖²)`
    Rbf { gamma: f64 },
    /// `Σ xⱼ² yⱼ²`, the linear kernel on squared coordinates.
    SquaredCoords,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial { degree, coef } => {
                if degree < 1 || !coef.is_finite() {
                    return Err(invalid_param(
                        "polynomial kernel needs degree >= 1 and a finite coef",
                    ));
                }
            }
            KernelSpec::Rbf { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(invalid_param(format!("rbf gamma must be > 0, got {gamma}")));
                }
            }
            KernelSpec::Linear | KernelSpec::SquaredCoords => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree, coef } => (dot(x, y) + coef).powi(degree as i32),
            KernelSpec::Rbf { gamma } => (-gamma * sq_euclidean(x, y)).exp(),
            KernelSpec::SquaredCoords => x.iter().zip(y).map(|(p, q)| (p * p) * (q * q)).sum(),
        }
    }

    /// Explicit finite feature map, when the kernel has an obvious one.
    fn feature_map(&self, x: &Matrix) -> Option<Matrix> {
        match self {
            KernelSpec::Linear => Some(x.clone()),
            KernelSpec::SquaredCoords => Some(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
                x[(i, j)] * x[(i, j)]
            })),
            _ => None,
        }
    }
}

fn radicand_to_sq(r: f64) -> Result<f64> {
    if r >= 0.0 {
        Ok(r)
    } else if r >= -RADICAND_TOL {
        Ok(0.0)
    } else {
        Err(invalid_input(format!(
            "kernel is not positive semi-definite on these inputs (radicand {r:e})"
        )))
    }
}

/// `√(κ(x,x) + κ(y,y) − 2κ(x,y))`.
pub fn d_kappa(x: &[f64], y: &[f64], kernel: &KernelSpec) -> Result<f64> {
    kernel.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} coordinates",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel inputs".into()));
    }
    let r = kernel.eval(x, x) + kernel.eval(y, y) - 2.0 * kernel.eval(x, y);
    radicand_to_sq(r).map(f64::sqrt)
}

/// Gram matrix of the rows of `x`.
pub fn gram(x: &Matrix, kernel: &KernelSpec) -> Matrix {
    crate::dissim::symmetric_from_fn(
        x.rows(),
        |i| kernel.eval(x.row(i), x.row(i)),
        |i, j| kernel.eval(x.row(i), x.row(j)),
    )
}

/// Kernel distances between all rows of `x`.
pub fn kernel_distance_matrix(x: &Matrix, kernel: &KernelSpec) -> Result<Matrix> {
    let sq = kernel_sq_distances(x, kernel)?;
    Ok(Matrix::from_fn(sq.rows(), sq.cols(), |i, j| {
        sq[(i, j)].sqrt()
    }))
}

fn kernel_sq_distances(x: &Matrix, kernel: &KernelSpec) -> Result<Matrix> {
    kernel.validate()?;
    let n = x.rows();
    if let Some(phi) = kernel.feature_map(x) {
        return Ok(crate::dissim::symmetric_from_fn(
            n,
            |_| 0.0,
            |i, j| sq_euclidean(phi.row(i), phi.row(j)),
        ));
    }
    let g = gram(x, kernel);
    let mut sq = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = radicand_to_sq(g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)])?;
            sq[(i, j)] = v;
            sq[(j, i)] = v;
        }
    }
    Ok(sq)
}

/// [`crate::dissim::dissim_matrix`] with every `‖x₁−x₂‖` replaced by the kernel distance.
pub fn kernel_dissim_matrix(
    data: &Dataset,
    params: &DissimParams,
    kernel: &KernelSpec,
) -> Result<DissimMatrix> {
    let sq = kernel_sq_distances(data.x(), kernel)?;
    assemble(data.s(), params, |i, j| sq[(i, j)])
}

/// Whether a 2×2 symmetric PSD matrix `[[a, b], [b, c]]` on two protected
/// profiles could serve as an additive kernel term that pushes same-profile
/// pairs apart, i.e. satisfies `2b > a + c`. Never true: `2b ≤ 2√(ac) ≤ a + c`.
pub fn additive_kernel_candidate(a: f64, b: f64, c: f64) -> bool {
    let psd = a >= 0.0 && c >= 0.0 && b * b <= a * c;
    psd && 2.0 * b > a + c
}
